// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace rlbp {

/// Full command-line entry point (gen-trace, run, sweep, env-demo, budget).
/// Returns the process exit status; diagnostics go to stderr.
int cli_main(int argc, const char* const* argv);

}  // namespace rlbp
