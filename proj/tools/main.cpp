// SPDX-License-Identifier: Apache-2.0
#include "rlbp/cli.hpp"

int main(int argc, char** argv) { return rlbp::cli_main(argc, argv); }
