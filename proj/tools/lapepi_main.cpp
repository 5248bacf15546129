// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "lapepi/cli.hpp"

int main(int argc, char** argv) { return lapepi::cli::run(argc, argv, std::cout, std::cerr); }
