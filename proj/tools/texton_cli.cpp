// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return texton::runCli(argc, argv, std::cout, std::cerr); }
