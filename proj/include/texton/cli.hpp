// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <ostream>

namespace texton {

/// Runs the command line. Returns 0 on success, 2 on usage errors and 1 when
/// the requested operation fails.
int runCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace texton
