#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcde::cli {

//! Runs one command line (args[0] is the program name). Returns 0 on
//! success, 2 on a usage error and 1 on a runtime error; diagnostics go to
//! err as a single line.
int dispatch(const std::vector<std::string>& args,
             std::ostream& out,
             std::ostream& err);

} // namespace qcde::cli
