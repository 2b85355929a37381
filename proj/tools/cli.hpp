#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrst::cli {

/// Runs the command line; returns 0 on success, 2 on validation errors and 1 on
/// runtime errors. Reports go to --out or to `out`; diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrst::cli
