#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wgp {

/// Entry point shared by the wgp binary and the tests. Exit codes: 0 ok,
/// 2 invalid input, 3 numeric failure, 4 failed diagnostic.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace wgp
