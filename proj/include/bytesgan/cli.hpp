#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bytesgan {

/// Runs one command line (without the program name). Returns the exit
/// status: 0 success, 2 configuration error, 3 I/O or format error,
/// 4 numerical divergence, 1 anything else.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

} // namespace bytesgan
