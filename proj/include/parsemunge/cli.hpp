#pragma once

#include <ostream>

namespace parsemunge {

// Entry point behind the parsemunge executable. Returns the process exit
// code: 0 success, 2 configuration error, 3 data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parsemunge
