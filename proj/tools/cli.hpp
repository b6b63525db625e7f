#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phyloalg::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 invalid input, 3 leaf mismatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitLeafMismatch = 3;

// Runs one command.  args excludes the program name.  Output that is not
// redirected with --out goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace phyloalg::cli
