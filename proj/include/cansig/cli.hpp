#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cansig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (args excludes the program name). Reports go to
// out; failures go to err as a one-line JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace cansig::cli
