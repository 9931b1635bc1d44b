#ifndef SWITCHCERT_CLI_HPP_
#define SWITCHCERT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace switchcert {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNoCertificate = 1;
inline constexpr int kBadInput = 2;

// Runs one invocation; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace switchcert

#endif  // SWITCHCERT_CLI_HPP_
