#ifndef ANDERSON_CLI_HPP
#define ANDERSON_CLI_HPP

namespace anderson {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the anderson_krylov tool: `run` and `validate` subcommands.
int cli_main(int argc, const char* const* argv);

}  // namespace anderson

#endif  // ANDERSON_CLI_HPP
