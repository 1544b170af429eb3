// ============================================================================
// levta/cli.hpp — command-line surface
// ============================================================================

#ifndef LEVTA_CLI_HPP
#define LEVTA_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace levta {

/// Dispatch the CLI. Exit codes: 0 = success / all verdicts pass,
/// 1 = some verdict failed, 2 = usage or input error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace levta

#endif  // LEVTA_CLI_HPP
