#ifndef LIPP_CLI_H
#define LIPP_CLI_H

#include <string>
#include <vector>

namespace lipp {

/**
 * Command-line front end. Commands: gen, plan, sweep-lambda, sweep-budget,
 * audit-bound, profile, export-miqp, validate.
 * Exit codes: 0 success, 1 infeasible / failed validation, 2 usage error,
 * 3 internal error.
 */
int runCli(std::vector<std::string> const &args);

}  // namespace lipp

#endif  // LIPP_CLI_H
