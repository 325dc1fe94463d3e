#ifndef LIPP_ERRORS_H
#define LIPP_ERRORS_H

#include <stdexcept>
#include <string>

namespace lipp {

// Ill-conditioned linear algebra (factorization pivot collapse).
struct NumericalError : std::runtime_error {
    explicit NumericalError(std::string const &msg) : std::runtime_error(msg) {}
};

// A plan that violates its own bookkeeping (load cap, missing edge, ...).
struct InfeasiblePlanError : std::runtime_error {
    explicit InfeasiblePlanError(std::string const &msg) : std::runtime_error(msg) {}
};

// Scenario generation could not produce a usable instance.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(std::string const &msg) : std::runtime_error(msg) {}
};

}  // namespace lipp

#endif  // LIPP_ERRORS_H
