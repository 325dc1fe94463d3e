#ifndef LIPP_SRC_SEARCH_H
#define LIPP_SRC_SEARCH_H

// Internal branch-and-bound engine shared by the exact solver and the
// baselines. Not part of the installed headers.

#include "lipp/gp_field.hpp"
#include "lipp/solver.hpp"
#include "lipp/world.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lipp::search {

// Feasibility slack shared by solver, oracle, and report checks.
inline constexpr double kFeasTol = 1e-9;

// Two completions are considered tied when their objectives differ by less.
inline constexpr double kTieTol = 1e-12;

struct Options {
    double lambda = 0.0;
    double base_mass = 1.0;
    double l_max = 1.0;
    int s_max = 1;
    std::optional<double> energy_budget;    // constrain Sum d_j R_j
    std::optional<double> distance_budget;  // constrain Sum d_j
    std::optional<int> fixed_count;         // uniform count at every visited vertex
    int min_count = 0;                      // minimum samples per visited vertex
    double gap = 0.0;
    std::optional<long> node_limit;
};

/// Memoizing posterior-variance evaluator keyed by the full count vector.
class VarianceOracle {
public:
    VarianceOracle(FieldModel const &field, std::vector<Point> positions);

    double evaluate(std::vector<signed char> const &counts);

    int numVertices() const { return static_cast<int>(positions_.size()); }

private:
    FieldModel const &field_;
    std::vector<Point> positions_;
    std::unordered_map<std::string, double> cache_;
};

/**
 * Lower bound on the objective of any feasible completion of a prefix that
 * currently sits at `vertex` with the given counts/load/energy/distance:
 * every not-yet-excluded vertex is assumed sampled at the maximum level.
 */
double completionBound(World const &world, Options const &opts, Eigen::MatrixXd const &spd,
                       VarianceOracle &oracle, std::vector<signed char> counts, int vertex,
                       std::uint64_t visited, double load, double energy, double distance);

SolveReport branchAndBound(World const &world, FieldModel const &field, Options const &opts);

}  // namespace lipp::search

#endif  // LIPP_SRC_SEARCH_H
