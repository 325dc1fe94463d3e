#ifndef LIPP_BASELINES_H
#define LIPP_BASELINES_H

#include "lipp/solver.hpp"

#include <optional>

namespace lipp {

/**
 * Classical planning baseline: exact optimum over simple start-target paths
 * under a pure distance budget, with every visited vertex sampled uniformly.
 * Energy and load never constrain the search; reporting_energy (when given)
 * is only used to fill in the plan's post-hoc energy.
 */
struct CippQuery {
    World world;
    FieldModel field;
    double distance_budget = 2.0;
    int samples_per_vertex = 3;
    std::optional<EnergyParams> reporting_energy;

    void validate() const;
};

SolveReport solveCipp(CippQuery const &query);

enum class GreedyMode { DistanceBudget, EnergyBudget };

/**
 * Myopic baseline: repeatedly hop to the vertex with the best posterior
 * variance reduction per unit travel cost, keeping the target reachable
 * within the residual budget, then route to the target.
 */
struct GreedyQuery {
    World world;
    FieldModel field;
    EnergyParams energy;
    GreedyMode mode = GreedyMode::EnergyBudget;

    void validate() const;
};

SolveReport solveGreedy(GreedyQuery const &query);

}  // namespace lipp

#endif  // LIPP_BASELINES_H
