#ifndef LIPP_SOLVER_H
#define LIPP_SOLVER_H

#include "lipp/gp_field.hpp"
#include "lipp/world.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lipp {

/**
 * An exact-solve request: minimize posterior variance over simple
 * start-target paths and per-vertex sample counts, subject to the energy
 * budget, the load cap, and the optional distance cap.
 *
 * visit_requires_sample selects the sampling semantics: false (default)
 * allows traversing a vertex without sampling it; true forces at least one
 * sample at every visited vertex, which is what the integer model encodes.
 */
struct PlanQuery {
    World world;
    FieldModel field;
    EnergyParams energy;
    double optimality_gap = 0.0;  // relative; 0 means prove optimality
    std::optional<long> node_limit;
    bool visit_requires_sample = false;

    void validate() const;
};

enum class SolveStatus { Optimal, GapReached, NodeLimit, Infeasible };

std::string statusName(SolveStatus status);

struct SolveReport {
    std::optional<Plan> plan;
    double lower_bound = 0.0;
    long nodes_explored = 0;
    double wall_time_s = 0.0;
    SolveStatus status = SolveStatus::Infeasible;

    nlohmann::json toJson() const;
};

/**
 * Exact branch-and-bound over simple start-target paths with per-vertex
 * sample counts. Returns the minimum-variance feasible plan; objectives are
 * evaluated with posteriorVariance. Infeasibility is reported through the
 * status, not an exception.
 */
SolveReport solveExact(PlanQuery const &query);

/**
 * Exhaustive oracle: enumerates every simple start-target path and every
 * allocation in {0..s_max}^path, filters by feasibility, and returns the
 * exact optimum. Guarded to small instances. Ties are broken by
 * lexicographically smallest vertex sequence, then smallest total samples.
 */
SolveReport enumerateBruteforce(PlanQuery const &query, int max_vertices = 8);

/**
 * Admissible lower bound on the objective of any feasible completion of the
 * given prefix: the posterior variance when every candidate vertex that is
 * not yet excluded (by reachability or by budget screening at the current
 * mass) is sampled at s_max.
 */
double varianceLowerBound(PlanQuery const &query, std::vector<PlanStep> const &prefix,
                          std::vector<int> const &visited);

/**
 * Worst-case path-length ratio audit for an energy-optimal plan against a
 * distance-optimal plan: D(P_E)/D(P_D) against
 * s_max * (R0 + lambda*p_D/2) / (R0 + lambda*p_E/2).
 */
struct DistanceBoundResult {
    double ratio = 0.0;
    double bound = 0.0;
    bool premises_hold = false;  // E(P_E) <= E(P_D) and D(P_D) <= D(P_E)
    bool violated = false;       // premises hold and ratio > bound + 1e-9
};

DistanceBoundResult distanceBound(Plan const &plan_e, Plan const &plan_d,
                                  EnergyParams const &params);

}  // namespace lipp

#endif  // LIPP_SOLVER_H
