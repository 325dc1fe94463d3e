#ifndef LIPP_EXPERIMENTS_H
#define LIPP_EXPERIMENTS_H

#include "lipp/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lipp {

/**
 * Recipe for one random instance: graph size and density, arena geometry,
 * terrain and kernel settings, and the seed that makes it reproducible.
 */
struct ScenarioSpec {
    int n = 8;
    double density = 0.30;  // fraction of ordered vertex pairs kept as edges
    std::uint64_t seed = 1;
    double area = 0.75;  // square side length
    double height_amplitude = 0.2;
    double alpha = 0.5;
    double signal_variance = 1.0;
    double lengthscale = 0.35;
    double noise_variance = 0.5;
    int test_point_count = 4;

    void validate() const;
};

/**
 * Deterministic instance generation: uniform vertex positions, smooth
 * low-frequency heights, Bernoulli(density) directed edges costed by the
 * terrain model, the farthest-apart pair as start/target, and uniform test
 * points. Disconnected draws are retried on derived seeds and, as a last
 * resort, repaired with a direct start-target edge (recorded in metadata).
 */
Scenario generateScenario(ScenarioSpec const &spec);

/// One experiment measurement. NaN / -1 mark fields that do not apply.
struct MetricsRow {
    std::string method;
    std::uint64_t seed = 0;
    int n = 0;
    double lambda;
    double kappa;
    double budget;
    double objective;
    double prior;
    double reduction;
    double energy;
    double distance;
    double efficiency;
    int path_vertices = 0;
    int total_samples = 0;
    double bound_ratio;
    double bound_value;
    int bound_premises = -1;
    int bound_violation = -1;
    int paired_path_vertices = -1;
    double paired_distance;
    std::string status;
    double wall_time_ms;

    MetricsRow();
};

/**
 * For each scenario and each unit mass: the exact load-aware plan under
 * energy budget B, the classical baseline under distance budget b at every
 * uniform sampling level, and the greedy heuristic. Baseline energies are
 * evaluated post hoc at the row's unit mass.
 */
std::vector<MetricsRow> lambdaSweep(std::vector<ScenarioSpec> const &specs,
                                    std::vector<double> const &lambdas, double energy_budget,
                                    double distance_budget, double base_mass, int s_max);

/**
 * Budget-regime study: per instance, solve the classical baseline under
 * the distance budget, evaluate the energy it needs at the sweep's unit
 * mass (sampling s_max everywhere), then give the load-aware planner
 * kappa times that energy.
 */
std::vector<MetricsRow> budgetSweep(std::vector<ScenarioSpec> const &specs,
                                    std::vector<double> const &kappas, int s_max,
                                    double distance_budget, double base_mass, double lambda);

struct BoundAuditReport {
    long rows_considered = 0;
    long premise_rows = 0;
    long violations = 0;
    double max_quotient = 0.0;  // max ratio/bound over premise rows
    long equal_length_rows = 0;
    long equal_length_violations = 0;

    nlohmann::json toJson() const;
};

/// Audits the path-length bound over every row that carries bound fields.
BoundAuditReport boundAudit(std::vector<MetricsRow> const &rows);

/**
 * Wall-time per method per graph size; specs should ascend in n. The exact
 * solver runs at the given relative gap. Runs single-threaded so the
 * recorded times are honest.
 */
std::vector<MetricsRow> runtimeProfile(std::vector<ScenarioSpec> const &specs, double gap,
                                       int s_max, double energy_budget, double distance_budget,
                                       double base_mass, double lambda);

void writeCsv(std::ostream &out, std::vector<MetricsRow> const &rows);
std::vector<MetricsRow> readCsv(std::istream &in);

/// Per-(method, lambda, kappa) means and standard errors.
nlohmann::json summarize(std::vector<MetricsRow> const &rows);

/// Worker count for sweep fan-out: LIPP_THREADS, default 1.
int sweepThreads();

}  // namespace lipp

#endif  // LIPP_EXPERIMENTS_H
