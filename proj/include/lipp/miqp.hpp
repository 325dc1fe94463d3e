#ifndef LIPP_MIQP_H
#define LIPP_MIQP_H

#include "lipp/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lipp {

enum class VarKind { Binary, Integer, Continuous };

struct VarInfo {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = 0.0;
};

enum class RowSense { LE, GE, EQ };

/// One linear constraint row; the tag names the constraint family it
/// instantiates (flow_balance, mtz, mccormick_lb, ...).
struct LinRow {
    std::string tag;
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
};

/// coef * x_i * x_j with i <= j; squares carry i == j.
struct QuadTerm {
    int i = 0;
    int j = 0;
    double coef = 0.0;
};

struct MiqpObjective {
    double constant = 0.0;
    std::vector<std::pair<int, double>> linear;
    std::vector<QuadTerm> quadratic;
};

/**
 * Explicit mixed-integer quadratic model of the load-aware planning
 * problem: edge/visit/sampling binaries, ordering and load variables,
 * estimator coefficients (aggregate and per-level), and the McCormick
 * transport variables, with one tagged row per instantiated constraint.
 */
struct MiqpModel {
    std::vector<VarInfo> vars;
    std::vector<LinRow> rows;
    MiqpObjective objective;

    // Instance constants, echoed as structured comments in the export.
    int n = 0, m = 0, s_max = 0;
    int start = 0, target = 0;
    double lambda = 0.0, base_mass = 0.0, l_max = 0.0, r_max = 0.0;
    double budget = 0.0;
    std::optional<double> distance_cap;
    double a_max = 0.0, big_m_order = 0.0, big_m_load = 0.0;
    double noise_variance = 0.0;

    int addVar(std::string name, VarKind kind, double lb, double ub);
    int var(std::string const &name) const;  // throws on unknown name
    bool hasVar(std::string const &name) const;

    std::size_t numBinaries() const;
    std::size_t numIntegers() const;

private:
    std::unordered_map<std::string, int> index_;
};

/// Values for every model variable, by variable index.
struct Assignment {
    std::vector<double> values;

    static Assignment fromJson(MiqpModel const &model, nlohmann::json const &doc);
    nlohmann::json toJson(MiqpModel const &model) const;
};

/**
 * Builds the full integer model for a query: flow conservation and
 * endpoint rows, visit/estimator activation, MTZ ordering, load propagation
 * and robot mass, sampling levels, the McCormick-linearized energy budget,
 * per-level estimator disaggregation, and the optional distance cap.
 * The estimator bound defaults to defaultEstimatorBound unless overridden.
 */
MiqpModel buildMiqp(PlanQuery const &query, std::optional<double> a_max_override = {});

/// Deterministic LP-format export with a quadratic objective section.
void exportModel(MiqpModel const &model, std::ostream &out);
void exportModel(MiqpModel const &model, std::filesystem::path const &path);

/// Parses a file produced by exportModel back into a model.
MiqpModel parseLpModel(std::istream &in);
MiqpModel parseLpModel(std::filesystem::path const &path);

struct RowCheck {
    std::string tag;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // positive means violated by that amount
    bool pass = true;
};

struct ValidationReport {
    std::vector<RowCheck> rows;  // constraint rows, failing bounds/integrality, cross-checks
    double objective_value = 0.0;
    bool has_plan = false;
    Plan implied_plan;
    double plan_energy = 0.0;   // recomputed from the implied plan
    double model_energy = 0.0;  // sum of d_uv * T_uv
    bool all_pass = false;

    long failedRowCount() const;
    nlohmann::json toJson() const;
};

/**
 * Checks every constraint row, the variable bounds, and integrality at
 * tolerance `tol`; recomputes the quadratic objective; extracts the plan
 * implied by the edge binaries and cross-checks that its true energy fits
 * the budget and matches the transport terms exactly.
 */
ValidationReport validateAssignment(MiqpModel const &model, Assignment const &assignment,
                                    double tol = 1e-6);

/**
 * Encodes a solved plan as a model assignment: path binaries and orders,
 * loads and masses, sampling levels, estimator coefficients from the
 * normal equations, and T_uv = R_u on active edges.
 */
Assignment assignmentFromPlan(MiqpModel const &model, Plan const &plan, FieldModel const &field,
                              World const &world);

/// Feasible interval [lo, hi] for the transport variable of one edge under
/// the McCormick envelope, given the edge binary and the departing mass.
std::pair<double, double> mccormickInterval(double chi, double r_u, double r_max);

}  // namespace lipp

#endif  // LIPP_MIQP_H
