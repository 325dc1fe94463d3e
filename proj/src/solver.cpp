#include "lipp/solver.hpp"
#include "lipp/errors.hpp"
#include "search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lipp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
using search::kFeasTol;
using search::kTieTol;
}  // namespace

void PlanQuery::validate() const
{
    energy.validate();
    field.validate();
    if (optimality_gap < 0 || optimality_gap >= 1)
        throw std::invalid_argument("optimality_gap must lie in [0, 1)");
    if (node_limit && *node_limit <= 0)
        throw std::invalid_argument("node_limit must be positive");
    if (field.test_points.size() != world.test_points.size())
        throw std::invalid_argument("field and world disagree on the test set");
}

std::string statusName(SolveStatus status)
{
    switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapReached: return "gap-reached";
    case SolveStatus::NodeLimit: return "node-limit";
    case SolveStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

nlohmann::json SolveReport::toJson() const
{
    nlohmann::json doc;
    doc["status"] = statusName(status);
    doc["lower_bound"] = lower_bound;
    doc["nodes_explored"] = nodes_explored;
    doc["wall_time_s"] = wall_time_s;
    if (plan) {
        nlohmann::json steps = nlohmann::json::array();
        for (auto const &s : plan->steps)
            steps.push_back({{"vertex", s.vertex}, {"samples", s.samples}});
        doc["plan"] = {{"steps", std::move(steps)},
                       {"objective", plan->objective},
                       {"energy", plan->energy},
                       {"distance", plan->distance}};
    } else {
        doc["plan"] = nullptr;
    }
    return doc;
}

static search::Options optionsFor(PlanQuery const &query)
{
    search::Options opts;
    opts.lambda = query.energy.lambda;
    opts.base_mass = query.energy.base_mass;
    opts.l_max = query.energy.l_max;
    opts.s_max = query.energy.s_max;
    opts.energy_budget = query.energy.budget;
    opts.distance_budget = query.energy.distance_cap;
    opts.min_count = query.visit_requires_sample ? 1 : 0;
    opts.gap = query.optimality_gap;
    opts.node_limit = query.node_limit;
    return opts;
}

SolveReport solveExact(PlanQuery const &query)
{
    query.validate();
    return search::branchAndBound(query.world, query.field, optionsFor(query));
}

SolveReport enumerateBruteforce(PlanQuery const &query, int max_vertices)
{
    auto const t0 = std::chrono::steady_clock::now();
    query.validate();

    int const n = query.world.numVertices();
    if (n > max_vertices)
        throw std::invalid_argument("instance too large for brute force: " + std::to_string(n)
                                    + " > " + std::to_string(max_vertices));

    auto const &world = query.world;
    auto const &params = query.energy;
    int const s = world.start;
    int const t = world.target;
    int const cmin = query.visit_requires_sample ? 1 : 0;

    auto const spd = allPairsCostLowerBounds(world);
    search::VarianceOracle oracle(query.field, world.positions());

    // Neighbors in ascending vertex-id order so paths enumerate in
    // lexicographic order of their vertex sequences.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (auto const &e : world.edges)
        adj[e.u].emplace_back(e.v, e.cost);
    for (auto &a : adj)
        std::sort(a.begin(), a.end());

    struct Best {
        std::vector<PlanStep> steps;
        double objective = kInf;
        double energy = 0.0, distance = 0.0;
        int total = 0;
    } best;
    bool have_best = false;
    long evaluated = 0;

    std::vector<int> path;
    std::vector<double> edge_costs;       // edge j: path[j] -> path[j+1]
    std::vector<double> suffix_distance;  // distance from edge j onward

    std::vector<PlanStep> steps;

    // Enumerate all allocations over a fixed path, pruning on the minimal
    // achievable energy (future samples only add mass).
    auto enumerateCounts = [&](auto &&self, std::size_t pos, double load, double energy) -> void {
        int const v = path[pos];
        bool const last = pos + 1 == path.size();
        for (int c = cmin; c <= params.s_max; ++c) {
            double const new_load = load + params.lambda * c;
            if (new_load > params.l_max + kFeasTol)
                break;
            double const mass = params.base_mass + new_load;
            if (last) {
                if (energy > params.budget + kFeasTol)
                    continue;
                ++evaluated;
                steps.push_back({v, c});
                auto counts = std::vector<signed char>(n, 0);
                for (auto const &st : steps)
                    counts[st.vertex] = static_cast<signed char>(st.samples);
                double const obj = oracle.evaluate(counts);
                int const total = [&] {
                    int sum = 0;
                    for (auto const &st : steps)
                        sum += st.samples;
                    return sum;
                }();
                bool replace = false;
                if (!have_best || obj < best.objective - kTieTol) {
                    replace = true;
                } else if (obj <= best.objective + kTieTol) {
                    auto seqOf = [](std::vector<PlanStep> const &st) {
                        std::vector<int> out;
                        for (auto const &x : st)
                            out.push_back(x.vertex);
                        return out;
                    };
                    auto const seq_new = seqOf(steps);
                    auto const seq_old = seqOf(best.steps);
                    replace = seq_new < seq_old || (seq_new == seq_old && total < best.total);
                }
                if (replace) {
                    best.steps = steps;
                    best.objective = obj;
                    best.energy = energy;
                    best.distance = suffix_distance[0];
                    best.total = total;
                    have_best = true;
                }
                steps.pop_back();
            } else {
                // Even with no further samples, the remaining edges cost at
                // least the current mass times the remaining distance; more
                // samples here only make that worse.
                if (energy + suffix_distance[pos] * mass > params.budget + kFeasTol)
                    break;
                double const next_energy = energy + edge_costs[pos] * mass;
                steps.push_back({v, c});
                self(self, pos + 1, new_load, next_energy);
                steps.pop_back();
            }
        }
    };

    auto handlePath = [&] {
        double distance = 0.0;
        edge_costs.clear();
        for (std::size_t j = 0; j + 1 < path.size(); ++j) {
            double const c = *world.edgeCost(path[j], path[j + 1]);
            edge_costs.push_back(c);
            distance += c;
        }
        if (params.distance_cap && distance > *params.distance_cap + kFeasTol)
            return;
        if (params.base_mass * distance > params.budget + kFeasTol)
            return;  // even the unladen traversal busts the budget
        suffix_distance.assign(path.size(), 0.0);
        for (std::size_t j = path.size() - 1; j-- > 0;)
            suffix_distance[j] = suffix_distance[j + 1] + edge_costs[j];
        steps.clear();
        enumerateCounts(enumerateCounts, 0, 0.0, 0.0);
    };

    std::vector<bool> visited(n, false);
    auto dfs = [&](auto &&self, int u, double distance) -> void {
        if (u == t) {
            handlePath();
            return;
        }
        for (auto const &[v, cost] : adj[u]) {
            if (visited[v])
                continue;
            if (spd(v, t) == kInf)
                continue;
            if (params.distance_cap
                && distance + cost + spd(v, t) > *params.distance_cap + kFeasTol)
                continue;
            visited[v] = true;
            path.push_back(v);
            self(self, v, distance + cost);
            path.pop_back();
            visited[v] = false;
        }
    };

    visited[s] = true;
    path.push_back(s);
    dfs(dfs, s, 0.0);

    SolveReport report;
    report.nodes_explored = evaluated;
    if (have_best) {
        Plan plan;
        plan.steps = best.steps;
        plan.objective = best.objective;
        plan.energy = best.energy;
        plan.distance = best.distance;
        report.plan = std::move(plan);
        report.lower_bound = best.objective;
        report.status = SolveStatus::Optimal;
    } else {
        report.status = SolveStatus::Infeasible;
        report.lower_bound = 0.0;
    }
    report.wall_time_s
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

double varianceLowerBound(PlanQuery const &query, std::vector<PlanStep> const &prefix,
                          std::vector<int> const &visited)
{
    query.validate();
    auto const &world = query.world;
    int const n = world.numVertices();
    auto const spd = allPairsCostLowerBounds(world);
    search::VarianceOracle oracle(query.field, world.positions());

    std::uint64_t mask = 0;
    for (auto const &s : prefix)
        mask |= std::uint64_t{1} << s.vertex;
    for (int v : visited)
        mask |= std::uint64_t{1} << v;

    double load = 0.0;
    for (auto const &s : prefix)
        load += query.energy.lambda * s.samples;
    double const energy = prefix.empty() ? 0.0 : pathEnergy(prefix, world, query.energy);
    double const distance = prefix.empty() ? 0.0 : pathDistance(prefix, world);
    int const at = prefix.empty() ? world.start : prefix.back().vertex;

    std::vector<signed char> counts(n, 0);
    for (auto const &s : prefix)
        counts[s.vertex] = static_cast<signed char>(s.samples);

    return search::completionBound(world, optionsFor(query), spd, oracle, std::move(counts), at,
                                   mask, load, energy, distance);
}

DistanceBoundResult distanceBound(Plan const &plan_e, Plan const &plan_d,
                                  EnergyParams const &params)
{
    params.validate();
    if (!(plan_d.distance > 0))
        throw std::invalid_argument("distance-optimal plan has zero distance");
    if (plan_e.steps.empty() || plan_d.steps.empty())
        throw std::invalid_argument("plans must be nonempty");

    DistanceBoundResult res;
    res.ratio = plan_e.distance / plan_d.distance;
    double const p_e = static_cast<double>(plan_e.numVertices());
    double const p_d = static_cast<double>(plan_d.numVertices());
    res.bound = params.s_max * (params.base_mass + params.lambda * p_d / 2.0)
                / (params.base_mass + params.lambda * p_e / 2.0);
    res.premises_hold = plan_e.energy <= plan_d.energy + kFeasTol
                        && plan_d.distance <= plan_e.distance + kFeasTol;
    res.violated = res.premises_hold && res.ratio > res.bound + 1e-9;
    return res;
}

}  // namespace lipp
