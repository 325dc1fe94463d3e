#include "lipp/baselines.hpp"
#include "search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace lipp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using search::kFeasTol;

struct Leg {
    double cost = 0.0;
    std::vector<int> path;  // from source to destination inclusive
};

// Dijkstra from `from` to `to` over vertices not in `blocked` (the source is
// always allowed). Deterministic: ties settle on the smaller vertex id.
std::optional<Leg> shortestLeg(World const &world, int from, int to,
                               std::vector<bool> const &blocked)
{
    int const n = world.numVertices();
    std::vector<double> dist(n, kInf);
    std::vector<int> pred(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[from] = 0.0;
    heap.push({0.0, from});
    while (!heap.empty()) {
        auto const [d, u] = heap.top();
        heap.pop();
        if (d > dist[u])
            continue;
        if (u == to)
            break;
        for (int e : world.outEdges(u)) {
            auto const &edge = world.edges[e];
            if (blocked[edge.v])
                continue;
            double const nd = d + edge.cost;
            if (nd < dist[edge.v]) {
                dist[edge.v] = nd;
                pred[edge.v] = u;
                heap.push({nd, edge.v});
            }
        }
    }
    if (dist[to] == kInf)
        return std::nullopt;
    Leg leg;
    leg.cost = dist[to];
    for (int v = to; v != -1; v = pred[v])
        leg.path.push_back(v);
    std::reverse(leg.path.begin(), leg.path.end());
    return leg;
}

}  // namespace

void CippQuery::validate() const
{
    field.validate();
    if (!(distance_budget > 0))
        throw std::invalid_argument("distance_budget must be positive");
    if (samples_per_vertex < 1)
        throw std::invalid_argument("samples_per_vertex must be at least 1");
    if (reporting_energy)
        reporting_energy->validate();
}

SolveReport solveCipp(CippQuery const &query)
{
    query.validate();

    EnergyParams reporting;
    if (query.reporting_energy) {
        reporting = *query.reporting_energy;
    } else {
        reporting.lambda = 1.0;
        reporting.base_mass = 1.0;
        reporting.s_max = query.samples_per_vertex;
        reporting.l_max = 1.0 * query.samples_per_vertex * query.world.numVertices();
        reporting.budget = 1e300;
    }

    search::Options opts;
    opts.lambda = reporting.lambda;
    opts.base_mass = reporting.base_mass;
    opts.l_max = 1e300;  // load never constrains this baseline
    opts.s_max = query.samples_per_vertex;
    opts.fixed_count = query.samples_per_vertex;
    opts.distance_budget = query.distance_budget;
    return search::branchAndBound(query.world, query.field, opts);
}

void GreedyQuery::validate() const
{
    field.validate();
    energy.validate();
}

SolveReport solveGreedy(GreedyQuery const &query)
{
    auto const t0 = std::chrono::steady_clock::now();
    query.validate();

    auto const &world = query.world;
    auto const &params = query.energy;
    int const n = world.numVertices();
    int const s = world.start;
    int const t = world.target;
    bool const energy_mode = query.mode == GreedyMode::EnergyBudget;
    double const budget
        = energy_mode ? params.budget : params.distance_cap.value_or(params.budget);

    search::VarianceOracle oracle(query.field, world.positions());
    long evaluations = 0;

    auto finish = [&](SolveReport report) {
        report.wall_time_s
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.nodes_explored = evaluations;
        return report;
    };

    std::vector<bool> visited(n, false);
    std::vector<signed char> counts(n, 0);
    std::vector<PlanStep> steps;
    double load = 0.0, energy = 0.0, distance = 0.0;
    int pos = s;

    auto loadFits = [&](int c) { return load + params.lambda * c <= params.l_max + kFeasTol; };

    auto const first_leg = shortestLeg(world, s, t, visited);
    if (!first_leg)
        return finish({std::nullopt, 0.0, 0, 0.0, SolveStatus::Infeasible});

    // Samples at the start: the largest count that keeps the direct escape
    // to the target affordable.
    int start_count = -1;
    for (int c = params.s_max; c >= 0; --c) {
        if (!loadFits(c))
            continue;
        double const mass = params.base_mass + params.lambda * c;
        bool const ok = energy_mode ? mass * first_leg->cost <= budget + kFeasTol
                                    : first_leg->cost <= budget + kFeasTol;
        if (ok) {
            start_count = c;
            break;
        }
    }
    if (start_count < 0)
        return finish({std::nullopt, 0.0, 0, 0.0, SolveStatus::Infeasible});

    visited[s] = true;
    counts[s] = static_cast<signed char>(start_count);
    steps.push_back({s, start_count});
    load = params.lambda * start_count;
    double current_variance = oracle.evaluate(counts);

    auto commitLeg = [&](Leg const &leg, int dest_count) {
        // Pass-through vertices carry no samples; mass is constant until
        // the destination is sampled.
        double const mass = params.base_mass + load;
        for (std::size_t i = 1; i + 1 < leg.path.size(); ++i) {
            int const w = leg.path[i];
            visited[w] = true;
            steps.push_back({w, 0});
        }
        int const dest = leg.path.back();
        visited[dest] = true;
        steps.push_back({dest, dest_count});
        counts[dest] = static_cast<signed char>(dest_count);
        load += params.lambda * dest_count;
        energy += mass * leg.cost;
        distance += leg.cost;
        pos = dest;
    };

    while (true) {
        int best_vertex = -1;
        double best_ratio = -kInf;
        Leg best_leg;

        auto avoid_target = visited;
        avoid_target[t] = true;  // the target ends the route, never mid-leg

        for (int u = 0; u < n; ++u) {
            if (visited[u] || u == t)
                continue;
            if (!loadFits(params.s_max))
                continue;
            auto const leg = shortestLeg(world, pos, u, avoid_target);
            if (!leg)
                continue;

            auto blocked = visited;
            for (int w : leg->path)
                blocked[w] = true;
            blocked[u] = false;  // source of the next leg
            auto const escape = shortestLeg(world, u, t, blocked);
            if (!escape)
                continue;

            if (energy_mode) {
                double const mass_now = params.base_mass + load;
                double const mass_after = mass_now + params.lambda * params.s_max;
                double const committed
                    = energy + mass_now * leg->cost + mass_after * escape->cost;
                if (committed > budget + kFeasTol)
                    continue;
            } else {
                if (distance + leg->cost + escape->cost > budget + kFeasTol)
                    continue;
            }

            auto trial = counts;
            trial[u] = static_cast<signed char>(params.s_max);
            ++evaluations;
            double const gain = current_variance - oracle.evaluate(trial);
            double const ratio = gain / leg->cost;
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_vertex = u;
                best_leg = *leg;
            }
        }

        if (best_vertex < 0)
            break;
        commitLeg(best_leg, params.s_max);
        current_variance = oracle.evaluate(counts);
    }

    auto const last_leg = shortestLeg(world, pos, t, visited);
    if (!last_leg)
        return finish({std::nullopt, 0.0, 0, 0.0, SolveStatus::Infeasible});
    if (energy_mode && energy + (params.base_mass + load) * last_leg->cost > budget + kFeasTol)
        return finish({std::nullopt, 0.0, 0, 0.0, SolveStatus::Infeasible});
    if (!energy_mode && distance + last_leg->cost > budget + kFeasTol)
        return finish({std::nullopt, 0.0, 0, 0.0, SolveStatus::Infeasible});

    int target_count = 0;
    for (int c = params.s_max; c >= 0; --c)
        if (loadFits(c)) {
            target_count = c;
            break;
        }
    commitLeg(*last_leg, target_count);

    Plan plan;
    plan.steps = steps;
    plan.objective = oracle.evaluate(counts);
    plan.energy = energy;
    plan.distance = distance;

    SolveReport report;
    report.plan = std::move(plan);
    report.lower_bound = 0.0;  // trivial bound for a nonnegative objective
    report.status = SolveStatus::Optimal;
    return finish(report);
}

}  // namespace lipp
