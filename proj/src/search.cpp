#include "search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lipp::search {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

struct Node {
    std::vector<PlanStep> steps;
    std::uint64_t visited = 0;
    double load = 0.0;
    double energy = 0.0;
    double distance = 0.0;
    double lb = 0.0;
};

std::vector<signed char> countsOf(std::vector<PlanStep> const &steps, int n)
{
    std::vector<signed char> counts(n, 0);
    for (auto const &s : steps)
        counts[s.vertex] = static_cast<signed char>(s.samples);
    return counts;
}

// Incumbent tie-break key: energy (when it is constrained), distance, then
// the vertex sequence.
struct Incumbent {
    Plan plan;
    double objective = kInf;

    bool wouldReplace(Options const &opts, double obj, double energy, double distance,
                      std::vector<int> const &seq) const
    {
        if (obj < objective - kTieTol)
            return true;
        if (obj > objective + kTieTol)
            return false;
        if (opts.energy_budget) {
            if (energy != plan.energy)
                return energy < plan.energy;
        }
        if (distance != plan.distance)
            return distance < plan.distance;
        return seq < plan.vertexSequence();
    }
};

}  // namespace

VarianceOracle::VarianceOracle(FieldModel const &field, std::vector<Point> positions)
    : field_(field), positions_(std::move(positions))
{
}

double VarianceOracle::evaluate(std::vector<signed char> const &counts)
{
    std::string key(counts.begin(), counts.end());
    auto it = cache_.find(key);
    if (it != cache_.end())
        return it->second;

    SampleAllocation alloc;
    for (std::size_t v = 0; v < counts.size(); ++v)
        if (counts[v] > 0)
            alloc.counts[static_cast<int>(v)] = counts[v];
    double const value = posteriorVariance(field_, positions_, alloc);
    cache_.emplace(std::move(key), value);
    return value;
}

double completionBound(World const &world, Options const &opts, Eigen::MatrixXd const &spd,
                       VarianceOracle &oracle, std::vector<signed char> counts, int vertex,
                       std::uint64_t visited, double load, double energy, double distance)
{
    int const n = world.numVertices();
    int const t = world.target;
    int const level = opts.fixed_count.value_or(opts.s_max);
    double const mass = opts.base_mass + load;

    for (int w = 0; w < n; ++w) {
        if (w == t || (visited >> w) & 1)
            continue;
        double const detour = spd(vertex, w) + spd(w, t);
        if (detour == kInf)
            continue;
        if (opts.energy_budget && energy + mass * detour > *opts.energy_budget + kFeasTol)
            continue;
        if (opts.distance_budget && distance + detour > *opts.distance_budget + kFeasTol)
            continue;
        if (opts.energy_budget && opts.min_count > 0
            && load + opts.lambda * opts.min_count > opts.l_max + kFeasTol)
            continue;
        counts[w] = static_cast<signed char>(level);
    }
    counts[t] = static_cast<signed char>(std::max<int>(counts[t], level));
    return oracle.evaluate(counts);
}

SolveReport branchAndBound(World const &world, FieldModel const &field, Options const &opts)
{
    auto const t0 = Clock::now();

    int const n = world.numVertices();
    if (n > 64)
        throw std::invalid_argument("search supports at most 64 vertices");
    int const s = world.start;
    int const t = world.target;

    auto const spd = allPairsCostLowerBounds(world);
    VarianceOracle oracle(field, world.positions());

    bool const cap_load = opts.energy_budget.has_value();

    // Sample-count choices at an intermediate vertex, most samples first.
    auto countChoices = [&](double load) {
        std::vector<int> out;
        if (opts.fixed_count) {
            out.push_back(*opts.fixed_count);
            return out;
        }
        for (int c = opts.s_max; c >= opts.min_count; --c) {
            if (cap_load && load + opts.lambda * c > opts.l_max + kFeasTol)
                continue;
            out.push_back(c);
        }
        return out;
    };

    // Largest feasible count at the target; samples there add no transport
    // energy, so more is never worse.
    auto targetCount = [&](double load) -> std::optional<int> {
        if (opts.fixed_count) {
            if (cap_load && load + opts.lambda * *opts.fixed_count > opts.l_max + kFeasTol)
                return std::nullopt;
            return *opts.fixed_count;
        }
        for (int c = opts.s_max; c >= opts.min_count; --c)
            if (!cap_load || load + opts.lambda * c <= opts.l_max + kFeasTol)
                return c;
        return std::nullopt;
    };

    Incumbent best;
    bool have_best = false;
    bool gap_pruned = false;
    double gap_pruned_lb = kInf;
    long nodes = 0;
    bool node_limited = false;

    auto pruneThreshold = [&]() {
        if (!have_best)
            return kInf;
        return opts.gap > 0 ? best.objective * (1.0 - opts.gap) : best.objective;
    };

    auto tryComplete = [&](Node const &node, double new_energy, double new_distance) {
        if (opts.energy_budget && new_energy > *opts.energy_budget + kFeasTol)
            return;
        if (opts.distance_budget && new_distance > *opts.distance_budget + kFeasTol)
            return;
        auto const c = targetCount(node.load);
        if (!c)
            return;
        auto steps = node.steps;
        steps.push_back({t, *c});
        double const obj = oracle.evaluate(countsOf(steps, n));
        auto seq = [&] {
            std::vector<int> out;
            for (auto const &st : steps)
                out.push_back(st.vertex);
            return out;
        }();
        if (!have_best || best.wouldReplace(opts, obj, new_energy, new_distance, seq)) {
            best.plan.steps = std::move(steps);
            best.plan.objective = obj;
            best.plan.energy = new_energy;
            best.plan.distance = new_distance;
            best.objective = obj;
            have_best = true;
        }
    };

    std::vector<Node> stack;

    auto pushChild = [&](Node node) {
        double const threshold = pruneThreshold();
        if (node.lb >= threshold) {
            if (have_best && node.lb < best.objective) {
                gap_pruned = true;
                gap_pruned_lb = std::min(gap_pruned_lb, node.lb);
            }
            return;
        }
        stack.push_back(std::move(node));
    };

    // Roots: choose the sample count at the start vertex.
    {
        std::vector<Node> roots;
        for (int c : countChoices(0.0)) {
            Node node;
            node.steps = {{s, c}};
            node.visited = std::uint64_t{1} << s;
            node.load = opts.lambda * c;
            double const mass = opts.base_mass + node.load;
            if (spd(s, t) == kInf)
                continue;
            if (opts.energy_budget && mass * spd(s, t) > *opts.energy_budget + kFeasTol)
                continue;
            if (opts.distance_budget && spd(s, t) > *opts.distance_budget + kFeasTol)
                continue;
            node.lb = completionBound(world, opts, spd, oracle, countsOf(node.steps, n), s,
                                      node.visited, node.load, 0.0, 0.0);
            roots.push_back(std::move(node));
        }
        // Reverse so the most-samples-first choice is expanded first.
        for (auto it = roots.rbegin(); it != roots.rend(); ++it)
            pushChild(std::move(*it));
    }

    while (!stack.empty()) {
        if (opts.node_limit && nodes >= *opts.node_limit) {
            node_limited = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++nodes;

        // The incumbent may have improved since this node was pushed.
        double const threshold = pruneThreshold();
        if (node.lb >= threshold) {
            if (have_best && node.lb < best.objective) {
                gap_pruned = true;
                gap_pruned_lb = std::min(gap_pruned_lb, node.lb);
            }
            continue;
        }

        int const u = node.steps.back().vertex;
        double const mass_u = opts.base_mass + node.load;

        std::vector<Node> children;
        for (int e : world.outEdges(u)) {
            auto const &edge = world.edges[e];
            int const v = edge.v;
            if ((node.visited >> v) & 1)
                continue;
            double const new_energy = node.energy + edge.cost * mass_u;
            double const new_distance = node.distance + edge.cost;

            if (v == t) {
                tryComplete(node, new_energy, new_distance);
                continue;
            }
            double const rest = spd(v, t);
            if (rest == kInf)
                continue;
            if (opts.distance_budget && new_distance + rest > *opts.distance_budget + kFeasTol)
                continue;

            for (int c : countChoices(node.load)) {
                Node child;
                child.steps = node.steps;
                child.steps.push_back({v, c});
                child.visited = node.visited | (std::uint64_t{1} << v);
                child.load = node.load + opts.lambda * c;
                child.energy = new_energy;
                child.distance = new_distance;
                double const mass_v = opts.base_mass + child.load;
                if (opts.energy_budget
                    && new_energy + mass_v * rest > *opts.energy_budget + kFeasTol)
                    continue;
                child.lb = completionBound(world, opts, spd, oracle, countsOf(child.steps, n), v,
                                           child.visited, child.load, child.energy,
                                           child.distance);
                children.push_back(std::move(child));
            }
        }
        for (auto it = children.rbegin(); it != children.rend(); ++it)
            pushChild(std::move(*it));
    }

    SolveReport report;
    report.nodes_explored = nodes;

    if (node_limited) {
        report.status = SolveStatus::NodeLimit;
        double lb = have_best ? best.objective : kInf;
        lb = std::min(lb, gap_pruned_lb);
        for (auto const &open : stack)
            lb = std::min(lb, open.lb);
        report.lower_bound = std::isfinite(lb) ? lb : 0.0;
        if (have_best)
            report.plan = best.plan;
    } else if (!have_best) {
        report.status = SolveStatus::Infeasible;
        report.lower_bound = 0.0;
    } else {
        report.plan = best.plan;
        if (gap_pruned) {
            report.status = SolveStatus::GapReached;
            report.lower_bound = std::min(best.objective, gap_pruned_lb);
        } else {
            report.status = SolveStatus::Optimal;
            report.lower_bound = best.objective;
        }
    }

    report.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return report;
}

}  // namespace lipp::search
