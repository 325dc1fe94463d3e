#include "lipp/world.hpp"
#include "lipp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lipp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void World::finalize()
{
    int const n = numVertices();
    if (n < 2)
        throw std::invalid_argument("world needs at least two vertices");

    for (int i = 0; i < n; ++i) {
        if (vertices[i].id != i)
            throw std::invalid_argument("vertex ids must be dense 0..n-1 in order");
        if (!isFinite(vertices[i].position) || !std::isfinite(vertices[i].height))
            throw std::invalid_argument("non-finite vertex geometry");
    }
    if (start < 0 || start >= n || target < 0 || target >= n)
        throw std::invalid_argument("start/target out of range");
    if (start == target)
        throw std::invalid_argument("start and target must differ");

    out_edges_.assign(n, {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto const &[u, v, cost] = edges[e];
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (u == v)
            throw std::invalid_argument("self-loop on vertex " + std::to_string(u));
        if (!(cost > 0) || !std::isfinite(cost))
            throw std::invalid_argument("edge costs must be strictly positive and finite");
        out_edges_[u].push_back(static_cast<int>(e));
    }
    for (auto &out : out_edges_)
        std::sort(out.begin(), out.end(), [&](int a, int b) {
            if (edges[a].cost != edges[b].cost)
                return edges[a].cost < edges[b].cost;
            return edges[a].v < edges[b].v;
        });

    if (allPairsCostLowerBounds(*this)(start, target) == kInf)
        throw std::invalid_argument("target is not reachable from start");
}

std::vector<Point> World::positions() const
{
    std::vector<Point> out;
    out.reserve(vertices.size());
    for (auto const &v : vertices)
        out.push_back(v.position);
    return out;
}

std::optional<double> World::edgeCost(int u, int v) const
{
    if (u < 0 || u >= numVertices())
        return std::nullopt;
    for (int e : out_edges_[u])
        if (edges[e].v == v)
            return edges[e].cost;
    return std::nullopt;
}

void EnergyParams::validate() const
{
    if (lambda < 0 || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be nonnegative and finite");
    if (!(base_mass > 0))
        throw std::invalid_argument("base_mass must be positive");
    if (s_max < 1)
        throw std::invalid_argument("s_max must be at least 1");
    if (!(l_max > 0))
        throw std::invalid_argument("l_max must be positive");
    if (l_max < lambda * s_max)
        throw std::invalid_argument("l_max must allow one fully sampled vertex");
    if (!(budget > 0))
        throw std::invalid_argument("budget must be positive");
    if (distance_cap && !(*distance_cap > 0))
        throw std::invalid_argument("distance_cap must be positive");
}

int Plan::totalSamples() const
{
    int total = 0;
    for (auto const &s : steps)
        total += s.samples;
    return total;
}

std::vector<int> Plan::vertexSequence() const
{
    std::vector<int> out;
    out.reserve(steps.size());
    for (auto const &s : steps)
        out.push_back(s.vertex);
    return out;
}

double terrainCost(Vertex const &u, Vertex const &v, double alpha)
{
    double const d = euclid(u.position, v.position);
    double const cost = d * (1.0 + alpha * (v.height - u.height));
    if (!(cost > 0) || !std::isfinite(cost))
        throw ScenarioError("nonpositive terrain cost between vertices " + std::to_string(u.id)
                            + " and " + std::to_string(v.id));
    return cost;
}

std::vector<std::pair<double, double>> loadProfile(std::vector<PlanStep> const &steps,
                                                   EnergyParams const &params)
{
    params.validate();
    std::vector<std::pair<double, double>> out;
    out.reserve(steps.size());
    double load = 0.0;
    for (auto const &step : steps) {
        if (step.samples < 0 || step.samples > params.s_max)
            throw std::invalid_argument("sample count out of [0, s_max] at vertex "
                                        + std::to_string(step.vertex));
        load += params.lambda * step.samples;
        if (load > params.l_max + 1e-12)
            throw InfeasiblePlanError("sample load " + std::to_string(load)
                                      + " exceeds l_max at vertex " + std::to_string(step.vertex));
        out.emplace_back(load, params.base_mass + load);
    }
    return out;
}

double pathEnergy(std::vector<PlanStep> const &steps, World const &world,
                  EnergyParams const &params)
{
    auto const profile = loadProfile(steps, params);
    double energy = 0.0;
    for (std::size_t j = 0; j + 1 < steps.size(); ++j) {
        auto const cost = world.edgeCost(steps[j].vertex, steps[j + 1].vertex);
        if (!cost)
            throw std::invalid_argument("plan uses missing edge " + std::to_string(steps[j].vertex)
                                        + "->" + std::to_string(steps[j + 1].vertex));
        energy += *cost * profile[j].second;
    }
    return energy;
}

double pathDistance(std::vector<PlanStep> const &steps, World const &world)
{
    double distance = 0.0;
    for (std::size_t j = 0; j + 1 < steps.size(); ++j) {
        auto const cost = world.edgeCost(steps[j].vertex, steps[j + 1].vertex);
        if (!cost)
            throw std::invalid_argument("plan uses missing edge " + std::to_string(steps[j].vertex)
                                        + "->" + std::to_string(steps[j + 1].vertex));
        distance += *cost;
    }
    return distance;
}

Eigen::MatrixXd allPairsCostLowerBounds(World const &world)
{
    int const n = world.numVertices();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, kInf);
    for (int v = 0; v < n; ++v)
        dist(v, v) = 0.0;
    for (auto const &e : world.edges)
        dist(e.u, e.v) = std::min(dist(e.u, e.v), e.cost);

    // Floyd-Warshall; n stays small enough that O(n^3) is irrelevant.
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            if (dist(i, k) == kInf)
                continue;
            for (int j = 0; j < n; ++j)
                if (dist(i, k) + dist(k, j) < dist(i, j))
                    dist(i, j) = dist(i, k) + dist(k, j);
        }
    return dist;
}

}  // namespace lipp
