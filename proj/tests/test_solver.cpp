#include "lipp/experiments.hpp"
#include "lipp/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lipp;

namespace {

// Two vertices, one unit-cost edge, one test point sitting on the target.
PlanQuery twoVertexQuery(double lambda, double budget, int s_max)
{
    PlanQuery q;
    q.world.vertices = {{0, {0, 0}, 0}, {1, {1, 0}, 0}};
    q.world.edges = {{0, 1, 1.0}};
    q.world.start = 0;
    q.world.target = 1;
    q.world.test_points = {{1, 0}};
    q.world.finalize();
    q.field.kernel = {KernelKind::SquaredExponential, 1.0, 0.6};
    q.field.noise_variance = 1.0;
    q.field.test_points = q.world.test_points;
    q.field.test_weights = Eigen::VectorXd::Ones(1);
    q.energy.lambda = lambda;
    q.energy.base_mass = 1.0;
    q.energy.s_max = s_max;
    q.energy.l_max = std::max(1.0, lambda * s_max * 2);
    q.energy.budget = budget;
    return q;
}

PlanQuery queryFor(Scenario const &sc, double lambda, double budget, int s_max)
{
    PlanQuery q;
    q.world = sc.world;
    q.field = sc.field;
    q.energy.lambda = lambda;
    q.energy.base_mass = 1.0;
    q.energy.s_max = s_max;
    q.energy.l_max = std::max(1.0, lambda * s_max * sc.world.numVertices());
    q.energy.budget = budget;
    return q;
}

Scenario scenario(std::uint64_t seed, int n, double density = 0.45)
{
    ScenarioSpec spec;
    spec.seed = seed;
    spec.n = n;
    spec.density = density;
    return generateScenario(spec);
}

}  // namespace

TEST_CASE("two-vertex world, weightless samples")
{
    auto const q = twoVertexQuery(0.0, 1.0, 1);
    auto const report = solveExact(q);
    REQUIRE(report.status == SolveStatus::Optimal);
    REQUIRE(report.plan.has_value());
    CHECK(report.plan->steps.size() == 2);
    CHECK(report.plan->steps[0].samples == 1);
    CHECK(report.plan->steps[1].samples == 1);
    CHECK(report.plan->energy == doctest::Approx(1.0));
}

TEST_CASE("two-vertex world, budget forbids sampling at start")
{
    auto const q = twoVertexQuery(1.0, 1.0, 1);
    auto const report = solveExact(q);
    REQUIRE(report.plan.has_value());
    CHECK(report.plan->steps[0].samples == 0);
    CHECK(report.plan->steps[1].samples == 1);
    CHECK(report.plan->energy == doctest::Approx(1.0));
}

TEST_CASE("brute force basics")
{
    // Budget below the only traversal's cost: infeasible.
    auto tight = twoVertexQuery(0.0, 0.5, 1);
    CHECK(enumerateBruteforce(tight).status == SolveStatus::Infeasible);
    CHECK(solveExact(tight).status == SolveStatus::Infeasible);

    // Weightless samples: the optimum fills every visited vertex to the cap.
    auto const sc = scenario(21, 6);
    auto free = queryFor(sc, 0.0, 3.0, 3);
    auto const report = enumerateBruteforce(free);
    REQUIRE(report.plan.has_value());
    for (auto const &step : report.plan->steps)
        CHECK(step.samples == 3);

    // Size guard.
    auto const big = scenario(4, 9, 0.4);
    auto guard = queryFor(big, 0.0, 3.0, 2);
    CHECK_THROWS_AS(enumerateBruteforce(guard), std::invalid_argument);
}

TEST_CASE("solver matches the brute-force oracle")
{
    for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
        auto const sc = scenario(seed, 6 + static_cast<int>(seed % 2));
        for (bool faithful : {false, true}) {
            auto q = queryFor(sc, 0.25 * static_cast<double>(seed % 4), 2.2, 3);
            q.visit_requires_sample = faithful;
            auto const exact = solveExact(q);
            auto const oracle = enumerateBruteforce(q);
            REQUIRE(exact.status == oracle.status);
            if (exact.plan) {
                CHECK(std::abs(exact.plan->objective - oracle.plan->objective) <= 1e-9);
                CHECK(exact.lower_bound <= exact.plan->objective + 1e-9);
            }
        }
    }
}

TEST_CASE("returned plans are feasible and self-consistent")
{
    for (std::uint64_t seed : {11, 12, 13, 14}) {
        auto const sc = scenario(seed, 7);
        auto q = queryFor(sc, 0.8, 2.5, 3);
        q.energy.distance_cap = 2.4;
        auto const report = solveExact(q);
        if (!report.plan)
            continue;
        auto const &plan = *report.plan;
        CHECK(plan.energy <= q.energy.budget + 1e-9);
        CHECK(plan.distance <= *q.energy.distance_cap + 1e-9);
        CHECK(pathEnergy(plan.steps, q.world, q.energy) == doctest::Approx(plan.energy));
        CHECK(pathDistance(plan.steps, q.world) == doctest::Approx(plan.distance));
        CHECK(posteriorVariance(q.field, q.world.positions(), [&] {
                  SampleAllocation a;
                  for (auto const &s : plan.steps)
                      if (s.samples > 0)
                          a.counts[s.vertex] = s.samples;
                  return a;
              }()) == doctest::Approx(plan.objective));
        auto const profile = loadProfile(plan.steps, q.energy);
        CHECK(profile.back().first <= q.energy.l_max + 1e-9);
        // Simple path: no vertex repeats.
        auto seq = plan.vertexSequence();
        std::sort(seq.begin(), seq.end());
        CHECK(std::adjacent_find(seq.begin(), seq.end()) == seq.end());
    }
}

TEST_CASE("variance lower bound is admissible")
{
    auto const sc = scenario(31, 6);
    auto const q = queryFor(sc, 0.5, 2.5, 3);
    auto const oracle = enumerateBruteforce(q);
    REQUIRE(oracle.plan.has_value());

    // Empty prefix: the full-sampling bound sits below any feasible plan.
    CHECK(varianceLowerBound(q, {{q.world.start, 0}}, {}) <= oracle.plan->objective + 1e-9);

    // Every prefix of the optimal plan bounds the plan it extends to.
    for (std::size_t k = 1; k <= oracle.plan->steps.size(); ++k) {
        std::vector<PlanStep> prefix(oracle.plan->steps.begin(),
                                     oracle.plan->steps.begin() + k);
        CHECK(varianceLowerBound(q, prefix, {}) <= oracle.plan->objective + 1e-9);
    }

    // A prefix covering everything at the cap has no slack left.
    auto full = queryFor(sc, 0.0, 1e9, 3);
    SampleAllocation all;
    for (int v = 0; v < sc.world.numVertices(); ++v)
        all.counts[v] = 3;
    double const exact_pv = posteriorVariance(full.field, full.world.positions(), all);
    std::vector<int> visited;
    for (int v = 0; v < sc.world.numVertices(); ++v)
        visited.push_back(v);
    // Prefixes need not be edge-connected for the bound itself; feed the
    // cover as visited set with the start prefix.
    std::vector<PlanStep> prefix{{sc.world.start, 3}};
    SUBCASE("bound shrinks as the candidate set grows")
    {
        double const loose = varianceLowerBound(full, prefix, {});
        double const tight = varianceLowerBound(full, prefix, visited);
        CHECK(loose <= tight + 1e-12);
        CHECK(loose <= exact_pv + 1e-12);
    }
}

TEST_CASE("gap and node limits")
{
    auto const sc = scenario(41, 8);
    auto q = queryFor(sc, 0.5, 2.5, 3);

    auto const exact = solveExact(q);
    REQUIRE(exact.plan.has_value());

    q.optimality_gap = 0.25;
    auto const relaxed = solveExact(q);
    REQUIRE(relaxed.plan.has_value());
    CHECK(relaxed.status != SolveStatus::Infeasible);
    CHECK(relaxed.plan->objective <= exact.plan->objective / (1.0 - 0.25) + 1e-9);
    CHECK(relaxed.lower_bound <= relaxed.plan->objective + 1e-9);
    if (relaxed.status == SolveStatus::GapReached)
        CHECK((relaxed.plan->objective - relaxed.lower_bound)
              <= 0.25 * relaxed.plan->objective + 1e-9);

    q.optimality_gap = 0.0;
    q.node_limit = 1;
    auto const limited = solveExact(q);
    CHECK(limited.status == SolveStatus::NodeLimit);
    CHECK(limited.nodes_explored <= 1);
    if (limited.plan)
        CHECK(limited.lower_bound <= limited.plan->objective + 1e-9);
}

TEST_CASE("distance bound arithmetic")
{
    EnergyParams p;
    p.lambda = 0.6;
    p.base_mass = 1.0;
    p.s_max = 3;
    p.l_max = 10;
    p.budget = 5;

    Plan e, d;
    e.steps = {{0, 1}, {1, 1}, {2, 1}};
    d.steps = {{0, 3}, {1, 3}, {2, 3}};
    e.distance = 2.0;
    d.distance = 1.5;
    e.energy = 3.0;
    d.energy = 6.0;

    auto res = distanceBound(e, d, p);
    CHECK(res.premises_hold);
    // Equal vertex counts collapse the bound to the sample cap.
    CHECK(res.bound == doctest::Approx(3.0));
    CHECK(res.ratio == doctest::Approx(2.0 / 1.5));
    CHECK(!res.violated);

    p.lambda = 0.0;
    d.steps = {{0, 3}, {2, 3}};
    res = distanceBound(e, d, p);
    CHECK(res.bound == doctest::Approx(3.0));  // lambda terms vanish

    d.distance = 0.0;
    CHECK_THROWS_AS(distanceBound(e, d, p), std::invalid_argument);
}

TEST_CASE("report json shape")
{
    auto const q = twoVertexQuery(0.0, 1.0, 1);
    auto const doc = solveExact(q).toJson();
    CHECK(doc.at("status") == "optimal");
    CHECK(doc.at("plan").at("steps").size() == 2);
    CHECK(doc.contains("lower_bound"));
    CHECK(doc.contains("nodes_explored"));
}
