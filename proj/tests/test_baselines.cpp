#include "lipp/baselines.hpp"
#include "lipp/experiments.hpp"
#include "lipp/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace lipp;

namespace {

Scenario scenario(std::uint64_t seed, int n, double density = 0.45)
{
    ScenarioSpec spec;
    spec.seed = seed;
    spec.n = n;
    spec.density = density;
    return generateScenario(spec);
}

CippQuery cippFor(Scenario const &sc, double b, int s)
{
    CippQuery q;
    q.world = sc.world;
    q.field = sc.field;
    q.distance_budget = b;
    q.samples_per_vertex = s;
    return q;
}

EnergyParams energyFor(Scenario const &sc, double lambda, double budget, int s_max)
{
    EnergyParams p;
    p.lambda = lambda;
    p.base_mass = 1.0;
    p.s_max = s_max;
    p.l_max = std::max(1.0, lambda * s_max * sc.world.numVertices());
    p.budget = budget;
    return p;
}

}  // namespace

TEST_CASE("cipp budget edge cases")
{
    auto const sc = scenario(101, 6);
    double const shortest
        = allPairsCostLowerBounds(sc.world)(sc.world.start, sc.world.target);

    auto below = cippFor(sc, shortest * 0.99, 2);
    CHECK(solveCipp(below).status == SolveStatus::Infeasible);

    // Exactly the shortest distance: the shortest route is the only option.
    auto exact = cippFor(sc, shortest, 2);
    auto const forced = solveCipp(exact);
    REQUIRE(forced.plan.has_value());
    CHECK(forced.plan->distance == doctest::Approx(shortest));
    for (auto const &step : forced.plan->steps)
        CHECK(step.samples == 2);
}

TEST_CASE("more samples per vertex never hurt the objective")
{
    for (std::uint64_t seed : {111, 112, 113}) {
        auto const sc = scenario(seed, 6);
        auto const s1 = solveCipp(cippFor(sc, 2.0, 1));
        auto const s3 = solveCipp(cippFor(sc, 2.0, 3));
        if (!s1.plan || !s3.plan)
            continue;
        CHECK(s3.plan->objective <= s1.plan->objective + 1e-12);
        CHECK(s1.plan->distance <= 2.0 + 1e-9);
        CHECK(s3.plan->distance <= 2.0 + 1e-9);
    }
}

TEST_CASE("cipp search is decoupled from sample mass")
{
    auto const sc = scenario(121, 7);
    auto q = cippFor(sc, 2.2, 3);

    q.reporting_energy = energyFor(sc, 0.2, 1e9, 3);
    auto const light = solveCipp(q);
    q.reporting_energy = energyFor(sc, 5.0, 1e9, 3);
    auto const heavy = solveCipp(q);
    REQUIRE(light.plan.has_value());
    REQUIRE(heavy.plan.has_value());
    CHECK(light.plan->vertexSequence() == heavy.plan->vertexSequence());
    CHECK(light.plan->objective == doctest::Approx(heavy.plan->objective));
    // Only the post-hoc energy report changes.
    CHECK(heavy.plan->energy > light.plan->energy);
    CHECK(light.plan->energy
          == doctest::Approx(pathEnergy(light.plan->steps, sc.world, energyFor(sc, 0.2, 1e9, 3))));
}

TEST_CASE("greedy respects its budget and loses to the exact solver")
{
    for (std::uint64_t seed : {131, 132, 133, 134}) {
        auto const sc = scenario(seed, 7);
        auto const params = energyFor(sc, 0.75, 2.4, 3);

        GreedyQuery gq{sc.world, sc.field, params, GreedyMode::EnergyBudget};
        auto const greedy = solveGreedy(gq);
        if (!greedy.plan)
            continue;
        CHECK(greedy.plan->energy <= params.budget + 1e-9);
        CHECK(pathEnergy(greedy.plan->steps, sc.world, params)
              == doctest::Approx(greedy.plan->energy));
        CHECK(pathDistance(greedy.plan->steps, sc.world)
              == doctest::Approx(greedy.plan->distance));

        PlanQuery lq{sc.world, sc.field, params, 0.0, std::nullopt, false};
        auto const exact = solveExact(lq);
        REQUIRE(exact.plan.has_value());
        CHECK(exact.plan->objective <= greedy.plan->objective + 1e-9);
    }
}

TEST_CASE("greedy distance mode stays within the cap")
{
    auto const sc = scenario(141, 7);
    auto params = energyFor(sc, 1.0, 1e9, 3);
    params.distance_cap = 2.0;
    GreedyQuery gq{sc.world, sc.field, params, GreedyMode::DistanceBudget};
    auto const greedy = solveGreedy(gq);
    REQUIRE(greedy.plan.has_value());
    CHECK(greedy.plan->distance <= 2.0 + 1e-9);
}

TEST_CASE("greedy degenerate budget takes the shortest route")
{
    auto const sc = scenario(151, 6);
    auto const spd = allPairsCostLowerBounds(sc.world);
    double const shortest = spd(sc.world.start, sc.world.target);

    auto params = energyFor(sc, 1.0, 1e9, 3);
    params.distance_cap = shortest;
    GreedyQuery gq{sc.world, sc.field, params, GreedyMode::DistanceBudget};
    auto const greedy = solveGreedy(gq);
    REQUIRE(greedy.plan.has_value());
    CHECK(greedy.plan->distance == doctest::Approx(shortest));
    CHECK(greedy.plan->steps.front().samples == 3);
    CHECK(greedy.plan->steps.back().samples == 3);
    for (std::size_t i = 1; i + 1 < greedy.plan->steps.size(); ++i)
        CHECK(greedy.plan->steps[i].samples == 0);

    // Budget below the shortest route: infeasible.
    params.distance_cap = shortest * 0.95;
    CHECK(solveGreedy({sc.world, sc.field, params, GreedyMode::DistanceBudget}).status
          == SolveStatus::Infeasible);
}

TEST_CASE("greedy first hop maximizes gain per distance")
{
    // Start at the left, target at the right; one candidate sits on the test
    // cluster a short hop away, one far off it. The near informative vertex
    // must be chosen first.
    World w;
    w.vertices = {{0, {0, 0}, 0}, {1, {0.4, 0.1}, 0}, {2, {0.5, -0.9}, 0}, {3, {1.2, 0}, 0}};
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v)
            if (u != v)
                w.edges.push_back({u, v, euclid(w.vertices[u].position, w.vertices[v].position)});
    w.start = 0;
    w.target = 3;
    w.test_points = {{0.45, 0.15}, {0.5, 0.2}};
    w.finalize();

    FieldModel field;
    field.kernel = {KernelKind::SquaredExponential, 1.0, 0.3};
    field.noise_variance = 0.5;
    field.test_points = w.test_points;
    field.test_weights = Eigen::VectorXd::Ones(2);

    EnergyParams params;
    params.lambda = 0.0;
    params.base_mass = 1.0;
    params.s_max = 2;
    params.l_max = 8.0;
    params.budget = 100.0;

    auto const greedy = solveGreedy({w, field, params, GreedyMode::EnergyBudget});
    REQUIRE(greedy.plan.has_value());
    REQUIRE(greedy.plan->steps.size() >= 2);
    CHECK(greedy.plan->steps[1].vertex == 1);
}

TEST_CASE("weightless samples reduce the exact problem to the classical one")
{
    // Same budget value as distance and as energy with unit base mass.
    for (std::uint64_t seed : {161, 162, 163, 164, 165}) {
        auto const sc = scenario(seed, 7);
        auto const lipp = solveExact(
            {sc.world, sc.field, energyFor(sc, 0.0, 2.0, 3), 0.0, std::nullopt, false});
        auto const cipp = solveCipp(cippFor(sc, 2.0, 3));
        REQUIRE(lipp.plan.has_value() == cipp.plan.has_value());
        if (lipp.plan)
            CHECK(std::abs(lipp.plan->objective - cipp.plan->objective) <= 1e-9);
    }
}
