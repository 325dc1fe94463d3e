#include "lipp/experiments.hpp"
#include "lipp/baselines.hpp"
#include "lipp/errors.hpp"
#include "lipp/rng.hpp"
#include "lipp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

namespace lipp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double fieldFor(double amplitude, double area, std::array<double, 4> const (&waves)[3],
                Point const &p)
{
    double total = 0.0, weight = 0.0;
    for (auto const &[amp, fx, fy, phase] : waves) {
        total += amp * std::sin(2.0 * std::numbers::pi * (fx * p.x + fy * p.y) / area + phase);
        weight += amp;
    }
    return amplitude * total / weight;
}

}  // namespace

MetricsRow::MetricsRow()
    : lambda(kNan), kappa(kNan), budget(kNan), objective(kNan), prior(kNan), reduction(kNan),
      energy(kNan), distance(kNan), efficiency(kNan), bound_ratio(kNan), bound_value(kNan),
      paired_distance(kNan), wall_time_ms(kNan)
{
}

void ScenarioSpec::validate() const
{
    if (n < 3)
        throw std::invalid_argument("spec.n must be at least 3");
    if (!(density > 0) || density > 1)
        throw std::invalid_argument("spec.density must lie in (0, 1]");
    if (!(area > 0))
        throw std::invalid_argument("spec.area must be positive");
    if (test_point_count < 1)
        throw std::invalid_argument("spec.test_point_count must be at least 1");
    if (!(signal_variance > 0) || !(lengthscale > 0) || !(noise_variance > 0))
        throw std::invalid_argument("kernel/noise settings must be positive");
}

Scenario generateScenario(ScenarioSpec const &spec)
{
    spec.validate();
    int constexpr kMaxAttempts = 32;

    Scenario sc;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(spec.seed ^ (static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ull));
        sc = Scenario{};
        sc.seed = spec.seed;
        sc.alpha = spec.alpha;

        std::vector<Point> pos(spec.n);
        for (auto &p : pos)
            p = {rng.uniform(0, spec.area), rng.uniform(0, spec.area)};

        // Smooth low-frequency elevation: a few random plane waves.
        std::array<double, 4> waves[3];
        for (auto &w : waves)
            w = {rng.uniform(0.5, 1.0), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                 rng.uniform(0.0, 2.0 * std::numbers::pi)};

        for (int v = 0; v < spec.n; ++v)
            sc.world.vertices.push_back(
                {v, pos[v], fieldFor(spec.height_amplitude, spec.area, waves, pos[v])});

        bool bad_cost = false;
        for (int u = 0; u < spec.n && !bad_cost; ++u)
            for (int v = 0; v < spec.n; ++v) {
                if (u == v)
                    continue;
                if (rng.uniform() < spec.density) {
                    try {
                        sc.world.edges.push_back(
                            {u, v, terrainCost(sc.world.vertices[u], sc.world.vertices[v],
                                               spec.alpha)});
                    } catch (ScenarioError const &) {
                        bad_cost = true;
                        break;
                    }
                }
            }
        if (bad_cost)
            continue;

        for (int i = 0; i < spec.test_point_count; ++i)
            sc.field.test_points.push_back({rng.uniform(0, spec.area), rng.uniform(0, spec.area)});

        // Start and target: the farthest-apart pair.
        double best = -1.0;
        int bi = 0, bj = 1;
        for (int i = 0; i < spec.n; ++i)
            for (int j = i + 1; j < spec.n; ++j) {
                double const d = euclid(pos[i], pos[j]);
                if (d > best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        sc.world.start = bi;
        sc.world.target = bj;

        bool const last_attempt = attempt + 1 == kMaxAttempts;
        bool reachable
            = allPairsCostLowerBounds(sc.world)(bi, bj) != std::numeric_limits<double>::infinity();
        bool repaired = false;
        if (!reachable && last_attempt) {
            sc.world.edges.push_back({bi, bj,
                                      terrainCost(sc.world.vertices[bi], sc.world.vertices[bj],
                                                  spec.alpha)});
            reachable = true;
            repaired = true;
        }
        if (!reachable)
            continue;

        sc.field.kernel = {KernelKind::SquaredExponential, spec.signal_variance,
                           spec.lengthscale};
        sc.field.noise_variance = spec.noise_variance;
        sc.field.test_weights = Eigen::VectorXd::Ones(spec.test_point_count);
        sc.world.test_points = sc.field.test_points;

        sc.energy.lambda = 1.0;
        sc.energy.base_mass = 1.0;
        sc.energy.s_max = 3;
        sc.energy.l_max = std::max(1.0, sc.energy.lambda * sc.energy.s_max * spec.n);
        sc.energy.budget = 2.0;

        sc.metadata = {{"generator",
                        {{"n", spec.n},
                         {"density", spec.density},
                         {"area", spec.area},
                         {"height_amplitude", spec.height_amplitude},
                         {"alpha", spec.alpha},
                         {"test_point_count", spec.test_point_count},
                         {"attempts", attempt + 1},
                         {"repaired", repaired}}}};

        sc.world.finalize();
        sc.field.validate();
        sc.energy.validate();
        return sc;
    }
    throw ScenarioError("could not generate a connected scenario for seed "
                        + std::to_string(spec.seed));
}

int sweepThreads()
{
    if (char const *env = std::getenv("LIPP_THREADS")) {
        int const v = std::atoi(env);
        if (v >= 1 && v <= 64)
            return v;
    }
    return 1;
}

namespace {

void parallelFor(std::size_t count, std::function<void(std::size_t)> const &fn)
{
    int const threads = sweepThreads();
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(threads))
                fn(i);
        });
    for (auto &th : pool)
        th.join();
}

EnergyParams paramsAt(double lambda, double base_mass, int s_max, double budget, int n)
{
    EnergyParams p;
    p.lambda = lambda;
    p.base_mass = base_mass;
    p.s_max = s_max;
    p.l_max = std::max(1.0, lambda * s_max * n);
    p.budget = budget;
    return p;
}

MetricsRow baseRow(std::string method, ScenarioSpec const &spec, double lambda)
{
    MetricsRow row;
    row.method = std::move(method);
    row.seed = spec.seed;
    row.n = spec.n;
    row.lambda = lambda;
    return row;
}

void fillFromPlan(MetricsRow &row, Plan const &plan, double prior, double energy_at_lambda)
{
    row.objective = plan.objective;
    row.prior = prior;
    row.reduction = prior - plan.objective;
    row.energy = energy_at_lambda;
    row.distance = plan.distance;
    row.efficiency = energy_at_lambda > 0 ? row.reduction / energy_at_lambda : kNan;
    row.path_vertices = plan.numVertices();
    row.total_samples = plan.totalSamples();
}

void fillBound(MetricsRow &row, Plan lipp_plan, Plan cipp_plan, double cipp_energy,
               EnergyParams const &params)
{
    cipp_plan.energy = cipp_energy;
    auto const res = distanceBound(lipp_plan, cipp_plan, params);
    row.bound_ratio = res.ratio;
    row.bound_value = res.bound;
    row.bound_premises = res.premises_hold ? 1 : 0;
    row.bound_violation = res.violated ? 1 : 0;
    row.paired_path_vertices = cipp_plan.numVertices();
    row.paired_distance = cipp_plan.distance;
}

}  // namespace

std::vector<MetricsRow> lambdaSweep(std::vector<ScenarioSpec> const &specs,
                                    std::vector<double> const &lambdas, double energy_budget,
                                    double distance_budget, double base_mass, int s_max)
{
    std::vector<std::vector<MetricsRow>> buckets(specs.size());

    parallelFor(specs.size(), [&](std::size_t job) {
        auto const &spec = specs[job];
        auto const sc = generateScenario(spec);
        double const prior = sc.field.priorVariance();
        auto &rows = buckets[job];

        // The classical baseline ignores sample mass entirely; solve it once
        // per sampling level and re-cost it per unit mass below.
        std::vector<SolveReport> cipp(s_max + 1);
        for (int level = 1; level <= s_max; ++level) {
            CippQuery q{sc.world, sc.field, distance_budget, level, std::nullopt};
            cipp[level] = solveCipp(q);
        }

        for (double lambda : lambdas) {
            auto const params = paramsAt(lambda, base_mass, s_max, energy_budget, spec.n);

            for (int level = 1; level <= s_max; ++level) {
                auto row = baseRow("CIPP_S" + std::to_string(level), spec, lambda);
                row.budget = distance_budget;
                row.status = statusName(cipp[level].status);
                row.wall_time_ms = cipp[level].wall_time_s * 1e3;
                if (cipp[level].plan)
                    fillFromPlan(row, *cipp[level].plan, prior,
                                 pathEnergy(cipp[level].plan->steps, sc.world, params));
                rows.push_back(std::move(row));
            }

            // Studies evaluate the integer formulation's semantics: every
            // visited vertex collects at least one sample.
            PlanQuery lq{sc.world, sc.field, params, 0.0, std::nullopt, true};
            auto const lipp = solveExact(lq);
            {
                auto row = baseRow("LIPP", spec, lambda);
                row.budget = energy_budget;
                row.status = statusName(lipp.status);
                row.wall_time_ms = lipp.wall_time_s * 1e3;
                if (lipp.plan) {
                    fillFromPlan(row, *lipp.plan, prior, lipp.plan->energy);
                    if (cipp[s_max].plan)
                        fillBound(row, *lipp.plan, *cipp[s_max].plan,
                                  pathEnergy(cipp[s_max].plan->steps, sc.world, params), params);
                }
                rows.push_back(std::move(row));
            }

            GreedyQuery gq{sc.world, sc.field, params, GreedyMode::EnergyBudget};
            auto const greedy = solveGreedy(gq);
            {
                auto row = baseRow("GREEDY", spec, lambda);
                row.budget = energy_budget;
                row.status = statusName(greedy.status);
                row.wall_time_ms = greedy.wall_time_s * 1e3;
                if (greedy.plan)
                    fillFromPlan(row, *greedy.plan, prior, greedy.plan->energy);
                rows.push_back(std::move(row));
            }
        }
    });

    std::vector<MetricsRow> rows;
    for (auto &bucket : buckets)
        for (auto &row : bucket)
            rows.push_back(std::move(row));
    return rows;
}

std::vector<MetricsRow> budgetSweep(std::vector<ScenarioSpec> const &specs,
                                    std::vector<double> const &kappas, int s_max,
                                    double distance_budget, double base_mass, double lambda)
{
    std::vector<std::vector<MetricsRow>> buckets(specs.size());

    parallelFor(specs.size(), [&](std::size_t job) {
        auto const &spec = specs[job];
        auto const sc = generateScenario(spec);
        double const prior = sc.field.priorVariance();
        auto &rows = buckets[job];

        CippQuery cq{sc.world, sc.field, distance_budget, s_max, std::nullopt};
        auto const cipp = solveCipp(cq);
        if (!cipp.plan)
            return;  // no reference energy; skip the instance

        auto const ref_params = paramsAt(lambda, base_mass, s_max, 1.0, spec.n);
        double const b_cipp = pathEnergy(cipp.plan->steps, sc.world, ref_params);

        for (double kappa : kappas) {
            double const budget = kappa * b_cipp;
            auto const params = paramsAt(lambda, base_mass, s_max, budget, spec.n);

            {
                auto row = baseRow("CIPP_S" + std::to_string(s_max), spec, lambda);
                row.kappa = kappa;
                row.budget = distance_budget;
                row.status = statusName(cipp.status);
                row.wall_time_ms = cipp.wall_time_s * 1e3;
                fillFromPlan(row, *cipp.plan, prior, b_cipp);
                rows.push_back(std::move(row));
            }

            PlanQuery lq{sc.world, sc.field, params, 0.0, std::nullopt, true};
            auto const lipp = solveExact(lq);
            {
                auto row = baseRow("LIPP", spec, lambda);
                row.kappa = kappa;
                row.budget = budget;
                row.status = statusName(lipp.status);
                row.wall_time_ms = lipp.wall_time_s * 1e3;
                if (lipp.plan) {
                    fillFromPlan(row, *lipp.plan, prior, lipp.plan->energy);
                    fillBound(row, *lipp.plan, *cipp.plan, b_cipp, params);
                }
                rows.push_back(std::move(row));
            }

            GreedyQuery gq{sc.world, sc.field, params, GreedyMode::EnergyBudget};
            auto const greedy = solveGreedy(gq);
            {
                auto row = baseRow("GREEDY", spec, lambda);
                row.kappa = kappa;
                row.budget = budget;
                row.status = statusName(greedy.status);
                row.wall_time_ms = greedy.wall_time_s * 1e3;
                if (greedy.plan)
                    fillFromPlan(row, *greedy.plan, prior, greedy.plan->energy);
                rows.push_back(std::move(row));
            }
        }
    });

    std::vector<MetricsRow> rows;
    for (auto &bucket : buckets)
        for (auto &row : bucket)
            rows.push_back(std::move(row));
    return rows;
}

BoundAuditReport boundAudit(std::vector<MetricsRow> const &rows)
{
    BoundAuditReport report;
    for (auto const &row : rows) {
        if (row.bound_premises < 0)
            continue;
        ++report.rows_considered;
        if (row.bound_premises == 1) {
            ++report.premise_rows;
            if (row.bound_violation == 1)
                ++report.violations;
            if (row.bound_value > 0)
                report.max_quotient
                    = std::max(report.max_quotient, row.bound_ratio / row.bound_value);
            if (row.paired_path_vertices == row.path_vertices) {
                ++report.equal_length_rows;
                if (row.bound_violation == 1)
                    ++report.equal_length_violations;
            }
        }
    }
    return report;
}

nlohmann::json BoundAuditReport::toJson() const
{
    return {{"rows_considered", rows_considered},
            {"premise_rows", premise_rows},
            {"violations", violations},
            {"max_quotient", max_quotient},
            {"equal_length_rows", equal_length_rows},
            {"equal_length_violations", equal_length_violations}};
}

std::vector<MetricsRow> runtimeProfile(std::vector<ScenarioSpec> const &specs, double gap,
                                       int s_max, double energy_budget, double distance_budget,
                                       double base_mass, double lambda)
{
    std::vector<MetricsRow> rows;
    for (auto const &spec : specs) {
        auto const sc = generateScenario(spec);
        double const prior = sc.field.priorVariance();
        auto const params = paramsAt(lambda, base_mass, s_max, energy_budget, spec.n);

        CippQuery cq{sc.world, sc.field, distance_budget, s_max, std::nullopt};
        auto const cipp = solveCipp(cq);
        {
            auto row = baseRow("CIPP_S" + std::to_string(s_max), spec, lambda);
            row.budget = distance_budget;
            row.status = statusName(cipp.status);
            row.wall_time_ms = cipp.wall_time_s * 1e3;
            if (cipp.plan)
                fillFromPlan(row, *cipp.plan, prior,
                             pathEnergy(cipp.plan->steps, sc.world, params));
            rows.push_back(std::move(row));
        }

        PlanQuery lq{sc.world, sc.field, params, gap, std::nullopt, true};
        auto const lipp = solveExact(lq);
        {
            auto row = baseRow("LIPP", spec, lambda);
            row.budget = energy_budget;
            row.status = statusName(lipp.status);
            row.wall_time_ms = lipp.wall_time_s * 1e3;
            if (lipp.plan)
                fillFromPlan(row, *lipp.plan, prior, lipp.plan->energy);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

std::string csvNum(double v)
{
    if (std::isnan(v))
        return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csvInt(int v)
{
    return v < 0 ? "" : std::to_string(v);
}

double parseNum(std::string const &s)
{
    return s.empty() ? kNan : std::strtod(s.c_str(), nullptr);
}

int parseIntOr(std::string const &s, int fallback)
{
    return s.empty() ? fallback : std::atoi(s.c_str());
}

constexpr char const *kCsvHeader
    = "method,seed,n,lambda,kappa,budget,objective,prior_variance,variance_reduction,energy,"
      "distance,efficiency,path_vertices,total_samples,bound_ratio,bound_value,"
      "bound_premises_hold,bound_violation,paired_path_vertices,paired_distance,status,"
      "wall_time_ms";

}  // namespace

void writeCsv(std::ostream &out, std::vector<MetricsRow> const &rows)
{
    out << kCsvHeader << '\n';
    for (auto const &r : rows) {
        out << r.method << ',' << r.seed << ',' << r.n << ',' << csvNum(r.lambda) << ','
            << csvNum(r.kappa) << ',' << csvNum(r.budget) << ',' << csvNum(r.objective) << ','
            << csvNum(r.prior) << ',' << csvNum(r.reduction) << ',' << csvNum(r.energy) << ','
            << csvNum(r.distance) << ',' << csvNum(r.efficiency) << ',' << r.path_vertices << ','
            << r.total_samples << ',' << csvNum(r.bound_ratio) << ',' << csvNum(r.bound_value)
            << ',' << csvInt(r.bound_premises) << ',' << csvInt(r.bound_violation) << ','
            << csvInt(r.paired_path_vertices) << ',' << csvNum(r.paired_distance) << ','
            << r.status << ',' << csvNum(r.wall_time_ms) << '\n';
    }
}

std::vector<MetricsRow> readCsv(std::istream &in)
{
    std::vector<MetricsRow> rows;
    std::string line;
    if (!std::getline(in, line))
        return rows;
    if (line != kCsvHeader)
        throw std::invalid_argument("unrecognized metrics CSV header");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        cells.resize(22);
        MetricsRow r;
        r.method = cells[0];
        r.seed = std::strtoull(cells[1].c_str(), nullptr, 10);
        r.n = parseIntOr(cells[2], 0);
        r.lambda = parseNum(cells[3]);
        r.kappa = parseNum(cells[4]);
        r.budget = parseNum(cells[5]);
        r.objective = parseNum(cells[6]);
        r.prior = parseNum(cells[7]);
        r.reduction = parseNum(cells[8]);
        r.energy = parseNum(cells[9]);
        r.distance = parseNum(cells[10]);
        r.efficiency = parseNum(cells[11]);
        r.path_vertices = parseIntOr(cells[12], 0);
        r.total_samples = parseIntOr(cells[13], 0);
        r.bound_ratio = parseNum(cells[14]);
        r.bound_value = parseNum(cells[15]);
        r.bound_premises = parseIntOr(cells[16], -1);
        r.bound_violation = parseIntOr(cells[17], -1);
        r.paired_path_vertices = parseIntOr(cells[18], -1);
        r.paired_distance = parseNum(cells[19]);
        r.status = cells[20];
        r.wall_time_ms = parseNum(cells[21]);
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::json summarize(std::vector<MetricsRow> const &rows)
{
    struct Acc {
        std::vector<double> objective, reduction, energy, distance, efficiency;
        long count = 0;
        long failures = 0;
    };
    auto stats = [](std::vector<double> const &xs) -> nlohmann::json {
        if (xs.empty())
            return nullptr;
        double mean = 0.0;
        for (double x : xs)
            mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs)
            var += (x - mean) * (x - mean);
        double const sem
            = xs.size() > 1 ? std::sqrt(var / (static_cast<double>(xs.size()) - 1))
                                  / std::sqrt(static_cast<double>(xs.size()))
                            : 0.0;
        return {{"mean", mean}, {"stderr", sem}, {"count", xs.size()}};
    };

    std::map<std::string, Acc> groups;
    for (auto const &r : rows) {
        std::ostringstream key;
        key << r.method;
        if (!std::isnan(r.lambda))
            key << "|lambda=" << csvNum(r.lambda);
        if (!std::isnan(r.kappa))
            key << "|kappa=" << csvNum(r.kappa);
        auto &acc = groups[key.str()];
        ++acc.count;
        if (std::isnan(r.objective)) {
            ++acc.failures;
            continue;
        }
        acc.objective.push_back(r.objective);
        acc.reduction.push_back(r.reduction);
        acc.energy.push_back(r.energy);
        acc.distance.push_back(r.distance);
        acc.efficiency.push_back(r.efficiency);
    }

    nlohmann::json doc;
    for (auto const &[key, acc] : groups)
        doc[key] = {{"rows", acc.count},           {"failures", acc.failures},
                    {"objective", stats(acc.objective)}, {"variance_reduction", stats(acc.reduction)},
                    {"energy", stats(acc.energy)},  {"distance", stats(acc.distance)},
                    {"efficiency", stats(acc.efficiency)}};
    return doc;
}

}  // namespace lipp
