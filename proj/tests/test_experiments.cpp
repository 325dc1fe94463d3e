#include "lipp/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace lipp;

namespace {

std::vector<ScenarioSpec> specsFor(int count, std::uint64_t base, int n, double density)
{
    std::vector<ScenarioSpec> specs;
    for (int i = 0; i < count; ++i) {
        ScenarioSpec spec;
        spec.seed = base + static_cast<std::uint64_t>(i);
        spec.n = n;
        spec.density = density;
        specs.push_back(spec);
    }
    return specs;
}

// CSV with the wall-time column blanked, for determinism comparisons.
std::string stableCsv(std::vector<MetricsRow> const &rows)
{
    std::ostringstream out;
    writeCsv(out, rows);
    std::istringstream in(out.str());
    std::ostringstream kept;
    std::string line;
    while (std::getline(in, line)) {
        auto const cut = line.rfind(',');
        kept << line.substr(0, cut) << '\n';
    }
    return kept.str();
}

}  // namespace

TEST_CASE("scenario generation is deterministic")
{
    ScenarioSpec spec;
    spec.seed = 7;
    spec.n = 9;
    spec.density = 0.35;
    auto const a = generateScenario(spec);
    auto const b = generateScenario(spec);
    CHECK(a.toJson().dump(2) == b.toJson().dump(2));

    ScenarioSpec other = spec;
    other.seed = 8;
    CHECK(generateScenario(other).toJson().dump() != a.toJson().dump());
}

TEST_CASE("density one gives the complete digraph")
{
    ScenarioSpec spec;
    spec.seed = 3;
    spec.n = 7;
    spec.density = 1.0;
    auto const sc = generateScenario(spec);
    CHECK(sc.world.edges.size() == 7u * 6u);
}

TEST_CASE("edge count matches the binomial expectation")
{
    double total = 0.0;
    int const trials = 300;
    for (int i = 0; i < trials; ++i) {
        ScenarioSpec spec;
        spec.seed = 1000 + static_cast<std::uint64_t>(i);
        spec.n = 10;
        spec.density = 0.15;
        total += static_cast<double>(generateScenario(spec).world.edges.size());
    }
    double const mean = total / trials;
    // 90 * 0.15 = 13.5 before the connectivity retry bias.
    CHECK(mean > 12.0);
    CHECK(mean < 15.5);
}

TEST_CASE("lambda sweep invariants at desk scale")
{
    auto const specs = specsFor(6, 400, 7, 0.35);
    std::vector<double> const lambdas{0.0, 1.0};
    auto const rows = lambdaSweep(specs, lambdas, 2.0, 2.0, 1.0, 3);

    // Same work twice is bit-identical apart from timing.
    auto const again = lambdaSweep(specs, lambdas, 2.0, 2.0, 1.0, 3);
    CHECK(stableCsv(rows) == stableCsv(again));

    std::map<std::pair<std::uint64_t, double>, MetricsRow const *> lipp, cipp3;
    double cipp_energy_l0 = 0.0, cipp_energy_l1 = 0.0;
    for (auto const &row : rows) {
        if (row.method == "LIPP") {
            lipp[{row.seed, row.lambda}] = &row;
            if (!std::isnan(row.energy))
                CHECK(row.energy <= 2.0 + 1e-9);
        }
        if (row.method == "CIPP_S3") {
            cipp3[{row.seed, row.lambda}] = &row;
            if (!std::isnan(row.energy))
                (row.lambda == 0.0 ? cipp_energy_l0 : cipp_energy_l1) += row.energy;
        }
        if (!std::isnan(row.reduction))
            CHECK(row.reduction >= -1e-12);
    }

    // Weightless limit: identical objective and identical efficiency,
    // instance by instance.
    for (auto const &[key, row] : lipp) {
        if (key.second != 0.0)
            continue;
        auto const it = cipp3.find(key);
        REQUIRE(it != cipp3.end());
        if (std::isnan(row->objective) || std::isnan(it->second->objective))
            continue;
        CHECK(std::abs(row->objective - it->second->objective) <= 1e-9);
        CHECK(std::abs(row->efficiency - it->second->efficiency) <= 1e-9);
    }

    // The classical baseline pays steeply for mass it ignores.
    CHECK(cipp_energy_l1 > cipp_energy_l0);

    // The baseline's reduction is flat across lambda.
    for (auto const &[key, row] : cipp3) {
        if (key.second != 0.0)
            continue;
        auto const at1 = cipp3.find({key.first, 1.0});
        REQUIRE(at1 != cipp3.end());
        if (!std::isnan(row->reduction) && !std::isnan(at1->second->reduction))
            CHECK(row->reduction == doctest::Approx(at1->second->reduction));
    }
}

TEST_CASE("budget sweep respects its budgets and audits clean")
{
    auto const specs = specsFor(5, 500, 7, 0.35);
    auto const rows = budgetSweep(specs, {1.0, 0.5}, 3, 2.0, 1.0, 1.0);

    long lipp_rows = 0;
    for (auto const &row : rows) {
        if (row.method != "LIPP" || std::isnan(row.energy))
            continue;
        ++lipp_rows;
        CHECK(row.energy <= row.budget + 1e-9);
        CHECK(!std::isnan(row.kappa));
    }
    CHECK(lipp_rows > 0);

    auto const audit = boundAudit(rows);
    CHECK(audit.rows_considered > 0);
    CHECK(audit.violations == 0);
    CHECK(audit.equal_length_violations == 0);
}

TEST_CASE("csv round trip")
{
    auto const specs = specsFor(2, 600, 6, 0.4);
    auto const rows = lambdaSweep(specs, {0.5}, 2.0, 2.0, 1.0, 2);
    std::ostringstream out;
    writeCsv(out, rows);
    std::istringstream in(out.str());
    auto const back = readCsv(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].method == rows[i].method);
        CHECK(back[i].seed == rows[i].seed);
        if (!std::isnan(rows[i].objective))
            CHECK(back[i].objective == doctest::Approx(rows[i].objective));
        CHECK(back[i].bound_premises == rows[i].bound_premises);
        CHECK(back[i].status == rows[i].status);
    }

    std::istringstream bad("not,a,header\n");
    CHECK_THROWS_AS(readCsv(bad), std::invalid_argument);
}

TEST_CASE("runtime profile shape")
{
    auto specs = specsFor(2, 700, 6, 0.3);
    auto more = specsFor(2, 700, 8, 0.3);
    specs.insert(specs.end(), more.begin(), more.end());
    auto const rows = runtimeProfile(specs, 0.05, 3, 2.0, 2.0, 1.0, 1.0);
    CHECK(rows.size() == 2 * specs.size());
    for (auto const &row : rows) {
        CHECK(row.wall_time_ms >= 0.0);
        CHECK((row.method == "LIPP" || row.method == "CIPP_S3"));
    }
}

TEST_CASE("summary groups by method and condition")
{
    auto const specs = specsFor(2, 800, 6, 0.4);
    auto const rows = lambdaSweep(specs, {0.0, 1.0}, 2.0, 2.0, 1.0, 2);
    auto const doc = summarize(rows);
    CHECK(doc.contains("LIPP|lambda=0"));
    CHECK(doc.contains("LIPP|lambda=1"));
    CHECK(doc.contains("CIPP_S2|lambda=1"));
    CHECK(doc.at("LIPP|lambda=0").at("objective").contains("mean"));
}
