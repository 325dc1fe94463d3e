#include "lipp/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path dir;
    TempDir()
    {
        dir = fs::temp_directory_path() / "lipp_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(std::string const &name) const { return (dir / name).string(); }
};

std::string slurp(std::string const &path)
{
    std::ifstream in(path);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json slurpJson(std::string const &path)
{
    return json::parse(slurp(path));
}

int run(std::vector<std::string> args)
{
    return lipp::runCli(args);
}

}  // namespace

TEST_CASE("gen is reproducible byte for byte")
{
    TempDir tmp;
    auto const a = tmp / "a.json", b = tmp / "b.json";
    REQUIRE(run({"gen", "--seed", "7", "--n", "7", "--out", a}) == 0);
    REQUIRE(run({"gen", "--seed", "7", "--n", "7", "--out", b}) == 0);
    CHECK(slurp(a) == slurp(b));

    auto const doc = slurpJson(a);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("seed") == 7);
    CHECK(doc.at("vertices").size() == 7);
}

TEST_CASE("weightless plan matches the classical baseline")
{
    TempDir tmp;
    auto const sc = tmp / "scenario.json";
    REQUIRE(run({"gen", "--seed", "11", "--n", "7", "--out", sc}) == 0);

    auto const lipp_out = tmp / "lipp.json", cipp_out = tmp / "cipp.json";
    REQUIRE(run({"plan", sc, "--method", "lipp", "--lambda", "0", "--r0", "1", "--budget", "2",
                 "--smax", "3", "--out", lipp_out})
            == 0);
    REQUIRE(run({"plan", sc, "--method", "cipp", "--s", "3", "--distance-budget", "2", "--out",
                 cipp_out})
            == 0);

    auto const lipp = slurpJson(lipp_out), cipp = slurpJson(cipp_out);
    REQUIRE(!lipp.at("plan").is_null());
    REQUIRE(!cipp.at("plan").is_null());
    double const a = lipp.at("plan").at("objective").get<double>();
    double const b = cipp.at("plan").at("objective").get<double>();
    CHECK(std::abs(a - b) <= 1e-9);
    CHECK(lipp.at("invocation").at("command") == "plan");
}

TEST_CASE("export, solve, and validate round trip")
{
    TempDir tmp;
    auto const sc = tmp / "scenario.json";
    REQUIRE(run({"gen", "--seed", "13", "--n", "6", "--out", sc}) == 0);

    auto const model = tmp / "model.lp";
    REQUIRE(run({"export-miqp", sc, "--budget", "2.5", "--lambda", "0.5", "--smax", "2",
                 "--out", model})
            == 0);

    auto const asg = tmp / "assignment.json", rep = tmp / "plan.json";
    REQUIRE(run({"plan", sc, "--method", "lipp", "--budget", "2.5", "--lambda", "0.5", "--smax",
                 "2", "--require-sample-on-visit", "--emit-assignment", asg, "--out", rep})
            == 0);

    auto const report = tmp / "validation.json";
    CHECK(run({"validate", "--model", model, "--assignment", asg, "--out", report}) == 0);
    auto const doc = slurpJson(report);
    CHECK(doc.at("all_pass") == true);
    CHECK(doc.at("failed_rows") == 0);

    // Perturbing one transport value must be caught and flips the exit code.
    auto broken = slurpJson(asg);
    for (auto &[key, value] : broken.items())
        if (key.rfind("T_", 0) == 0 && value.get<double>() > 0.5) {
            value = value.get<double>() + 0.1;
            break;
        }
    auto const broken_path = tmp / "broken.json";
    std::ofstream(broken_path) << broken.dump();
    CHECK(run({"validate", "--model", model, "--assignment", broken_path, "--out",
               tmp / "broken_report.json"})
          == 1);
}

TEST_CASE("exit codes")
{
    TempDir tmp;
    CHECK(run({"no-such-command"}) == 2);
    CHECK(run({"plan", tmp / "missing.json", "--method", "lipp", "--out", tmp / "x.json"}) == 2);

    auto const sc = tmp / "scenario.json";
    REQUIRE(run({"gen", "--seed", "17", "--n", "6", "--out", sc}) == 0);
    // A budget below the cheapest traversal is infeasible.
    CHECK(run({"plan", sc, "--method", "lipp", "--budget", "0.001", "--out", tmp / "inf.json"})
          == 1);

    // Malformed scenario file.
    std::ofstream(tmp / "bad.json") << "{\"schema_version\": 999}";
    CHECK(run({"plan", tmp / "bad.json", "--method", "lipp", "--out", tmp / "y.json"}) == 2);
}

TEST_CASE("sweep and audit command flow")
{
    TempDir tmp;
    auto const csv = tmp / "rows.csv", summary = tmp / "summary.json";
    REQUIRE(run({"sweep-lambda", "--seeds", "3", "--seed-base", "900", "--n-min", "6", "--n-max",
                 "7", "--density", "0.35", "--lambdas", "0,1", "--out-csv", csv, "--out-json",
                 summary})
            == 0);
    auto const doc = slurpJson(summary);
    CHECK(doc.at("summary").contains("LIPP|lambda=0"));
    CHECK(doc.at("bound_audit").at("violations") == 0);

    auto const audit = tmp / "audit.json";
    CHECK(run({"audit-bound", "--csv", csv, "--out", audit}) == 0);
    CHECK(slurpJson(audit).at("audit").at("violations") == 0);
}
