#include "lipp/cli.hpp"
#include "lipp/baselines.hpp"
#include "lipp/errors.hpp"
#include "lipp/experiments.hpp"
#include "lipp/miqp.hpp"
#include "lipp/scenario.hpp"
#include "lipp/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace lipp {

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kUsage = 2;
constexpr int kInternal = 3;

void writeFileOrStdout(std::string const &path, std::string const &content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        if (content.empty() || content.back() != '\n')
            std::cout << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (content.empty() || content.back() != '\n')
        out << '\n';
}

json invocation(std::string const &command, json args)
{
    return {{"command", command}, {"args", std::move(args)}};
}

std::vector<ScenarioSpec> makeSpecs(int seeds, std::uint64_t seed_base, int n_min, int n_max,
                                    double density)
{
    std::vector<ScenarioSpec> specs;
    for (int i = 0; i < seeds; ++i) {
        ScenarioSpec spec;
        spec.seed = seed_base + static_cast<std::uint64_t>(i);
        spec.n = n_min + (n_max > n_min ? static_cast<int>(spec.seed % (n_max - n_min + 1)) : 0);
        spec.density = density;
        specs.push_back(spec);
    }
    return specs;
}

struct PlanFlags {
    std::string method = "lipp";
    std::optional<double> budget, lambda, r0, distance_cap;
    std::optional<int> smax;
    double gap = 0.0;
    std::optional<long> node_limit;
    bool require_sample = false;
    bool oracle = false;
    int cipp_samples = 0;  // 0: use smax
    double cipp_distance_budget = 0.0;  // 0: use scenario distance_cap or budget
    std::string greedy_mode = "energy";
    std::string emit_assignment;  // lipp only: write the model assignment here
};

EnergyParams effectiveEnergy(Scenario const &sc, PlanFlags const &f)
{
    EnergyParams p = sc.energy;
    if (f.lambda)
        p.lambda = *f.lambda;
    if (f.r0)
        p.base_mass = *f.r0;
    if (f.smax)
        p.s_max = *f.smax;
    if (f.budget)
        p.budget = *f.budget;
    if (f.distance_cap)
        p.distance_cap = *f.distance_cap;
    p.l_max = std::max({p.l_max, 1.0, p.lambda * p.s_max * sc.world.numVertices()});
    return p;
}

int runPlan(Scenario const &sc, PlanFlags const &flags, std::string const &out_path,
            json args_meta)
{
    auto const params = effectiveEnergy(sc, flags);
    SolveReport report;

    if (flags.method == "lipp") {
        PlanQuery q{sc.world, sc.field, params, flags.gap, flags.node_limit,
                    flags.require_sample};
        report = flags.oracle ? enumerateBruteforce(q) : solveExact(q);
        if (!flags.emit_assignment.empty() && report.plan) {
            auto const model = buildMiqp(q);
            auto const asg = assignmentFromPlan(model, *report.plan, sc.field, sc.world);
            writeFileOrStdout(flags.emit_assignment, asg.toJson(model).dump(2));
        }
    } else if (flags.method == "cipp") {
        CippQuery q;
        q.world = sc.world;
        q.field = sc.field;
        q.samples_per_vertex = flags.cipp_samples > 0 ? flags.cipp_samples : params.s_max;
        q.distance_budget = flags.cipp_distance_budget > 0
                                ? flags.cipp_distance_budget
                                : params.distance_cap.value_or(params.budget);
        EnergyParams reporting = params;
        reporting.s_max = std::max(reporting.s_max, q.samples_per_vertex);
        q.reporting_energy = reporting;
        report = solveCipp(q);
    } else if (flags.method == "greedy") {
        GreedyQuery q{sc.world, sc.field, params,
                      flags.greedy_mode == "distance" ? GreedyMode::DistanceBudget
                                                      : GreedyMode::EnergyBudget};
        report = solveGreedy(q);
    } else {
        throw CLI::ValidationError("--method must be lipp, cipp, or greedy");
    }

    json doc = report.toJson();
    doc["invocation"] = invocation("plan", std::move(args_meta));
    doc["seed"] = sc.seed;
    writeFileOrStdout(out_path, doc.dump(2));
    return report.status == SolveStatus::Infeasible ? kInfeasible : kOk;
}

}  // namespace

int runCli(std::vector<std::string> const &args)
{
    CLI::App app{"Load-aware informative path planning toolkit"};
    app.require_subcommand(1);

    // ---- gen ----
    auto *gen = app.add_subcommand("gen", "Generate a scenario file");
    struct {
        ScenarioSpec spec;
        double budget = 2.0, lambda = 1.0, r0 = 1.0;
        int smax = 3;
        double lmax = 0.0;  // 0: derived
        std::optional<double> distance_cap;
        std::string out;
    } g;
    gen->add_option("--seed", g.spec.seed, "Instance seed")->required();
    gen->add_option("--n", g.spec.n, "Vertex count");
    gen->add_option("--density", g.spec.density, "Directed edge probability");
    gen->add_option("--area", g.spec.area, "Arena side length");
    gen->add_option("--height-amplitude", g.spec.height_amplitude, "Elevation amplitude");
    gen->add_option("--alpha", g.spec.alpha, "Terrain cost slope factor");
    gen->add_option("--signal-variance", g.spec.signal_variance, "Kernel signal variance");
    gen->add_option("--lengthscale", g.spec.lengthscale, "Kernel lengthscale");
    gen->add_option("--noise", g.spec.noise_variance, "Per-sample noise variance");
    gen->add_option("--m", g.spec.test_point_count, "Number of test points");
    gen->add_option("--budget", g.budget, "Energy budget");
    gen->add_option("--lambda", g.lambda, "Unit sample mass");
    gen->add_option("--r0", g.r0, "Robot base mass");
    gen->add_option("--smax", g.smax, "Per-vertex sample cap");
    gen->add_option("--lmax", g.lmax, "Load cap (default: lambda*smax*n)");
    gen->add_option("--distance-cap", g.distance_cap, "Optional path-length cap");
    gen->add_option("--out", g.out, "Output path (default stdout)");

    // ---- plan ----
    auto *plan = app.add_subcommand("plan", "Solve a scenario");
    struct {
        std::string scenario, out;
        PlanFlags flags;
    } p;
    plan->add_option("scenario", p.scenario, "Scenario JSON path")->required();
    plan->add_option("--method", p.flags.method, "lipp | cipp | greedy");
    plan->add_option("--budget", p.flags.budget, "Energy budget override");
    plan->add_option("--lambda", p.flags.lambda, "Unit sample mass override");
    plan->add_option("--r0", p.flags.r0, "Base mass override");
    plan->add_option("--smax", p.flags.smax, "Sample cap override");
    plan->add_option("--gap", p.flags.gap, "Relative optimality gap");
    plan->add_option("--distance-cap", p.flags.distance_cap, "Path-length cap override");
    plan->add_option("--node-limit", p.flags.node_limit, "Search node limit");
    plan->add_flag("--require-sample-on-visit", p.flags.require_sample,
                   "Force at least one sample at every visited vertex");
    plan->add_flag("--oracle", p.flags.oracle, "Use the brute-force oracle (small instances)");
    plan->add_option("--s", p.flags.cipp_samples, "cipp: uniform samples per vertex");
    plan->add_option("--distance-budget", p.flags.cipp_distance_budget, "cipp: distance budget");
    plan->add_option("--mode", p.flags.greedy_mode, "greedy: energy | distance");
    plan->add_option("--emit-assignment", p.flags.emit_assignment,
                     "lipp: also write the model assignment for the solved plan");
    plan->add_option("--out", p.out, "Report path (default stdout)");

    // ---- sweep-lambda ----
    auto *swl = app.add_subcommand("sweep-lambda", "Unit-mass sweep study");
    struct {
        int seeds = 50;
        std::uint64_t seed_base = 1;
        int n_min = 6, n_max = 10;
        double density = 0.30;
        std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
        double budget = 2.0, distance_budget = 2.0, r0 = 1.0;
        int smax = 3;
        std::string out_csv, out_json;
    } sl;
    swl->add_option("--seeds", sl.seeds, "Instances per condition");
    swl->add_option("--seed-base", sl.seed_base, "First seed");
    swl->add_option("--n-min", sl.n_min, "Smallest vertex count");
    swl->add_option("--n-max", sl.n_max, "Largest vertex count");
    swl->add_option("--density", sl.density, "Edge probability");
    swl->add_option("--lambdas", sl.lambdas, "Unit masses to sweep")->delimiter(',');
    swl->add_option("--budget", sl.budget, "Energy budget");
    swl->add_option("--distance-budget", sl.distance_budget, "Baseline distance budget");
    swl->add_option("--r0", sl.r0, "Base mass");
    swl->add_option("--smax", sl.smax, "Sample cap");
    swl->add_option("--out-csv", sl.out_csv, "Metrics CSV path")->required();
    swl->add_option("--out-json", sl.out_json, "Summary JSON path");

    // ---- sweep-budget ----
    auto *swb = app.add_subcommand("sweep-budget", "Budget-regime study");
    struct {
        int seeds = 50;
        std::uint64_t seed_base = 1;
        int n_min = 6, n_max = 10;
        double density = 0.30;
        std::vector<double> kappas{1.0, 0.5, 0.35};
        double distance_budget = 2.0, r0 = 1.0, lambda = 1.0;
        int smax = 3;
        std::string out_csv, out_json;
    } sb;
    swb->add_option("--seeds", sb.seeds, "Instances per condition");
    swb->add_option("--seed-base", sb.seed_base, "First seed");
    swb->add_option("--n-min", sb.n_min, "Smallest vertex count");
    swb->add_option("--n-max", sb.n_max, "Largest vertex count");
    swb->add_option("--density", sb.density, "Edge probability");
    swb->add_option("--kappas", sb.kappas, "Budget fractions")->delimiter(',');
    swb->add_option("--distance-budget", sb.distance_budget, "Baseline distance budget");
    swb->add_option("--r0", sb.r0, "Base mass");
    swb->add_option("--lambda", sb.lambda, "Unit sample mass");
    swb->add_option("--smax", sb.smax, "Sample cap");
    swb->add_option("--out-csv", sb.out_csv, "Metrics CSV path")->required();
    swb->add_option("--out-json", sb.out_json, "Summary JSON path");

    // ---- audit-bound ----
    auto *audit = app.add_subcommand("audit-bound", "Audit the path-length bound on a sweep CSV");
    struct {
        std::string csv, out_json, out_csv;
    } au;
    audit->add_option("--csv", au.csv, "Metrics CSV from a sweep")->required();
    audit->add_option("--out", au.out_json, "Audit report JSON (default stdout)");
    audit->add_option("--out-csv", au.out_csv, "Optional: audited rows CSV");

    // ---- profile ----
    auto *prof = app.add_subcommand("profile", "Runtime profile over graph sizes");
    struct {
        std::vector<int> n_list{6, 8, 10};
        int seeds = 5;
        std::uint64_t seed_base = 1;
        double density = 0.15, gap = 0.05;
        double budget = 2.0, distance_budget = 2.0, r0 = 1.0, lambda = 1.0;
        int smax = 3;
        std::string out_csv, out_json;
    } pf;
    prof->add_option("--n-list", pf.n_list, "Graph sizes, ascending")->delimiter(',');
    prof->add_option("--seeds", pf.seeds, "Seeds per size");
    prof->add_option("--seed-base", pf.seed_base, "First seed");
    prof->add_option("--density", pf.density, "Edge probability");
    prof->add_option("--gap", pf.gap, "Relative optimality gap for the exact solver");
    prof->add_option("--budget", pf.budget, "Energy budget");
    prof->add_option("--distance-budget", pf.distance_budget, "Baseline distance budget");
    prof->add_option("--r0", pf.r0, "Base mass");
    prof->add_option("--lambda", pf.lambda, "Unit sample mass");
    prof->add_option("--smax", pf.smax, "Sample cap");
    prof->add_option("--out-csv", pf.out_csv, "Metrics CSV path")->required();
    prof->add_option("--out-json", pf.out_json, "Summary JSON path");

    // ---- export-miqp ----
    auto *exp = app.add_subcommand("export-miqp", "Build and export the integer model");
    struct {
        std::string scenario, out;
        PlanFlags flags;
        std::optional<double> amax;
    } ex;
    exp->add_option("scenario", ex.scenario, "Scenario JSON path")->required();
    exp->add_option("--budget", ex.flags.budget, "Energy budget override");
    exp->add_option("--lambda", ex.flags.lambda, "Unit sample mass override");
    exp->add_option("--r0", ex.flags.r0, "Base mass override");
    exp->add_option("--smax", ex.flags.smax, "Sample cap override");
    exp->add_option("--distance-cap", ex.flags.distance_cap, "Path-length cap override");
    exp->add_option("--amax", ex.amax, "Estimator coefficient bound override");
    exp->add_option("--out", ex.out, "Model file path")->required();

    // ---- validate ----
    auto *val = app.add_subcommand("validate", "Check an assignment against an exported model");
    struct {
        std::string model, assignment, out;
        double tol = 1e-6;
    } va;
    val->add_option("--model", va.model, "Exported model file")->required();
    val->add_option("--assignment", va.assignment, "Assignment JSON {name: value}")->required();
    val->add_option("--tol", va.tol, "Feasibility tolerance");
    val->add_option("--out", va.out, "Report path (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (CLI::ParseError const &e) {
        int const code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (gen->parsed()) {
            auto sc = generateScenario(g.spec);
            sc.energy.lambda = g.lambda;
            sc.energy.base_mass = g.r0;
            sc.energy.s_max = g.smax;
            sc.energy.budget = g.budget;
            sc.energy.l_max
                = g.lmax > 0 ? g.lmax : std::max(1.0, g.lambda * g.smax * g.spec.n);
            sc.energy.distance_cap = g.distance_cap;
            sc.energy.validate();
            writeFileOrStdout(g.out, sc.toJson().dump(2));
            return kOk;
        }

        if (plan->parsed()) {
            auto const sc = Scenario::load(p.scenario);
            json meta{{"scenario", p.scenario}, {"method", p.flags.method},
                      {"gap", p.flags.gap}};
            if (p.flags.budget)
                meta["budget"] = *p.flags.budget;
            if (p.flags.lambda)
                meta["lambda"] = *p.flags.lambda;
            if (p.flags.r0)
                meta["r0"] = *p.flags.r0;
            if (p.flags.smax)
                meta["smax"] = *p.flags.smax;
            if (p.flags.distance_cap)
                meta["distance_cap"] = *p.flags.distance_cap;
            return runPlan(sc, p.flags, p.out, std::move(meta));
        }

        if (swl->parsed()) {
            auto const specs = makeSpecs(sl.seeds, sl.seed_base, sl.n_min, sl.n_max, sl.density);
            auto const rows
                = lambdaSweep(specs, sl.lambdas, sl.budget, sl.distance_budget, sl.r0, sl.smax);
            std::ostringstream csv;
            writeCsv(csv, rows);
            writeFileOrStdout(sl.out_csv, csv.str());
            json doc{{"invocation", invocation("sweep-lambda",
                                               {{"seeds", sl.seeds},
                                                {"seed_base", sl.seed_base},
                                                {"n_min", sl.n_min},
                                                {"n_max", sl.n_max},
                                                {"density", sl.density},
                                                {"budget", sl.budget},
                                                {"distance_budget", sl.distance_budget},
                                                {"r0", sl.r0},
                                                {"smax", sl.smax},
                                                {"lambdas", sl.lambdas}})},
                     {"summary", summarize(rows)},
                     {"bound_audit", boundAudit(rows).toJson()}};
            writeFileOrStdout(sl.out_json, doc.dump(2));
            return kOk;
        }

        if (swb->parsed()) {
            auto const specs = makeSpecs(sb.seeds, sb.seed_base, sb.n_min, sb.n_max, sb.density);
            auto const rows
                = budgetSweep(specs, sb.kappas, sb.smax, sb.distance_budget, sb.r0, sb.lambda);
            std::ostringstream csv;
            writeCsv(csv, rows);
            writeFileOrStdout(sb.out_csv, csv.str());
            json doc{{"invocation", invocation("sweep-budget",
                                               {{"seeds", sb.seeds},
                                                {"seed_base", sb.seed_base},
                                                {"n_min", sb.n_min},
                                                {"n_max", sb.n_max},
                                                {"density", sb.density},
                                                {"distance_budget", sb.distance_budget},
                                                {"r0", sb.r0},
                                                {"lambda", sb.lambda},
                                                {"smax", sb.smax},
                                                {"kappas", sb.kappas}})},
                     {"summary", summarize(rows)},
                     {"bound_audit", boundAudit(rows).toJson()}};
            writeFileOrStdout(sb.out_json, doc.dump(2));
            return kOk;
        }

        if (audit->parsed()) {
            std::ifstream in(au.csv);
            if (!in)
                throw std::invalid_argument("cannot open " + au.csv);
            auto const rows = readCsv(in);
            auto const report = boundAudit(rows);
            if (!au.out_csv.empty()) {
                std::vector<MetricsRow> audited;
                for (auto const &r : rows)
                    if (r.bound_premises >= 0)
                        audited.push_back(r);
                std::ostringstream csv;
                writeCsv(csv, audited);
                writeFileOrStdout(au.out_csv, csv.str());
            }
            json doc{{"invocation", invocation("audit-bound", {{"csv", au.csv}})},
                     {"audit", report.toJson()}};
            writeFileOrStdout(au.out_json, doc.dump(2));
            return report.violations == 0 ? kOk : kInfeasible;
        }

        if (prof->parsed()) {
            std::vector<ScenarioSpec> specs;
            for (int n : pf.n_list)
                for (int i = 0; i < pf.seeds; ++i) {
                    ScenarioSpec spec;
                    spec.n = n;
                    spec.density = pf.density;
                    spec.seed = pf.seed_base + static_cast<std::uint64_t>(i);
                    specs.push_back(spec);
                }
            auto const rows = runtimeProfile(specs, pf.gap, pf.smax, pf.budget,
                                             pf.distance_budget, pf.r0, pf.lambda);
            std::ostringstream csv;
            writeCsv(csv, rows);
            writeFileOrStdout(pf.out_csv, csv.str());
            json doc{{"invocation", invocation("profile",
                                               {{"n_list", pf.n_list},
                                                {"seeds", pf.seeds},
                                                {"seed_base", pf.seed_base},
                                                {"density", pf.density},
                                                {"gap", pf.gap}})},
                     {"summary", summarize(rows)}};
            writeFileOrStdout(pf.out_json, doc.dump(2));
            return kOk;
        }

        if (exp->parsed()) {
            auto const sc = Scenario::load(ex.scenario);
            auto const params = effectiveEnergy(sc, ex.flags);
            PlanQuery q{sc.world, sc.field, params, 0.0, std::nullopt, true};
            auto const model = buildMiqp(q, ex.amax);
            exportModel(model, std::filesystem::path(ex.out));
            std::cout << "wrote " << ex.out << ": " << model.vars.size() << " variables, "
                      << model.rows.size() << " rows\n";
            return kOk;
        }

        if (val->parsed()) {
            auto const model = parseLpModel(std::filesystem::path(va.model));
            std::ifstream in(va.assignment);
            if (!in)
                throw std::invalid_argument("cannot open " + va.assignment);
            json doc;
            in >> doc;
            auto const asg = Assignment::fromJson(model, doc);
            auto const report = validateAssignment(model, asg, va.tol);
            json out = report.toJson();
            out["invocation"] = invocation(
                "validate", {{"model", va.model}, {"assignment", va.assignment}, {"tol", va.tol}});
            writeFileOrStdout(va.out, out.dump(2));
            return report.all_pass ? kOk : kInfeasible;
        }
    } catch (std::invalid_argument const &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (nlohmann::json::exception const &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (std::exception const &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

}  // namespace lipp
