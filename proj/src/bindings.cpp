#include "lipp/baselines.hpp"
#include "lipp/cli.hpp"
#include "lipp/experiments.hpp"
#include "lipp/miqp.hpp"
#include "lipp/scenario.hpp"
#include "lipp/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace lipp;

namespace {

SampleAllocation allocationFrom(std::map<int, int> const &counts)
{
    SampleAllocation alloc;
    for (auto const &[v, l] : counts)
        if (l > 0)
            alloc.counts[v] = l;
    return alloc;
}

EnergyParams overrideEnergy(Scenario const &sc, std::optional<double> budget,
                            std::optional<double> unit_mass, std::optional<double> base_mass,
                            std::optional<int> s_max, std::optional<double> distance_cap)
{
    EnergyParams p = sc.energy;
    if (budget)
        p.budget = *budget;
    if (unit_mass)
        p.lambda = *unit_mass;
    if (base_mass)
        p.base_mass = *base_mass;
    if (s_max)
        p.s_max = *s_max;
    if (distance_cap)
        p.distance_cap = *distance_cap;
    p.l_max = std::max({p.l_max, 1.0, p.lambda * p.s_max * sc.world.numVertices()});
    return p;
}

Plan planFromSteps(Scenario const &sc, std::vector<std::pair<int, int>> const &steps,
                   EnergyParams const &params)
{
    Plan plan;
    SampleAllocation alloc;
    for (auto const &[v, l] : steps) {
        plan.steps.push_back({v, l});
        if (l > 0)
            alloc.counts[v] = l;
    }
    plan.energy = pathEnergy(plan.steps, sc.world, params);
    plan.distance = pathDistance(plan.steps, sc.world);
    plan.objective = posteriorVariance(sc.field, sc.world.positions(), alloc);
    return plan;
}

}  // namespace

PYBIND11_MODULE(_lipp, m)
{
    m.doc() = "Load-aware informative path planning core";

    py::class_<Kernel>(m, "Kernel")
        .def_readonly("signal_variance", &Kernel::signal_variance)
        .def_readonly("lengthscale", &Kernel::lengthscale)
        .def("__call__", [](Kernel const &k, std::pair<double, double> a,
                            std::pair<double, double> b) {
            return k({a.first, a.second}, {b.first, b.second});
        });

    py::class_<EnergyParams>(m, "EnergyParams")
        .def_readwrite("unit_mass", &EnergyParams::lambda)
        .def_readwrite("base_mass", &EnergyParams::base_mass)
        .def_readwrite("s_max", &EnergyParams::s_max)
        .def_readwrite("l_max", &EnergyParams::l_max)
        .def_readwrite("budget", &EnergyParams::budget)
        .def_readwrite("distance_cap", &EnergyParams::distance_cap);

    py::class_<Plan>(m, "Plan")
        .def_property_readonly("steps",
                               [](Plan const &p) {
                                   std::vector<std::pair<int, int>> out;
                                   for (auto const &s : p.steps)
                                       out.emplace_back(s.vertex, s.samples);
                                   return out;
                               })
        .def_readonly("objective", &Plan::objective)
        .def_readonly("energy", &Plan::energy)
        .def_readonly("distance", &Plan::distance)
        .def_property_readonly("num_vertices", &Plan::numVertices)
        .def_property_readonly("total_samples", &Plan::totalSamples);

    py::class_<SolveReport>(m, "SolveReport")
        .def_property_readonly("status",
                               [](SolveReport const &r) { return statusName(r.status); })
        .def_readonly("plan", &SolveReport::plan)
        .def_readonly("lower_bound", &SolveReport::lower_bound)
        .def_readonly("nodes_explored", &SolveReport::nodes_explored)
        .def_readonly("wall_time_s", &SolveReport::wall_time_s)
        .def("to_json", [](SolveReport const &r) { return r.toJson().dump(2); });

    py::class_<Scenario>(m, "Scenario")
        .def_static("load", [](std::string const &path) { return Scenario::load(path); })
        .def("save", [](Scenario const &sc, std::string const &path) { sc.save(path); })
        .def("to_json", [](Scenario const &sc) { return sc.toJson().dump(2); })
        .def_static("from_json",
                    [](std::string const &text) {
                        return Scenario::fromJson(nlohmann::json::parse(text));
                    })
        .def_readonly("seed", &Scenario::seed)
        .def_readonly("alpha", &Scenario::alpha)
        .def_readwrite("energy", &Scenario::energy)
        .def_property_readonly("num_vertices",
                               [](Scenario const &sc) { return sc.world.numVertices(); })
        .def_property_readonly("start", [](Scenario const &sc) { return sc.world.start; })
        .def_property_readonly("target", [](Scenario const &sc) { return sc.world.target; })
        .def_property_readonly("positions",
                               [](Scenario const &sc) {
                                   std::vector<std::pair<double, double>> out;
                                   for (auto const &p : sc.world.positions())
                                       out.emplace_back(p.x, p.y);
                                   return out;
                               })
        .def_property_readonly("test_points",
                               [](Scenario const &sc) {
                                   std::vector<std::pair<double, double>> out;
                                   for (auto const &p : sc.field.test_points)
                                       out.emplace_back(p.x, p.y);
                                   return out;
                               })
        .def_property_readonly("kernel", [](Scenario const &sc) { return sc.field.kernel; });

    m.def(
        "generate_scenario",
        [](std::uint64_t seed, int n, double density, double area, double height_amplitude,
           double alpha, double signal_variance, double lengthscale, double noise_variance,
           int test_points) {
            ScenarioSpec spec;
            spec.seed = seed;
            spec.n = n;
            spec.density = density;
            spec.area = area;
            spec.height_amplitude = height_amplitude;
            spec.alpha = alpha;
            spec.signal_variance = signal_variance;
            spec.lengthscale = lengthscale;
            spec.noise_variance = noise_variance;
            spec.test_point_count = test_points;
            return generateScenario(spec);
        },
        py::arg("seed"), py::arg("n") = 8, py::arg("density") = 0.30, py::arg("area") = 0.75,
        py::arg("height_amplitude") = 0.2, py::arg("alpha") = 0.5,
        py::arg("signal_variance") = 1.0, py::arg("lengthscale") = 0.35,
        py::arg("noise_variance") = 0.5, py::arg("test_points") = 4);

    m.def("prior_variance", [](Scenario const &sc) { return sc.field.priorVariance(); });

    m.def(
        "posterior_variance",
        [](Scenario const &sc, std::map<int, int> const &counts) {
            return posteriorVariance(sc.field, sc.world.positions(), allocationFrom(counts));
        },
        py::arg("scenario"), py::arg("allocation"));

    m.def(
        "optimal_llse",
        [](Scenario const &sc, std::map<int, int> const &counts) {
            auto const [est, value]
                = optimalLlse(sc.field, sc.world.positions(), allocationFrom(counts));
            return py::make_tuple(est.coefficients, value);
        },
        py::arg("scenario"), py::arg("allocation"),
        "Optimal estimator coefficients and their objective value");

    m.def(
        "path_energy",
        [](Scenario const &sc, std::vector<std::pair<int, int>> const &steps,
           std::optional<double> unit_mass, std::optional<double> base_mass) {
            auto params = overrideEnergy(sc, {}, unit_mass, base_mass, {}, {});
            std::vector<PlanStep> plan;
            for (auto const &[v, l] : steps)
                plan.push_back({v, l});
            return pathEnergy(plan, sc.world, params);
        },
        py::arg("scenario"), py::arg("steps"), py::arg("unit_mass") = py::none(),
        py::arg("base_mass") = py::none());

    m.def(
        "solve_lipp",
        [](Scenario const &sc, std::optional<double> budget, std::optional<double> unit_mass,
           std::optional<double> base_mass, std::optional<int> s_max,
           std::optional<double> distance_cap, double gap, std::optional<long> node_limit,
           bool require_sample_on_visit, bool oracle) {
            PlanQuery q{sc.world, sc.field,
                        overrideEnergy(sc, budget, unit_mass, base_mass, s_max, distance_cap),
                        gap, node_limit, require_sample_on_visit};
            return oracle ? enumerateBruteforce(q) : solveExact(q);
        },
        py::arg("scenario"), py::arg("budget") = py::none(), py::arg("unit_mass") = py::none(),
        py::arg("base_mass") = py::none(), py::arg("s_max") = py::none(),
        py::arg("distance_cap") = py::none(), py::arg("gap") = 0.0,
        py::arg("node_limit") = py::none(), py::arg("require_sample_on_visit") = false,
        py::arg("oracle") = false);

    m.def(
        "solve_cipp",
        [](Scenario const &sc, double distance_budget, int samples_per_vertex,
           std::optional<double> unit_mass, std::optional<double> base_mass) {
            CippQuery q;
            q.world = sc.world;
            q.field = sc.field;
            q.distance_budget = distance_budget;
            q.samples_per_vertex = samples_per_vertex;
            auto reporting = overrideEnergy(sc, {}, unit_mass, base_mass,
                                            std::max(samples_per_vertex, sc.energy.s_max), {});
            q.reporting_energy = reporting;
            return solveCipp(q);
        },
        py::arg("scenario"), py::arg("distance_budget"), py::arg("samples_per_vertex"),
        py::arg("unit_mass") = py::none(), py::arg("base_mass") = py::none());

    m.def(
        "solve_greedy",
        [](Scenario const &sc, std::string const &mode, std::optional<double> budget,
           std::optional<double> unit_mass, std::optional<double> base_mass,
           std::optional<int> s_max, std::optional<double> distance_cap) {
            GreedyQuery q{sc.world, sc.field,
                          overrideEnergy(sc, budget, unit_mass, base_mass, s_max, distance_cap),
                          mode == "distance" ? GreedyMode::DistanceBudget
                                             : GreedyMode::EnergyBudget};
            return solveGreedy(q);
        },
        py::arg("scenario"), py::arg("mode") = "energy", py::arg("budget") = py::none(),
        py::arg("unit_mass") = py::none(), py::arg("base_mass") = py::none(),
        py::arg("s_max") = py::none(), py::arg("distance_cap") = py::none());

    m.def(
        "distance_bound",
        [](Plan const &plan_e, Plan const &plan_d, Scenario const &sc,
           std::optional<double> unit_mass, std::optional<int> s_max) {
            auto const params = overrideEnergy(sc, {}, unit_mass, {}, s_max, {});
            auto const res = distanceBound(plan_e, plan_d, params);
            return py::make_tuple(res.ratio, res.bound, res.premises_hold, res.violated);
        },
        py::arg("plan_e"), py::arg("plan_d"), py::arg("scenario"),
        py::arg("unit_mass") = py::none(), py::arg("s_max") = py::none(),
        "Returns (ratio, bound, premises_hold, violated)");

    m.def(
        "export_miqp",
        [](Scenario const &sc, std::string const &path, std::optional<double> budget,
           std::optional<double> unit_mass, std::optional<double> base_mass,
           std::optional<int> s_max, std::optional<double> distance_cap,
           std::optional<double> a_max) {
            PlanQuery q{sc.world, sc.field,
                        overrideEnergy(sc, budget, unit_mass, base_mass, s_max, distance_cap),
                        0.0, std::nullopt, true};
            auto const model = buildMiqp(q, a_max);
            exportModel(model, std::filesystem::path(path));
            return py::make_tuple(model.vars.size(), model.rows.size());
        },
        py::arg("scenario"), py::arg("path"), py::arg("budget") = py::none(),
        py::arg("unit_mass") = py::none(), py::arg("base_mass") = py::none(),
        py::arg("s_max") = py::none(), py::arg("distance_cap") = py::none(),
        py::arg("a_max") = py::none(), "Returns (num_variables, num_rows)");

    m.def(
        "assignment_json",
        [](Scenario const &sc, std::vector<std::pair<int, int>> const &steps,
           std::optional<double> budget, std::optional<double> unit_mass,
           std::optional<double> base_mass, std::optional<int> s_max,
           std::optional<double> distance_cap, std::optional<double> a_max) {
            auto const params
                = overrideEnergy(sc, budget, unit_mass, base_mass, s_max, distance_cap);
            PlanQuery q{sc.world, sc.field, params, 0.0, std::nullopt, true};
            auto const model = buildMiqp(q, a_max);
            auto const plan = planFromSteps(sc, steps, params);
            return assignmentFromPlan(model, plan, sc.field, sc.world).toJson(model).dump(2);
        },
        py::arg("scenario"), py::arg("steps"), py::arg("budget") = py::none(),
        py::arg("unit_mass") = py::none(), py::arg("base_mass") = py::none(),
        py::arg("s_max") = py::none(), py::arg("distance_cap") = py::none(),
        py::arg("a_max") = py::none(),
        "Encode a plan as a model assignment, keyed by variable name");

    m.def(
        "validate_file",
        [](std::string const &model_path, std::string const &assignment_path, double tol) {
            auto const model = parseLpModel(std::filesystem::path(model_path));
            std::ifstream in(assignment_path);
            if (!in)
                throw std::invalid_argument("cannot open " + assignment_path);
            nlohmann::json doc;
            in >> doc;
            auto const report = validateAssignment(model, Assignment::fromJson(model, doc), tol);
            return report.toJson().dump(2);
        },
        py::arg("model_path"), py::arg("assignment_path"), py::arg("tol") = 1e-6,
        "Validate an assignment JSON against an exported model; returns the report JSON");

    m.def("run_cli", [](std::vector<std::string> const &args) { return runCli(args); });
}
