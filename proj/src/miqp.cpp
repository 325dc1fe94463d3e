#include "lipp/miqp.hpp"
#include "lipp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lipp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string name2(char const *stem, int a, int b)
{
    std::ostringstream s;
    s << stem << '_' << a << '_' << b;
    return s.str();
}

std::string name3(char const *stem, int a, int b, int c)
{
    std::ostringstream s;
    s << stem << '_' << a << '_' << b << '_' << c;
    return s.str();
}

}  // namespace

int MiqpModel::addVar(std::string name, VarKind kind, double lb, double ub)
{
    int const idx = static_cast<int>(vars.size());
    if (!index_.emplace(name, idx).second)
        throw std::invalid_argument("duplicate variable name " + name);
    vars.push_back({std::move(name), kind, lb, ub});
    return idx;
}

int MiqpModel::var(std::string const &name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        throw std::invalid_argument("unknown variable " + name);
    return it->second;
}

bool MiqpModel::hasVar(std::string const &name) const
{
    return index_.find(name) != index_.end();
}

std::size_t MiqpModel::numBinaries() const
{
    return std::count_if(vars.begin(), vars.end(),
                         [](VarInfo const &v) { return v.kind == VarKind::Binary; });
}

std::size_t MiqpModel::numIntegers() const
{
    return std::count_if(vars.begin(), vars.end(),
                         [](VarInfo const &v) { return v.kind == VarKind::Integer; });
}

Assignment Assignment::fromJson(MiqpModel const &model, nlohmann::json const &doc)
{
    Assignment asg;
    asg.values.assign(model.vars.size(), 0.0);
    std::vector<bool> seen(model.vars.size(), false);
    for (auto const &[key, value] : doc.items()) {
        int const idx = model.var(key);
        asg.values[idx] = value.get<double>();
        seen[idx] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw std::invalid_argument("assignment is missing variable " + model.vars[i].name);
    return asg;
}

nlohmann::json Assignment::toJson(MiqpModel const &model) const
{
    nlohmann::json doc;
    for (std::size_t i = 0; i < model.vars.size(); ++i)
        doc[model.vars[i].name] = values[i];
    return doc;
}

std::pair<double, double> mccormickInterval(double chi, double r_u, double r_max)
{
    double const lo = std::max(0.0, r_u - r_max * (1.0 - chi));
    double const hi = std::min(r_u, r_max * chi);
    return {lo, hi};
}

MiqpModel buildMiqp(PlanQuery const &query, std::optional<double> a_max_override)
{
    query.validate();
    auto const &world = query.world;
    auto const &field = query.field;
    auto const &params = query.energy;

    int const n = world.numVertices();
    int const m = static_cast<int>(field.test_points.size());
    int const smax = params.s_max;
    int const s = world.start;
    int const t = world.target;

    auto edges = world.edges;
    std::sort(edges.begin(), edges.end(), [](Edge const &a, Edge const &b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (std::size_t e = 1; e < edges.size(); ++e)
        if (edges[e].u == edges[e - 1].u && edges[e].v == edges[e - 1].v)
            throw std::invalid_argument("parallel edges are not representable in the model");

    auto const positions = world.positions();

    MiqpModel model;
    model.n = n;
    model.m = m;
    model.s_max = smax;
    model.start = s;
    model.target = t;
    model.lambda = params.lambda;
    model.base_mass = params.base_mass;
    model.l_max = params.l_max;
    model.r_max = params.maxMass();
    model.budget = params.budget;
    model.distance_cap = params.distance_cap;
    model.big_m_order = static_cast<double>(n);
    model.big_m_load = params.l_max + params.lambda * smax;
    model.noise_variance = field.noise_variance;
    model.a_max = a_max_override ? *a_max_override
                                 : defaultEstimatorBound(field, positions, smax);
    double const amax = model.a_max;
    double const rmax = model.r_max;

    // Variables, in a fixed order.
    for (auto const &e : edges)
        model.addVar(name2("chi", e.u, e.v), VarKind::Binary, 0, 1);
    for (int v = 0; v < n; ++v)
        model.addVar("y_" + std::to_string(v), VarKind::Binary, 0, 1);
    for (int v = 0; v < n; ++v)
        for (int c = 1; c <= smax; ++c)
            model.addVar(name2("z", v, c), VarKind::Binary, 0, 1);
    for (int v = 0; v < n; ++v)
        model.addVar("o_" + std::to_string(v), VarKind::Integer, 0, n - 1);
    for (int v = 0; v < n; ++v)
        model.addVar("l_" + std::to_string(v), VarKind::Integer, 0, smax);
    for (int v = 0; v < n; ++v)
        model.addVar("L_" + std::to_string(v), VarKind::Continuous, 0, params.l_max);
    for (int v = 0; v < n; ++v)
        model.addVar("R_" + std::to_string(v), VarKind::Continuous, params.base_mass, rmax);
    for (int ti = 0; ti < m; ++ti)
        for (int v = 0; v < n; ++v)
            model.addVar(name2("Atv", ti, v), VarKind::Continuous, -amax, amax);
    for (int ti = 0; ti < m; ++ti)
        for (int v = 0; v < n; ++v)
            for (int c = 1; c <= smax; ++c)
                model.addVar(name3("Atvc", ti, v, c), VarKind::Continuous, -amax, amax);
    for (auto const &e : edges)
        model.addVar(name2("T", e.u, e.v), VarKind::Continuous, 0, rmax);

    auto chi = [&](int u, int v) { return model.var(name2("chi", u, v)); };
    auto yv = [&](int v) { return model.var("y_" + std::to_string(v)); };
    auto zv = [&](int v, int c) { return model.var(name2("z", v, c)); };
    auto ov = [&](int v) { return model.var("o_" + std::to_string(v)); };
    auto lv = [&](int v) { return model.var("l_" + std::to_string(v)); };
    auto Lv = [&](int v) { return model.var("L_" + std::to_string(v)); };
    auto Rv = [&](int v) { return model.var("R_" + std::to_string(v)); };
    auto Atv = [&](int ti, int v) { return model.var(name2("Atv", ti, v)); };
    auto Atvc = [&](int ti, int v, int c) { return model.var(name3("Atvc", ti, v, c)); };
    auto Tuv = [&](int u, int v) { return model.var(name2("T", u, v)); };

    auto addRow = [&](std::string tag, std::vector<std::pair<int, double>> terms, RowSense sense,
                      double rhs) {
        model.rows.push_back({std::move(tag), std::move(terms), sense, rhs});
    };

    std::vector<std::vector<int>> in_edges(n), out_edges(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        out_edges[edges[e].u].push_back(static_cast<int>(e));
        in_edges[edges[e].v].push_back(static_cast<int>(e));
    }
    auto edgeTerms = [&](std::vector<int> const &idx, double coef) {
        std::vector<std::pair<int, double>> terms;
        for (int e : idx)
            terms.emplace_back(chi(edges[e].u, edges[e].v), coef);
        return terms;
    };

    // Flow conservation and the unit-degree cap at interior vertices.
    for (int v = 0; v < n; ++v) {
        if (v == s || v == t)
            continue;
        auto terms = edgeTerms(in_edges[v], 1.0);
        for (int e : out_edges[v])
            terms.emplace_back(chi(edges[e].u, edges[e].v), -1.0);
        addRow("flow_balance_" + std::to_string(v), std::move(terms), RowSense::EQ, 0);
        addRow("flow_cap_" + std::to_string(v), edgeTerms(in_edges[v], 1.0), RowSense::LE, 1);
    }

    // Exactly one departure from the start, one arrival at the target,
    // and nothing in the reverse directions.
    addRow("start_out", edgeTerms(out_edges[s], 1.0), RowSense::EQ, 1);
    addRow("target_in", edgeTerms(in_edges[t], 1.0), RowSense::EQ, 1);
    addRow("start_in", edgeTerms(in_edges[s], 1.0), RowSense::EQ, 0);
    addRow("target_out", edgeTerms(out_edges[t], 1.0), RowSense::EQ, 0);

    // Visit indicators follow incoming flow; the endpoints are always visited.
    for (int v = 0; v < n; ++v) {
        if (v == s || v == t)
            continue;
        auto terms = edgeTerms(in_edges[v], -1.0);
        terms.emplace_back(yv(v), 1.0);
        addRow("visit_link_" + std::to_string(v), std::move(terms), RowSense::EQ, 0);
    }
    addRow("visit_start", {{yv(s), 1.0}}, RowSense::EQ, 1);
    addRow("visit_target", {{yv(t), 1.0}}, RowSense::EQ, 1);

    // Estimator coefficients are active only at visited vertices. At the
    // endpoints y is pinned to 1, so the plain variable bounds suffice.
    for (int ti = 0; ti < m; ++ti)
        for (int v = 0; v < n; ++v) {
            if (v == s || v == t)
                continue;
            addRow(name2("estimator_visit_ub", ti, v), {{Atv(ti, v), 1.0}, {yv(v), -amax}},
                   RowSense::LE, 0);
            addRow(name2("estimator_visit_lb", ti, v), {{Atv(ti, v), -1.0}, {yv(v), -amax}},
                   RowSense::LE, 0);
        }

    // MTZ ordering: a single directed path, no subtours.
    addRow("order_start", {{ov(s), 1.0}}, RowSense::EQ, 0);
    for (auto const &e : edges)
        addRow(name2("mtz", e.u, e.v),
               {{ov(e.u), 1.0}, {ov(e.v), -1.0}, {chi(e.u, e.v), model.big_m_order}},
               RowSense::LE, model.big_m_order - 1);

    // Load accounting: the start carries its own samples; along an active
    // edge the destination's load covers the source's plus what is collected
    // at the destination.
    {
        std::vector<std::pair<int, double>> terms{{Lv(s), 1.0}};
        for (int c = 1; c <= smax; ++c)
            terms.emplace_back(zv(s, c), -params.lambda * c);
        addRow("load_start", std::move(terms), RowSense::EQ, 0);
    }
    for (auto const &e : edges) {
        std::vector<std::pair<int, double>> terms{{Lv(e.u), 1.0}, {Lv(e.v), -1.0}};
        for (int c = 1; c <= smax; ++c)
            terms.emplace_back(zv(e.v, c), params.lambda * c);
        terms.emplace_back(chi(e.u, e.v), model.big_m_load);
        addRow(name2("load_prop", e.u, e.v), std::move(terms), RowSense::LE, model.big_m_load);
    }
    for (int v = 0; v < n; ++v)
        addRow("robot_mass_" + std::to_string(v), {{Rv(v), 1.0}, {Lv(v), -1.0}}, RowSense::EQ,
               params.base_mass);

    // Sampling levels: one-hot level selection defines the integer count and
    // is tied to visitation.
    for (int v = 0; v < n; ++v) {
        std::vector<std::pair<int, double>> terms{{lv(v), 1.0}};
        for (int c = 1; c <= smax; ++c)
            terms.emplace_back(zv(v, c), -static_cast<double>(c));
        addRow("sample_count_" + std::to_string(v), std::move(terms), RowSense::EQ, 0);

        std::vector<std::pair<int, double>> level{{yv(v), -1.0}};
        for (int c = 1; c <= smax; ++c)
            level.emplace_back(zv(v, c), 1.0);
        addRow("sample_level_" + std::to_string(v), std::move(level), RowSense::EQ, 0);
    }

    // Energy budget through the exact McCormick envelope of R_u * chi_uv.
    {
        std::vector<std::pair<int, double>> terms;
        for (auto const &e : edges)
            terms.emplace_back(Tuv(e.u, e.v), e.cost);
        addRow("energy_budget", std::move(terms), RowSense::LE, params.budget);
    }
    for (auto const &e : edges) {
        addRow(name2("mccormick_ub_r", e.u, e.v), {{Tuv(e.u, e.v), 1.0}, {Rv(e.u), -1.0}},
               RowSense::LE, 0);
        addRow(name2("mccormick_ub_chi", e.u, e.v),
               {{Tuv(e.u, e.v), 1.0}, {chi(e.u, e.v), -rmax}}, RowSense::LE, 0);
        addRow(name2("mccormick_lb", e.u, e.v),
               {{Tuv(e.u, e.v), 1.0}, {Rv(e.u), -1.0}, {chi(e.u, e.v), -rmax}}, RowSense::GE,
               -rmax);
    }

    // Per-level estimator disaggregation.
    for (int ti = 0; ti < m; ++ti)
        for (int v = 0; v < n; ++v) {
            std::vector<std::pair<int, double>> terms{{Atv(ti, v), 1.0}};
            for (int c = 1; c <= smax; ++c)
                terms.emplace_back(Atvc(ti, v, c), -1.0);
            addRow(name2("estimator_sum", ti, v), std::move(terms), RowSense::EQ, 0);
            for (int c = 1; c <= smax; ++c) {
                addRow(name3("estimator_level_ub", ti, v, c),
                       {{Atvc(ti, v, c), 1.0}, {zv(v, c), -amax}}, RowSense::LE, 0);
                addRow(name3("estimator_level_lb", ti, v, c),
                       {{Atvc(ti, v, c), -1.0}, {zv(v, c), -amax}}, RowSense::LE, 0);
            }
        }

    // Optional geometric path-length cap.
    if (params.distance_cap) {
        std::vector<std::pair<int, double>> terms;
        for (auto const &e : edges)
            terms.emplace_back(chi(e.u, e.v), e.cost);
        addRow("distance_cap", std::move(terms), RowSense::LE, *params.distance_cap);
    }

    // Quadratic objective: kernel quadratic over aggregate coefficients,
    // per-level noise squares, linear cross-covariance pull, constant prior.
    auto const kVV = kernelMatrix(field.kernel, positions, positions);
    auto const kTV = kernelMatrix(field.kernel, field.test_points, positions);

    model.objective.constant = field.priorVariance();
    for (int ti = 0; ti < m; ++ti) {
        double const w = field.test_weights[ti];
        if (w == 0.0)
            continue;
        for (int v = 0; v < n; ++v)
            model.objective.linear.emplace_back(Atv(ti, v), -2.0 * w * kTV(ti, v));
        for (int v1 = 0; v1 < n; ++v1)
            for (int v2 = v1; v2 < n; ++v2) {
                double const coef = w * kVV(v1, v2) * (v1 == v2 ? 1.0 : 2.0);
                if (coef != 0.0)
                    model.objective.quadratic.push_back({Atv(ti, v1), Atv(ti, v2), coef});
            }
        for (int v = 0; v < n; ++v)
            for (int c = 1; c <= smax; ++c)
                model.objective.quadratic.push_back(
                    {Atvc(ti, v, c), Atvc(ti, v, c), w * field.noise_variance / c});
    }

    return model;
}

namespace {

double evalObjective(MiqpModel const &model, std::vector<double> const &x)
{
    double value = model.objective.constant;
    for (auto const &[i, coef] : model.objective.linear)
        value += coef * x[i];
    for (auto const &q : model.objective.quadratic)
        value += q.coef * x[q.i] * x[q.j];
    return value;
}

struct ParsedName {
    std::string stem;
    std::vector<int> idx;
};

ParsedName parseName(std::string const &name)
{
    ParsedName out;
    std::size_t const first = name.find('_');
    out.stem = name.substr(0, first);
    std::size_t pos = first;
    while (pos != std::string::npos && pos + 1 < name.size()) {
        std::size_t next = name.find('_', pos + 1);
        out.idx.push_back(std::stoi(name.substr(pos + 1, next - pos - 1)));
        pos = next;
    }
    return out;
}

}  // namespace

long ValidationReport::failedRowCount() const
{
    return std::count_if(rows.begin(), rows.end(), [](RowCheck const &r) { return !r.pass; });
}

nlohmann::json ValidationReport::toJson() const
{
    nlohmann::json doc;
    doc["all_pass"] = all_pass;
    doc["failed_rows"] = failedRowCount();
    doc["objective_value"] = objective_value;
    if (has_plan) {
        nlohmann::json steps = nlohmann::json::array();
        for (auto const &s : implied_plan.steps)
            steps.push_back({{"vertex", s.vertex}, {"samples", s.samples}});
        doc["implied_plan"] = {{"steps", std::move(steps)},
                               {"energy", plan_energy},
                               {"distance", implied_plan.distance}};
        doc["model_energy"] = model_energy;
    } else {
        doc["implied_plan"] = nullptr;
    }
    nlohmann::json checks = nlohmann::json::array();
    for (auto const &r : rows)
        checks.push_back({{"constraint_tag", r.tag},
                          {"lhs", r.lhs},
                          {"rhs", r.rhs},
                          {"residual", r.residual},
                          {"pass", r.pass}});
    doc["rows"] = std::move(checks);
    return doc;
}

ValidationReport validateAssignment(MiqpModel const &model, Assignment const &assignment,
                                    double tol)
{
    if (assignment.values.size() != model.vars.size())
        throw std::invalid_argument("assignment covers " + std::to_string(assignment.values.size())
                                    + " of " + std::to_string(model.vars.size()) + " variables");
    auto const &x = assignment.values;

    ValidationReport report;

    for (auto const &row : model.rows) {
        double lhs = 0.0;
        for (auto const &[i, coef] : row.terms)
            lhs += coef * x[i];
        double violation = 0.0;
        switch (row.sense) {
        case RowSense::LE: violation = lhs - row.rhs; break;
        case RowSense::GE: violation = row.rhs - lhs; break;
        case RowSense::EQ: violation = std::abs(lhs - row.rhs); break;
        }
        report.rows.push_back({row.tag, lhs, row.rhs, violation, violation <= tol});
    }

    // Bounds and integrality are reported only when violated.
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        auto const &v = model.vars[i];
        if (x[i] < v.lb - tol)
            report.rows.push_back({"bound:" + v.name, x[i], v.lb, v.lb - x[i], false});
        if (x[i] > v.ub + tol)
            report.rows.push_back({"bound:" + v.name, x[i], v.ub, x[i] - v.ub, false});
        if (v.kind != VarKind::Continuous) {
            double const frac = std::abs(x[i] - std::round(x[i]));
            if (frac > tol)
                report.rows.push_back(
                    {"integrality:" + v.name, x[i], std::round(x[i]), frac, false});
        }
    }

    report.objective_value = evalObjective(model, x);

    // Reconstruct the plan implied by the edge binaries and sampling levels.
    std::vector<int> next(model.n, -1);
    std::vector<int> counts(model.n, 0);
    double model_energy = 0.0;
    std::vector<std::vector<double>> edge_cost(model.n, std::vector<double>(model.n, kNan));
    bool malformed = false;

    for (auto const &row : model.rows) {
        if (row.tag != "energy_budget")
            continue;
        for (auto const &[i, coef] : row.terms) {
            auto const parsed = parseName(model.vars[i].name);
            edge_cost[parsed.idx[0]][parsed.idx[1]] = coef;
            model_energy += coef * x[i];
        }
    }
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        auto const parsed = parseName(model.vars[i].name);
        if (parsed.stem == "chi" && x[i] > 0.5) {
            if (next[parsed.idx[0]] != -1)
                malformed = true;
            next[parsed.idx[0]] = parsed.idx[1];
        } else if (parsed.stem == "z" && x[i] > 0.5) {
            counts[parsed.idx[0]] += parsed.idx[1];
        }
    }

    Plan plan;
    double plan_energy = 0.0;
    {
        std::vector<bool> seen(model.n, false);
        int u = model.start;
        double load = 0.0;
        seen[u] = true;
        load += model.lambda * counts[u];
        plan.steps.push_back({u, counts[u]});
        while (u != model.target && !malformed) {
            int const v = next[u];
            if (v < 0 || seen[v] || std::isnan(edge_cost[u][v])) {
                malformed = true;
                break;
            }
            plan_energy += edge_cost[u][v] * (model.base_mass + load);
            plan.distance += edge_cost[u][v];
            load += model.lambda * counts[v];
            plan.steps.push_back({v, counts[v]});
            seen[v] = true;
            u = v;
        }
        // Any active edge outside the walked chain means the binaries do
        // not encode a single path.
        int active = 0, walked = static_cast<int>(plan.steps.size()) - 1;
        for (int w = 0; w < model.n; ++w)
            active += next[w] >= 0 ? 1 : 0;
        if (active != walked)
            malformed = true;
    }

    if (!malformed) {
        report.has_plan = true;
        report.implied_plan = plan;
        report.plan_energy = plan_energy;
        report.model_energy = model_energy;
        report.rows.push_back({"check_plan_energy_budget", plan_energy, model.budget,
                               plan_energy - model.budget, plan_energy <= model.budget + tol});
        report.rows.push_back({"check_mccormick_energy", model_energy, plan_energy,
                               std::abs(model_energy - plan_energy),
                               std::abs(model_energy - plan_energy) <= tol});
    } else {
        report.rows.push_back({"check_plan_extracted", 0.0, 1.0, 1.0, false});
    }

    report.all_pass = std::all_of(report.rows.begin(), report.rows.end(),
                                  [](RowCheck const &r) { return r.pass; });
    return report;
}

Assignment assignmentFromPlan(MiqpModel const &model, Plan const &plan, FieldModel const &field,
                              World const &world)
{
    Assignment asg;
    asg.values.assign(model.vars.size(), 0.0);
    auto &x = asg.values;

    SampleAllocation alloc;
    for (auto const &step : plan.steps)
        if (step.samples > 0)
            alloc.counts[step.vertex] = step.samples;

    double load = 0.0;
    for (std::size_t j = 0; j < plan.steps.size(); ++j) {
        auto const &step = plan.steps[j];
        int const v = step.vertex;
        x[model.var("y_" + std::to_string(v))] = 1.0;
        x[model.var("o_" + std::to_string(v))] = static_cast<double>(j);
        x[model.var("l_" + std::to_string(v))] = step.samples;
        if (step.samples > 0)
            x[model.var(name2("z", v, step.samples))] = 1.0;
        load += model.lambda * step.samples;
        x[model.var("L_" + std::to_string(v))] = load;
        if (j + 1 < plan.steps.size()) {
            int const w = plan.steps[j + 1].vertex;
            x[model.var(name2("chi", v, w))] = 1.0;
            x[model.var(name2("T", v, w))] = model.base_mass + load;
        }
    }
    for (int v = 0; v < model.n; ++v)
        x[model.var("R_" + std::to_string(v))]
            = model.base_mass + x[model.var("L_" + std::to_string(v))];

    auto const [est, value] = optimalLlse(field, world.positions(), alloc);
    (void)value;
    for (int ti = 0; ti < model.m; ++ti)
        for (int v = 0; v < model.n; ++v) {
            double const a = est.coefficients(ti, v);
            x[model.var(name2("Atv", ti, v))] = a;
            int const level = alloc.at(v);
            if (level >= 1)
                x[model.var(name3("Atvc", ti, v, level))] = a;
        }
    return asg;
}

}  // namespace lipp
