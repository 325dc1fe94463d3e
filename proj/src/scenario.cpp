#include "lipp/scenario.hpp"
#include "lipp/errors.hpp"

#include <fstream>
#include <stdexcept>

namespace lipp {

using nlohmann::json;

json Scenario::toJson() const
{
    json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    doc["seed"] = seed;
    doc["alpha"] = alpha;
    doc["start"] = world.start;
    doc["target"] = world.target;

    json verts = json::array();
    for (auto const &v : world.vertices)
        verts.push_back({{"id", v.id}, {"x", v.position.x}, {"y", v.position.y},
                         {"height", v.height}});
    doc["vertices"] = std::move(verts);

    json edges = json::array();
    for (auto const &e : world.edges)
        edges.push_back({{"u", e.u}, {"v", e.v}, {"cost", e.cost}});
    doc["edges"] = std::move(edges);

    json tests = json::array();
    for (std::size_t i = 0; i < field.test_points.size(); ++i)
        tests.push_back({{"x", field.test_points[i].x}, {"y", field.test_points[i].y},
                         {"weight", field.test_weights[static_cast<Eigen::Index>(i)]}});
    doc["test_points"] = std::move(tests);

    doc["kernel"] = {{"signal_variance", field.kernel.signal_variance},
                     {"lengthscale", field.kernel.lengthscale}};
    doc["noise_variance"] = field.noise_variance;

    json en = {{"lambda", energy.lambda},     {"base_mass", energy.base_mass},
               {"s_max", energy.s_max},       {"l_max", energy.l_max},
               {"budget", energy.budget}};
    if (energy.distance_cap)
        en["distance_cap"] = *energy.distance_cap;
    doc["energy"] = std::move(en);

    if (!metadata.is_null())
        doc["metadata"] = metadata;
    return doc;
}

Scenario Scenario::fromJson(json const &doc)
{
    if (!doc.contains("schema_version"))
        throw std::invalid_argument("scenario is missing schema_version");
    if (doc.at("schema_version").get<int>() != kScenarioSchemaVersion)
        throw std::invalid_argument("unsupported scenario schema_version "
                                    + doc.at("schema_version").dump());

    Scenario sc;
    sc.seed = doc.value("seed", std::uint64_t{0});
    sc.alpha = doc.value("alpha", 0.0);
    sc.metadata = doc.value("metadata", json());

    for (auto const &v : doc.at("vertices")) {
        Vertex vert;
        vert.id = v.at("id").get<int>();
        vert.position = {v.at("x").get<double>(), v.at("y").get<double>()};
        vert.height = v.value("height", 0.0);
        sc.world.vertices.push_back(vert);
    }

    for (auto const &e : doc.at("edges")) {
        Edge edge;
        edge.u = e.at("u").get<int>();
        edge.v = e.at("v").get<int>();
        if (e.contains("cost")) {
            edge.cost = e.at("cost").get<double>();
        } else {
            // Cost omitted: derive it from the terrain model.
            auto const &vu = sc.world.vertices.at(edge.u);
            auto const &vv = sc.world.vertices.at(edge.v);
            edge.cost = terrainCost(vu, vv, sc.alpha);
        }
        sc.world.edges.push_back(edge);
    }

    sc.world.start = doc.at("start").get<int>();
    sc.world.target = doc.at("target").get<int>();

    auto const &tests = doc.at("test_points");
    sc.field.test_weights = Eigen::VectorXd::Ones(tests.size());
    Eigen::Index ti = 0;
    for (auto const &t : tests) {
        sc.field.test_points.push_back({t.at("x").get<double>(), t.at("y").get<double>()});
        sc.field.test_weights[ti++] = t.value("weight", 1.0);
    }
    sc.world.test_points = sc.field.test_points;

    sc.field.kernel.signal_variance = doc.at("kernel").at("signal_variance").get<double>();
    sc.field.kernel.lengthscale = doc.at("kernel").at("lengthscale").get<double>();
    sc.field.noise_variance = doc.at("noise_variance").get<double>();

    auto const &en = doc.at("energy");
    sc.energy.lambda = en.at("lambda").get<double>();
    sc.energy.base_mass = en.at("base_mass").get<double>();
    sc.energy.s_max = en.at("s_max").get<int>();
    sc.energy.l_max = en.at("l_max").get<double>();
    sc.energy.budget = en.at("budget").get<double>();
    if (en.contains("distance_cap"))
        sc.energy.distance_cap = en.at("distance_cap").get<double>();

    sc.world.finalize();
    sc.field.validate();
    sc.energy.validate();
    return sc;
}

void Scenario::save(std::filesystem::path const &path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << toJson().dump(2) << '\n';
}

Scenario Scenario::load(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open scenario " + path.string());
    json doc;
    in >> doc;
    return fromJson(doc);
}

}  // namespace lipp
