#ifndef LIPP_SCENARIO_H
#define LIPP_SCENARIO_H

#include "lipp/gp_field.hpp"
#include "lipp/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace lipp {

inline constexpr int kScenarioSchemaVersion = 1;

/**
 * A fully specified problem instance: the world, the field model, default
 * energy parameters, and the generator provenance. This is the on-disk unit
 * every CLI command consumes.
 */
struct Scenario {
    World world;
    FieldModel field;
    EnergyParams energy;
    double alpha = 0.5;
    std::uint64_t seed = 0;
    nlohmann::json metadata;  // generator details, free-form

    nlohmann::json toJson() const;
    static Scenario fromJson(nlohmann::json const &doc);

    void save(std::filesystem::path const &path) const;
    static Scenario load(std::filesystem::path const &path);
};

}  // namespace lipp

#endif  // LIPP_SCENARIO_H
