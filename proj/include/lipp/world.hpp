#ifndef LIPP_WORLD_H
#define LIPP_WORLD_H

#include "lipp/geometry.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace lipp {

struct Vertex {
    int id = 0;
    Point position;
    double height = 0.0;
};

struct Edge {
    int u = 0;
    int v = 0;
    double cost = 0.0;
};

/**
 * Mission environment: sampling vertices with geometry and elevation, a
 * directed weighted traversal graph, the start/target vertices, and the
 * test locations. Immutable after construction; `finalize()` checks the
 * invariants and builds the adjacency index.
 */
struct World {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    int start = 0;
    int target = 0;
    std::vector<Point> test_points;

    // Validates invariants (dense ids, positive finite costs, no self-loops,
    // start != target, target reachable) and indexes out-edges per vertex,
    // sorted by ascending cost then target id.
    void finalize();

    int numVertices() const { return static_cast<int>(vertices.size()); }

    std::vector<Point> positions() const;

    // Out-edges of u as (edge index into `edges`), sorted by (cost, v).
    std::vector<int> const &outEdges(int u) const { return out_edges_[u]; }

    // Cost of edge (u, v); nullopt when absent.
    std::optional<double> edgeCost(int u, int v) const;

private:
    std::vector<std::vector<int>> out_edges_;
};

/**
 * Load and energy model parameters: unit sample mass, robot base mass,
 * the per-vertex sample cap, the carryable load cap, the energy budget,
 * and an optional geometric path-length cap.
 */
struct EnergyParams {
    double lambda = 1.0;      // mass per sample
    double base_mass = 1.0;   // robot mass without samples
    int s_max = 3;            // per-vertex sample cap
    double l_max = 9.0;       // maximum carryable sample load mass
    double budget = 2.0;      // energy budget
    std::optional<double> distance_cap;

    double maxMass() const { return base_mass + l_max; }

    void validate() const;
};

struct PlanStep {
    int vertex = 0;
    int samples = 0;
};

/**
 * Solver output: the ordered (vertex, sample count) sequence plus its
 * objective value and recomputed energy/distance.
 */
struct Plan {
    std::vector<PlanStep> steps;
    double objective = 0.0;  // posterior variance
    double energy = 0.0;
    double distance = 0.0;

    int numVertices() const { return static_cast<int>(steps.size()); }
    int totalSamples() const;
    std::vector<int> vertexSequence() const;
};

// Traversal cost d_euclid * (1 + alpha * (height_v - height_u)); must be > 0.
double terrainCost(Vertex const &u, Vertex const &v, double alpha);

// Cumulative (load, mass) after each step; throws when the load cap is hit.
std::vector<std::pair<double, double>> loadProfile(std::vector<PlanStep> const &steps,
                                                   EnergyParams const &params);

// Sum over traversed edges of cost x mass when departing the edge's source.
double pathEnergy(std::vector<PlanStep> const &steps, World const &world,
                  EnergyParams const &params);

// Sum of traversed edge costs.
double pathDistance(std::vector<PlanStep> const &steps, World const &world);

/**
 * All-pairs shortest-path costs over the directed graph; +infinity when
 * unreachable. Admissible lower bound on the remaining travel cost.
 */
Eigen::MatrixXd allPairsCostLowerBounds(World const &world);

}  // namespace lipp

#endif  // LIPP_WORLD_H
