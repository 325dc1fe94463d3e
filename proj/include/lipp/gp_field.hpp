#ifndef LIPP_GP_FIELD_H
#define LIPP_GP_FIELD_H

#include "lipp/geometry.hpp"

#include <Eigen/Dense>
#include <map>
#include <vector>

namespace lipp {

enum class KernelKind { SquaredExponential };

/**
 * Stationary covariance kernel. Only the squared-exponential family is
 * supported; signal_variance is k(x, x) and lengthscale sets the correlation
 * range.
 */
struct Kernel {
    KernelKind kind = KernelKind::SquaredExponential;
    double signal_variance = 1.0;
    double lengthscale = 1.0;

    double operator()(Point const &a, Point const &b) const;
};

/**
 * Everything needed to evaluate posterior variance over the test set:
 * the kernel, the per-sample noise variance, the test locations, and the
 * diagonal test weights.
 */
struct FieldModel {
    Kernel kernel;
    double noise_variance = 1.0;  // per single sample
    std::vector<Point> test_points;
    Eigen::VectorXd test_weights;  // diagonal of the weight matrix

    void validate() const;

    // trace(M k_TT): the objective value before conditioning on anything.
    double priorVariance() const;
};

/**
 * Per-vertex physical sample counts. A count of zero means the vertex is
 * not sampled; sampled vertices contribute noise_variance / count to the
 * observation noise.
 */
struct SampleAllocation {
    std::map<int, int> counts;

    int at(int vertex) const
    {
        auto it = counts.find(vertex);
        return it == counts.end() ? 0 : it->second;
    }

    // Vertex ids with at least one sample, ascending.
    std::vector<int> sampledVertices() const;

    int totalSamples() const;
};

/**
 * Linear estimator mapping observations at sampled vertices to test-point
 * predictions. Columns outside the support are exactly zero.
 */
struct Estimator {
    Eigen::MatrixXd coefficients;  // m x n
    std::vector<int> support;      // vertex ids where columns may be nonzero
};

// Cross-covariance matrix: entry (i, j) = k(rows[i], cols[j]).
Eigen::MatrixXd kernelMatrix(Kernel const &kernel, std::vector<Point> const &rows,
                             std::vector<Point> const &cols);

/**
 * Closed-form weighted posterior variance over the test set after observing
 * the sampled vertices of `allocation`, each with noise sigma^2 / count.
 * The linear solve runs only over sampled vertices; an empty allocation
 * returns the prior variance. Throws NumericalError when the factorization
 * pivots collapse below 1e-12 of the largest pivot.
 */
double posteriorVariance(FieldModel const &model, std::vector<Point> const &vertex_positions,
                         SampleAllocation const &allocation);

/**
 * Exact quadratic objective value for a given estimator: the weighted trace
 * of A (k_VV + N) A^T - 2 k_TV A^T + k_TT restricted to the estimator's
 * support. The support must be contained in the allocation's sampled set.
 */
double llseObjective(FieldModel const &model, std::vector<Point> const &vertex_positions,
                     Estimator const &estimator, SampleAllocation const &allocation);

/**
 * Minimizer of the quadratic objective with support restricted to the
 * sampled vertices, via the normal equations on the sampled sub-block.
 * The returned value coincides with posteriorVariance on the same inputs.
 */
std::pair<Estimator, double> optimalLlse(FieldModel const &model,
                                         std::vector<Point> const &vertex_positions,
                                         SampleAllocation const &allocation);

/**
 * Default estimator coefficient bound: 10x the largest absolute entry of the
 * unconstrained optimum at full sampling (every vertex at s_max).
 */
double defaultEstimatorBound(FieldModel const &model, std::vector<Point> const &vertex_positions,
                             int s_max);

}  // namespace lipp

#endif  // LIPP_GP_FIELD_H
