#include "lipp/gp_field.hpp"
#include "lipp/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lipp {

double Kernel::operator()(Point const &a, Point const &b) const
{
    double const d = euclid(a, b);
    return signal_variance * std::exp(-0.5 * (d / lengthscale) * (d / lengthscale));
}

void FieldModel::validate() const
{
    if (kernel.signal_variance <= 0 || kernel.lengthscale <= 0)
        throw std::invalid_argument("kernel parameters must be positive");
    if (noise_variance <= 0)
        throw std::invalid_argument("noise_variance must be positive");
    if (test_points.empty())
        throw std::invalid_argument("test set must be nonempty");
    if (test_weights.size() != static_cast<Eigen::Index>(test_points.size()))
        throw std::invalid_argument("test_weights size must match test_points");
    for (auto const &p : test_points)
        if (!isFinite(p))
            throw std::invalid_argument("non-finite test point");
    for (Eigen::Index i = 0; i < test_weights.size(); ++i)
        if (!std::isfinite(test_weights[i]) || test_weights[i] < 0)
            throw std::invalid_argument("test weights must be finite and nonnegative");
}

double FieldModel::priorVariance() const
{
    // k(t, t) = signal_variance for every test point.
    return test_weights.sum() * kernel.signal_variance;
}

std::vector<int> SampleAllocation::sampledVertices() const
{
    std::vector<int> out;
    for (auto const &[v, l] : counts)
        if (l >= 1)
            out.push_back(v);
    return out;
}

int SampleAllocation::totalSamples() const
{
    int total = 0;
    for (auto const &[v, l] : counts)
        total += l;
    return total;
}

Eigen::MatrixXd kernelMatrix(Kernel const &kernel, std::vector<Point> const &rows,
                             std::vector<Point> const &cols)
{
    for (auto const &p : rows)
        if (!isFinite(p))
            throw std::invalid_argument("non-finite coordinate in kernel rows");
    for (auto const &p : cols)
        if (!isFinite(p))
            throw std::invalid_argument("non-finite coordinate in kernel cols");

    Eigen::MatrixXd K(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            K(i, j) = kernel(rows[i], cols[j]);
    return K;
}

namespace {

void checkAllocation(SampleAllocation const &allocation, std::size_t n_vertices)
{
    for (auto const &[v, l] : allocation.counts) {
        if (v < 0 || static_cast<std::size_t>(v) >= n_vertices)
            throw std::invalid_argument("allocation refers to unknown vertex id "
                                        + std::to_string(v));
        if (l < 0)
            throw std::invalid_argument("negative sample count at vertex " + std::to_string(v));
    }
}

// k_SS + N_S over the sampled vertices, with N_jj = sigma^2 / l_j.
Eigen::MatrixXd sampledGram(FieldModel const &model, std::vector<Point> const &positions,
                            std::vector<int> const &sampled, SampleAllocation const &allocation)
{
    std::size_t const ns = sampled.size();
    Eigen::MatrixXd G(ns, ns);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < ns; ++j)
            G(i, j) = model.kernel(positions[sampled[i]], positions[sampled[j]]);
        G(i, i) += model.noise_variance / allocation.at(sampled[i]);
    }
    return G;
}

Eigen::MatrixXd crossCov(FieldModel const &model, std::vector<Point> const &positions,
                         std::vector<int> const &sampled)
{
    std::size_t const m = model.test_points.size();
    Eigen::MatrixXd K(m, sampled.size());
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t j = 0; j < sampled.size(); ++j)
            K(t, j) = model.kernel(model.test_points[t], positions[sampled[j]]);
    return K;
}

// LDLT with a pivot-collapse guard.
Eigen::LDLT<Eigen::MatrixXd> factorize(Eigen::MatrixXd const &G)
{
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    auto const d = ldlt.vectorD();
    double const dmax = d.cwiseAbs().maxCoeff();
    double const dmin = d.cwiseAbs().minCoeff();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0 || dmin < 1e-12 * dmax) {
        std::ostringstream msg;
        msg << "ill-conditioned sampled covariance: pivot range [" << dmin << ", " << dmax
            << "] over " << G.rows() << " sampled vertices";
        throw NumericalError(msg.str());
    }
    return ldlt;
}

}  // namespace

double posteriorVariance(FieldModel const &model, std::vector<Point> const &vertex_positions,
                         SampleAllocation const &allocation)
{
    model.validate();
    checkAllocation(allocation, vertex_positions.size());

    auto const sampled = allocation.sampledVertices();
    if (sampled.empty())
        return model.priorVariance();

    auto const G = sampledGram(model, vertex_positions, sampled, allocation);
    auto const kTS = crossCov(model, vertex_positions, sampled);
    auto const ldlt = factorize(G);

    Eigen::MatrixXd const X = ldlt.solve(kTS.transpose());  // (k_SS + N)^{-1} k_ST

    double value = 0.0;
    for (Eigen::Index t = 0; t < kTS.rows(); ++t) {
        double const reduced = model.kernel.signal_variance - kTS.row(t).dot(X.col(t));
        value += model.test_weights[t] * reduced;
    }
    return value;
}

double llseObjective(FieldModel const &model, std::vector<Point> const &vertex_positions,
                     Estimator const &estimator, SampleAllocation const &allocation)
{
    model.validate();
    checkAllocation(allocation, vertex_positions.size());

    auto const sampled = allocation.sampledVertices();
    for (int v : estimator.support)
        if (allocation.at(v) < 1)
            throw std::invalid_argument("estimator support includes unsampled vertex "
                                        + std::to_string(v));

    auto const m = static_cast<Eigen::Index>(model.test_points.size());
    if (estimator.coefficients.rows() != m
        || estimator.coefficients.cols() != static_cast<Eigen::Index>(vertex_positions.size()))
        throw std::invalid_argument("estimator coefficient matrix has wrong shape");

    // Columns outside the support must be exactly zero; the quadratic then
    // collapses onto the sampled sub-block.
    for (Eigen::Index v = 0; v < estimator.coefficients.cols(); ++v) {
        bool const in_support = std::find(estimator.support.begin(), estimator.support.end(),
                                          static_cast<int>(v))
                                != estimator.support.end();
        if (!in_support && estimator.coefficients.col(v).cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("nonzero estimator column outside support");
    }

    Eigen::MatrixXd A(m, sampled.size());
    for (std::size_t j = 0; j < sampled.size(); ++j)
        A.col(j) = estimator.coefficients.col(sampled[j]);

    auto const G = sampledGram(model, vertex_positions, sampled, allocation);
    auto const kTS = crossCov(model, vertex_positions, sampled);

    double value = 0.0;
    for (Eigen::Index t = 0; t < m; ++t) {
        double const quad = A.row(t) * G * A.row(t).transpose();
        double const lin = kTS.row(t).dot(A.row(t));
        value += model.test_weights[t] * (quad - 2.0 * lin + model.kernel.signal_variance);
    }
    return value;
}

std::pair<Estimator, double> optimalLlse(FieldModel const &model,
                                         std::vector<Point> const &vertex_positions,
                                         SampleAllocation const &allocation)
{
    model.validate();
    checkAllocation(allocation, vertex_positions.size());

    auto const m = static_cast<Eigen::Index>(model.test_points.size());
    auto const n = static_cast<Eigen::Index>(vertex_positions.size());
    auto const sampled = allocation.sampledVertices();

    Estimator est;
    est.coefficients = Eigen::MatrixXd::Zero(m, n);
    est.support = sampled;

    if (sampled.empty())
        return {est, model.priorVariance()};

    auto const G = sampledGram(model, vertex_positions, sampled, allocation);
    auto const kTS = crossCov(model, vertex_positions, sampled);
    auto const ldlt = factorize(G);

    Eigen::MatrixXd const X = ldlt.solve(kTS.transpose());  // columns: (k_SS+N)^{-1} k_St

    double value = 0.0;
    for (Eigen::Index t = 0; t < m; ++t) {
        for (std::size_t j = 0; j < sampled.size(); ++j)
            est.coefficients(t, sampled[j]) = X(j, t);
        value += model.test_weights[t] * (model.kernel.signal_variance - kTS.row(t).dot(X.col(t)));
    }
    return {est, value};
}

double defaultEstimatorBound(FieldModel const &model, std::vector<Point> const &vertex_positions,
                             int s_max)
{
    SampleAllocation full;
    for (std::size_t v = 0; v < vertex_positions.size(); ++v)
        full.counts[static_cast<int>(v)] = s_max;
    auto const [est, value] = optimalLlse(model, vertex_positions, full);
    (void)value;
    return 10.0 * est.coefficients.cwiseAbs().maxCoeff();
}

}  // namespace lipp
