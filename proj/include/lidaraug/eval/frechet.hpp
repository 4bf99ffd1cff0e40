#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"

namespace lidaraug {

/// First two moments of a feature sample set.
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  Eigen::Index dim() const { return mean.size(); }

  void validate() const {
    if (covariance.rows() != dim() || covariance.cols() != dim())
      throw ValidationError("GaussianSummary: covariance shape mismatch");
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
      throw ValidationError("GaussianSummary: covariance asymmetry " +
                            std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.eigenvalues().minCoeff() < -1e-8)
      throw ValidationError("GaussianSummary: covariance not PSD");
  }
};

/// Sample mean and unbiased (n-1) covariance of feature vectors.
inline GaussianSummary summarize(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.size() < 2)
    throw ValidationError("summarize: need >= 2 samples, got " +
                          std::to_string(samples.size()));
  const Eigen::Index d = samples[0].size();
  for (const auto& s : samples)
    if (s.size() != d) throw ValidationError("summarize: inconsistent dimensions");

  GaussianSummary g;
  g.mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) g.mean += s;
  g.mean /= static_cast<double>(samples.size());

  g.covariance = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) {
    const Eigen::VectorXd c = s - g.mean;
    g.covariance += c * c.transpose();
  }
  g.covariance /= static_cast<double>(samples.size() - 1);
  return g;
}

/// Squared Wasserstein-2 distance between two Gaussians:
/// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2). Both
/// covariances are regularized by +eps*I before the square roots; tiny
/// negative results from floating error are clamped to 0.
inline double frechet_distance(const GaussianSummary& a, const GaussianSummary& b,
                               double eps = 1e-6) {
  if (a.dim() != b.dim())
    throw ValidationError("frechet_distance: dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) +
                          ")");
  a.validate();
  b.validate();
  const Eigen::Index d = a.dim();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd sa = a.covariance + eps * eye;
  const Eigen::MatrixXd sb = b.covariance + eps * eye;

  // Symmetric square root of sa.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(sa);
  const Eigen::MatrixXd root_a = es_a.operatorSqrt();

  const Eigen::MatrixXd inner = root_a * sb * root_a;
  const Eigen::MatrixXd inner_sym = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_inner(inner_sym);
  const double trace_cross = es_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * trace_cross;
  if (value < -1e-8)
    throw ValidationError("frechet_distance: negative value " + std::to_string(value));
  return std::max(0.0, value);
}

}  // namespace lidaraug
