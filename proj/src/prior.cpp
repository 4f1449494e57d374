#include "infoop/prior.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "infoop/error.hpp"

namespace infoop {

PriorModel::PriorModel(Matrix precision, Vector mean)
    : precision_(std::move(precision)), mean_(std::move(mean)) {
  const Index n = precision_.rows();
  if (precision_.cols() != n) throw MetricError("prior precision must be square");
  if (mean_.size() == 0) mean_ = Vector::Zero(n);
  if (mean_.size() != n) throw DimensionError("prior mean length does not match precision");
  if (!precision_.allFinite() || !mean_.allFinite()) {
    throw MetricError("prior precision and mean must be finite");
  }
  if (n == 0) return;
  const double scale = precision_.cwiseAbs().maxCoeff();
  if ((precision_ - precision_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw MetricError("prior precision must be symmetric");
  }
  precision_ = 0.5 * (precision_ + precision_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(precision_);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw MetricError("prior precision must be positive definite");
  }
  const Matrix& v = eig.eigenvectors();
  cov_sqrt_ = v * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  cov_sqrt_ = 0.5 * (cov_sqrt_ + cov_sqrt_.transpose());
}

PriorModel PriorModel::identity(Index n) { return PriorModel(Matrix::Identity(n, n)); }

Vector PriorModel::cov_sqrt_action(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("cov_sqrt_action: vector length mismatch");
  return cov_sqrt_ * v;
}

PriorModel difference_precision(Index n, double gamma, double eps, Vector mean) {
  if (n < 2) throw DimensionError("difference_precision: n must be at least 2");
  if (!(gamma > 0.0)) throw MetricError("difference_precision: gamma must be positive");
  if (!(eps > 0.0)) throw MetricError("difference_precision: eps must be positive");
  Matrix q = eps * Matrix::Identity(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    q(i, i) += gamma;
    q(i + 1, i + 1) += gamma;
    q(i, i + 1) -= gamma;
    q(i + 1, i) -= gamma;
  }
  return PriorModel(std::move(q), std::move(mean));
}

double variance_ratio(double lambda_pr) { return 1.0 / (1.0 + std::max(lambda_pr, 0.0)); }

LisResult lis_select(const ModeSet& modes, double tau) {
  LisResult out;
  out.tau = tau;
  out.retained.metric = modes.metric;
  Index kept = 0;
  for (Index i = 0; i < modes.size(); ++i) {
    if (modes.eigenvalues(i) > tau) ++kept;
  }
  out.retained.eigenvalues.resize(kept);
  out.retained.modes.resize(modes.dim(), kept);
  out.retained.residual_norms.resize(kept);
  const bool has_whitened = modes.whitened_modes.cols() == modes.size();
  if (has_whitened) out.retained.whitened_modes.resize(modes.whitened_modes.rows(), kept);
  out.variance_ratios.resize(kept);
  Index j = 0;
  for (Index i = 0; i < modes.size(); ++i) {
    if (!(modes.eigenvalues(i) > tau)) continue;
    out.retained.eigenvalues(j) = modes.eigenvalues(i);
    out.retained.modes.col(j) = modes.modes.col(i);
    out.retained.residual_norms(j) = modes.residual_norms(i);
    if (has_whitened) out.retained.whitened_modes.col(j) = modes.whitened_modes.col(i);
    out.variance_ratios(j) = variance_ratio(modes.eigenvalues(i));
    ++j;
  }
  return out;
}

namespace {

template <class Keep>
Matrix whitened_projector(const ModeSet& modes, Keep keep) {
  if (modes.metric != Metric::prior || modes.whitened_modes.cols() != modes.size()) {
    throw DimensionError("projector requires prior-metric modes with whitened vectors");
  }
  const Index n = modes.whitened_modes.rows();
  if (modes.size() != n) {
    throw DimensionError("projector requires the complete whitened mode basis (" +
                         std::to_string(n) + " modes), got " + std::to_string(modes.size()));
  }
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < modes.size(); ++i) {
    if (!keep(modes.eigenvalues(i))) continue;
    const Vector w = modes.whitened_modes.col(i);
    p.noalias() += w * w.transpose();
  }
  return 0.5 * (p + p.transpose());
}

}  // namespace

Matrix weak_projector(const ModeSet& modes, double tau_weak) {
  return whitened_projector(modes, [tau_weak](double l) { return l < tau_weak; });
}

Matrix strong_projector(const ModeSet& modes, double tau_weak) {
  return whitened_projector(modes, [tau_weak](double l) { return !(l < tau_weak); });
}

WeakGain weak_gain(const ObservationBlock& candidate, const PriorModel& prior,
                   const Matrix& projector) {
  const Index n = prior.dim();
  if (candidate.params() != n || projector.rows() != n || projector.cols() != n) {
    throw DimensionError("weak_gain: candidate, prior and projector dimensions differ");
  }
  // Whitened candidate rows: L^{-1} J C^{1/2}; the gain is the Gram of their projection.
  const Matrix rows = candidate.whitened_jacobian() * prior.cov_sqrt() * projector;
  WeakGain out;
  out.gain_operator = rows.transpose() * rows;
  out.gain_operator = 0.5 * (out.gain_operator + out.gain_operator.transpose());
  out.scalar_gain = rows.squaredNorm();
  return out;
}

Matrix posterior_precision(const InfoOperator& op, const PriorModel& prior) {
  if (op.dim() != prior.dim()) throw DimensionError("posterior_precision: dimension mismatch");
  Matrix q = prior.precision() + op.to_dense();
  return 0.5 * (q + q.transpose());
}

Matrix posterior_covariance(const InfoOperator& op, const PriorModel& prior) {
  const Matrix q = posterior_precision(op, prior);
  Eigen::LLT<Matrix> llt(q);
  if (llt.info() != Eigen::Success) throw MetricError("posterior precision is not positive definite");
  return llt.solve(Matrix::Identity(q.rows(), q.cols()));
}

}  // namespace infoop
