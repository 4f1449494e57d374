#pragma once

#include "infoop/info_operator.hpp"
#include "infoop/spectral.hpp"

namespace infoop {

/// Gaussian prior N(m_pr, C_pr) given by its precision Q_pr = C_pr^{-1}.
///
/// The symmetric square root C_pr^{1/2} is built from the eigendecomposition
/// of Q_pr, which keeps the prior-preconditioned and generalized eigenproblems
/// exactly equivalent.
class PriorModel {
 public:
  explicit PriorModel(Matrix precision, Vector mean = {});

  static PriorModel identity(Index n);

  Index dim() const noexcept { return precision_.rows(); }
  const Matrix& precision() const noexcept { return precision_; }
  const Vector& mean() const noexcept { return mean_; }

  /// Symmetric C_pr^{1/2}.
  const Matrix& cov_sqrt() const noexcept { return cov_sqrt_; }
  Vector cov_sqrt_action(const Vector& v) const;
  Matrix covariance() const { return cov_sqrt_ * cov_sqrt_; }

 private:
  Matrix precision_;
  Vector mean_;
  Matrix cov_sqrt_;
};

/// Q = gamma D^T D + eps I with D the (n-1) x n first-difference stencil.
PriorModel difference_precision(Index n, double gamma, double eps, Vector mean = {});

struct LisResult {
  ModeSet retained;
  double tau = 1.0;
  Vector variance_ratios;  // 1 / (1 + lambda_pr)
};

/// Keeps prior-relative modes with eigenvalue strictly above tau.
LisResult lis_select(const ModeSet& modes, double tau = 1.0);

/// Posterior-to-prior variance ratio of a Q_pr-orthonormal modal coefficient.
double variance_ratio(double lambda_pr);

/// Orthogonal projector (whitened coordinates) onto modes with lambda_pr < tau_weak.
/// Requires a complete prior-metric mode basis.
Matrix weak_projector(const ModeSet& modes, double tau_weak = 1e-2);

/// Complement of weak_projector: modes with lambda_pr >= tau_weak.
Matrix strong_projector(const ModeSet& modes, double tau_weak = 1e-2);

struct WeakGain {
  Matrix gain_operator;
  double scalar_gain = 0.0;
};

/// G = P C^{1/2} I_b C^{1/2} P and g = tr(G), both in whitened coordinates.
WeakGain weak_gain(const ObservationBlock& candidate, const PriorModel& prior,
                   const Matrix& projector);

/// Q_pr + I.
Matrix posterior_precision(const InfoOperator& op, const PriorModel& prior);

/// (Q_pr + I)^{-1} via Cholesky.
Matrix posterior_covariance(const InfoOperator& op, const PriorModel& prior);

}  // namespace infoop
