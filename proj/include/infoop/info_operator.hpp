#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infoop {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest parameter dimension for which operators are assembled densely.
inline constexpr Index kDenseLimit = 4000;

/// Relative eigenvalue cutoff used by generalized inverses and PSD checks.
inline constexpr double kDefaultPinvTol = 1e-10;

/// Observation noise covariance R, either diagonal or dense SPD.
///
/// Whitening uses the elementwise square root for the diagonal form and the
/// lower Cholesky factor R = L L^T for the dense form; R^{-1} is never formed.
class NoiseCovariance {
 public:
  static NoiseCovariance diagonal(Vector variances);
  static NoiseCovariance isotropic(Index n, double variance);
  static NoiseCovariance dense(Matrix covariance);

  Index dim() const noexcept { return dim_; }
  bool is_diagonal() const noexcept { return diagonal_; }

  /// Diagonal of R (valid for both representations).
  Vector variances() const;
  Matrix to_dense() const;

  /// L^{-1} X, so that (L^{-1}X)^T (L^{-1}X) = X^T R^{-1} X.
  Matrix whiten(const Matrix& x) const;
  Vector whiten(const Vector& x) const;

  /// R + C for a symmetric PSD C of matching size.
  NoiseCovariance inflated(const Matrix& c_delta) const;

 private:
  NoiseCovariance() = default;

  Index dim_ = 0;
  bool diagonal_ = true;
  Vector diag_;
  Matrix dense_;
  Matrix lower_;
};

/// Jacobian of one data source together with its noise model.
class ObservationBlock {
 public:
  ObservationBlock(Matrix jacobian, NoiseCovariance noise, std::string label = {});

  const Matrix& jacobian() const noexcept { return jacobian_; }
  const NoiseCovariance& noise() const noexcept { return noise_; }
  const std::string& label() const noexcept { return label_; }

  Index rows() const noexcept { return jacobian_.rows(); }
  Index params() const noexcept { return jacobian_.cols(); }

  /// L^{-1} J with R = L L^T.
  Matrix whitened_jacobian() const { return noise_.whiten(jacobian_); }

 private:
  Matrix jacobian_;
  NoiseCovariance noise_;
  std::string label_;
};

/// Symmetric positive-semidefinite operator on parameter perturbations.
///
/// Either a dense matrix or an action v -> I v. Instances are immutable and
/// share their storage, so copies are cheap and safe to use across threads.
class InfoOperator {
 public:
  using Action = std::function<Vector(const Vector&)>;

  /// Wraps a dense matrix; rejects non-square or visibly asymmetric input.
  static InfoOperator from_dense(Matrix matrix, std::vector<std::string> labels = {});
  static InfoOperator from_action(Index n, Action action, std::vector<std::string> labels = {});
  static InfoOperator zero(Index n);

  Index dim() const noexcept { return n_; }
  bool is_dense() const noexcept { return static_cast<bool>(dense_); }

  /// Dense storage; throws if the operator is action-based.
  const Matrix& dense() const;

  /// Dense storage, materializing an action column by column if needed.
  Matrix to_dense() const;

  Vector apply(const Vector& v) const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  InfoOperator() = default;

  Index n_ = 0;
  std::shared_ptr<const Matrix> dense_;
  Action action_;
  std::vector<std::string> labels_;
};

/// J^T R^{-1} J for one block. Dense when n <= kDenseLimit, action otherwise.
/// An empty block (no rows) yields the zero operator.
InfoOperator assemble_info(const ObservationBlock& block);

/// Matrix-free J^T (R^{-1} (J v)) for one block.
InfoOperator assemble_action(const ObservationBlock& block);

/// Sum of independent contributions, reduced left to right.
InfoOperator add_blocks(std::span<const InfoOperator> ops);

/// J_tot^T R_joint^{-1} J_tot for stacked blocks with a full joint covariance.
InfoOperator assemble_joint(std::span<const ObservationBlock> blocks, const Matrix& joint_cov);

Vector apply(const InfoOperator& op, const Vector& v);
double quadratic_form(const InfoOperator& op, const Vector& v);
double bilinear_form(const InfoOperator& op, const Vector& u, const Vector& v);

/// ||J v||^2_{R^{-1}} evaluated from the residual J v by a covariance solve.
double weighted_output_energy(const ObservationBlock& block, const Vector& v);

/// T^T I T for a reparameterization Jacobian T (n x n_new).
InfoOperator transform(const InfoOperator& op, const Matrix& t);

/// Replaces R by R + C_delta.
ObservationBlock inflate_covariance(const ObservationBlock& block, const Matrix& c_delta);

/// Joint information partitioned into interest (m) and nuisance (n) blocks.
struct JointInfoBlocks {
  Matrix mm;
  Matrix mn;
  Matrix nm;
  Matrix nn;

  static JointInfoBlocks from_jacobians(const Matrix& j_interest, const Matrix& j_nuisance,
                                        const NoiseCovariance& noise);
  static JointInfoBlocks partition(const Matrix& joint, Index n_interest);

  Matrix assembled() const;
  void validate() const;
};

/// I_mm - I_mn I_nn^+ I_nm, with I_nn^+ the eigenvalue-thresholded pseudoinverse
/// (eigenvalues below pinv_tol * lambda_max are discarded).
InfoOperator schur_complement(const JointInfoBlocks& joint, double pinv_tol = kDefaultPinvTol);

struct EllipsoidAxis {
  double eigenvalue = 0.0;
  double length = 0.0;  // +inf along null directions
  bool bounded = true;
  Vector direction;
};

/// Semi-axes of {dm : dm^T I dm <= 1} by decreasing eigenvalue; null directions
/// (eigenvalue <= rel_tol * lambda_max) are reported as unbounded.
std::vector<EllipsoidAxis> ellipsoid_axes(const InfoOperator& op, double rel_tol = kDefaultPinvTol);

/// min eigenvalue >= -rel_tol * max(|lambda|) and symmetric within 1e-12 relative.
bool is_symmetric_psd(const Matrix& m, double rel_tol = kDefaultPinvTol);

/// Numerical rank with singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);

}  // namespace infoop
