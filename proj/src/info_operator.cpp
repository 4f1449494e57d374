#include "infoop/info_operator.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "infoop/error.hpp"

namespace infoop {
namespace {

constexpr double kSymmetryTol = 1e-12;

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = max_abs(m);
  return max_abs(m - m.transpose()) <= kSymmetryTol * scale;
}

void require_dim(const InfoOperator& op, Index n, const char* what) {
  if (op.dim() != n) {
    throw DimensionError(std::string(what) + ": operator dimension " + std::to_string(op.dim()) +
                         " does not match vector length " + std::to_string(n));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// NoiseCovariance

NoiseCovariance NoiseCovariance::diagonal(Vector variances) {
  if (!variances.allFinite() || (variances.size() > 0 && variances.minCoeff() <= 0.0)) {
    throw CovarianceError("noise variances must be finite and strictly positive");
  }
  NoiseCovariance out;
  out.dim_ = variances.size();
  out.diagonal_ = true;
  out.diag_ = std::move(variances);
  return out;
}

NoiseCovariance NoiseCovariance::isotropic(Index n, double variance) {
  return diagonal(Vector::Constant(n, variance));
}

NoiseCovariance NoiseCovariance::dense(Matrix covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw CovarianceError("noise covariance must be square");
  }
  if (!all_finite(covariance) || !is_symmetric(covariance)) {
    throw CovarianceError("noise covariance must be finite and symmetric");
  }
  if (covariance.size() > 0 && covariance.diagonal().minCoeff() <= 0.0) {
    throw CovarianceError("noise covariance diagonal must be strictly positive");
  }
  NoiseCovariance out;
  out.dim_ = covariance.rows();
  out.diagonal_ = false;
  out.dense_ = symmetrized(covariance);
  Eigen::LLT<Matrix> llt(out.dense_);
  if (llt.info() != Eigen::Success) {
    throw CovarianceError("noise covariance is not positive definite");
  }
  out.lower_ = llt.matrixL();
  return out;
}

Vector NoiseCovariance::variances() const { return diagonal_ ? diag_ : Vector(dense_.diagonal()); }

Matrix NoiseCovariance::to_dense() const {
  return diagonal_ ? Matrix(diag_.asDiagonal()) : dense_;
}

Matrix NoiseCovariance::whiten(const Matrix& x) const {
  if (x.rows() != dim_) {
    throw DimensionError("whiten: expected " + std::to_string(dim_) + " rows, got " +
                         std::to_string(x.rows()));
  }
  if (diagonal_) return diag_.cwiseSqrt().cwiseInverse().asDiagonal() * x;
  return lower_.triangularView<Eigen::Lower>().solve(x);
}

Vector NoiseCovariance::whiten(const Vector& x) const {
  return whiten(Matrix(x)).col(0);
}

NoiseCovariance NoiseCovariance::inflated(const Matrix& c_delta) const {
  if (c_delta.rows() != dim_ || c_delta.cols() != dim_) {
    throw DimensionError("inflation covariance must be " + std::to_string(dim_) + " x " +
                         std::to_string(dim_));
  }
  if (!all_finite(c_delta) || !is_symmetric(c_delta)) {
    throw CovarianceError("inflation covariance must be finite and symmetric");
  }
  if (!is_symmetric_psd(c_delta)) {
    throw CovarianceError("inflation covariance must be positive semidefinite");
  }
  return dense(to_dense() + symmetrized(c_delta));
}

// ---------------------------------------------------------------------------
// ObservationBlock

ObservationBlock::ObservationBlock(Matrix jacobian, NoiseCovariance noise, std::string label)
    : jacobian_(std::move(jacobian)), noise_(std::move(noise)), label_(std::move(label)) {
  if (jacobian_.rows() != noise_.dim()) {
    throw DimensionError("observation block '" + label_ + "': jacobian has " +
                         std::to_string(jacobian_.rows()) + " rows but noise covariance is " +
                         std::to_string(noise_.dim()) + "-dimensional");
  }
  if (!all_finite(jacobian_)) {
    throw DimensionError("observation block '" + label_ + "': jacobian has non-finite entries");
  }
}

// ---------------------------------------------------------------------------
// InfoOperator

InfoOperator InfoOperator::from_dense(Matrix matrix, std::vector<std::string> labels) {
  if (matrix.rows() != matrix.cols()) {
    throw DimensionError("information operator must be square");
  }
  if (!all_finite(matrix) || !is_symmetric(matrix)) {
    throw DimensionError("information operator must be finite and symmetric");
  }
  InfoOperator op;
  op.n_ = matrix.rows();
  op.dense_ = std::make_shared<const Matrix>(std::move(matrix));
  op.labels_ = std::move(labels);
  return op;
}

InfoOperator InfoOperator::from_action(Index n, Action action, std::vector<std::string> labels) {
  if (!action) throw DimensionError("information operator action is empty");
  InfoOperator op;
  op.n_ = n;
  op.action_ = std::move(action);
  op.labels_ = std::move(labels);
  return op;
}

InfoOperator InfoOperator::zero(Index n) { return from_dense(Matrix::Zero(n, n)); }

const Matrix& InfoOperator::dense() const {
  if (!dense_) throw DimensionError("information operator is action-based; use to_dense()");
  return *dense_;
}

Matrix InfoOperator::to_dense() const {
  if (dense_) return *dense_;
  Matrix out(n_, n_);
  for (Index j = 0; j < n_; ++j) out.col(j) = action_(Vector::Unit(n_, j));
  return symmetrized(out);
}

Vector InfoOperator::apply(const Vector& v) const {
  require_dim(*this, v.size(), "apply");
  if (dense_) return (*dense_) * v;
  return action_(v);
}

// ---------------------------------------------------------------------------
// Assembly

InfoOperator assemble_info(const ObservationBlock& block) {
  if (block.params() > kDenseLimit) return assemble_action(block);
  std::vector<std::string> labels{block.label()};
  if (block.rows() == 0) {
    return InfoOperator::from_dense(Matrix::Zero(block.params(), block.params()), labels);
  }
  const Matrix jw = block.whitened_jacobian();
  return InfoOperator::from_dense(symmetrized(jw.transpose() * jw), std::move(labels));
}

InfoOperator assemble_action(const ObservationBlock& block) {
  auto jw = std::make_shared<const Matrix>(block.whitened_jacobian());
  const Index n = block.params();
  return InfoOperator::from_action(
      n, [jw](const Vector& v) -> Vector { return jw->transpose() * ((*jw) * v); },
      {block.label()});
}

InfoOperator add_blocks(std::span<const InfoOperator> ops) {
  if (ops.empty()) throw DimensionError("add_blocks: no operators given");
  const Index n = ops.front().dim();
  std::vector<std::string> labels;
  bool all_dense = true;
  for (const auto& op : ops) {
    if (op.dim() != n) throw DimensionError("add_blocks: operator dimensions differ");
    all_dense = all_dense && op.is_dense();
    labels.insert(labels.end(), op.labels().begin(), op.labels().end());
  }
  if (all_dense) {
    Matrix sum = ops.front().dense();
    for (std::size_t b = 1; b < ops.size(); ++b) sum += ops[b].dense();
    return InfoOperator::from_dense(std::move(sum), std::move(labels));
  }
  std::vector<InfoOperator> parts(ops.begin(), ops.end());
  return InfoOperator::from_action(
      n,
      [parts = std::move(parts)](const Vector& v) -> Vector {
        Vector acc = parts.front().apply(v);
        for (std::size_t b = 1; b < parts.size(); ++b) acc += parts[b].apply(v);
        return acc;
      },
      std::move(labels));
}

InfoOperator assemble_joint(std::span<const ObservationBlock> blocks, const Matrix& joint_cov) {
  if (blocks.empty()) throw DimensionError("assemble_joint: no blocks given");
  const Index n = blocks.front().params();
  Index rows = 0;
  std::vector<std::string> labels;
  for (const auto& b : blocks) {
    if (b.params() != n) throw DimensionError("assemble_joint: parameter dimensions differ");
    rows += b.rows();
    labels.push_back(b.label());
  }
  if (joint_cov.rows() != rows || joint_cov.cols() != rows) {
    throw DimensionError("assemble_joint: joint covariance must be " + std::to_string(rows) +
                         " x " + std::to_string(rows));
  }
  Matrix stacked(rows, n);
  Index offset = 0;
  for (const auto& b : blocks) {
    stacked.middleRows(offset, b.rows()) = b.jacobian();
    offset += b.rows();
  }
  const ObservationBlock joint(std::move(stacked), NoiseCovariance::dense(joint_cov), "joint");
  const Matrix jw = joint.whitened_jacobian();
  return InfoOperator::from_dense(symmetrized(jw.transpose() * jw), std::move(labels));
}

Vector apply(const InfoOperator& op, const Vector& v) { return op.apply(v); }

double quadratic_form(const InfoOperator& op, const Vector& v) { return v.dot(op.apply(v)); }

double bilinear_form(const InfoOperator& op, const Vector& u, const Vector& v) {
  require_dim(op, u.size(), "bilinear_form");
  return u.dot(op.apply(v));
}

double weighted_output_energy(const ObservationBlock& block, const Vector& v) {
  if (v.size() != block.params()) {
    throw DimensionError("weighted_output_energy: vector length does not match block");
  }
  const Vector residual = block.jacobian() * v;
  if (block.noise().is_diagonal()) {
    return residual.cwiseAbs2().cwiseQuotient(block.noise().variances()).sum();
  }
  const Vector weighted = block.noise().to_dense().ldlt().solve(residual);
  return residual.dot(weighted);
}

InfoOperator transform(const InfoOperator& op, const Matrix& t) {
  if (t.rows() != op.dim()) {
    throw DimensionError("transform: T must have " + std::to_string(op.dim()) + " rows");
  }
  if (op.is_dense()) {
    return InfoOperator::from_dense(symmetrized(t.transpose() * op.dense() * t), op.labels());
  }
  auto tt = std::make_shared<const Matrix>(t);
  return InfoOperator::from_action(
      t.cols(), [op, tt](const Vector& v) -> Vector { return tt->transpose() * op.apply((*tt) * v); },
      op.labels());
}

ObservationBlock inflate_covariance(const ObservationBlock& block, const Matrix& c_delta) {
  return ObservationBlock(block.jacobian(), block.noise().inflated(c_delta), block.label());
}

// ---------------------------------------------------------------------------
// Nuisance elimination

JointInfoBlocks JointInfoBlocks::from_jacobians(const Matrix& j_interest, const Matrix& j_nuisance,
                                                const NoiseCovariance& noise) {
  if (j_interest.rows() != j_nuisance.rows()) {
    throw DimensionError("interest and nuisance jacobians must have equal row counts");
  }
  const Matrix wm = noise.whiten(j_interest);
  const Matrix wn = noise.whiten(j_nuisance);
  JointInfoBlocks out;
  out.mm = symmetrized(wm.transpose() * wm);
  out.mn = wm.transpose() * wn;
  out.nm = out.mn.transpose();
  out.nn = symmetrized(wn.transpose() * wn);
  return out;
}

JointInfoBlocks JointInfoBlocks::partition(const Matrix& joint, Index n_interest) {
  if (joint.rows() != joint.cols() || n_interest < 0 || n_interest > joint.rows()) {
    throw DimensionError("partition: invalid joint matrix or split index");
  }
  const Index nn = joint.rows() - n_interest;
  JointInfoBlocks out;
  out.mm = joint.topLeftCorner(n_interest, n_interest);
  out.mn = joint.topRightCorner(n_interest, nn);
  out.nm = joint.bottomLeftCorner(nn, n_interest);
  out.nn = joint.bottomRightCorner(nn, nn);
  out.validate();
  return out;
}

Matrix JointInfoBlocks::assembled() const {
  Matrix out(mm.rows() + nn.rows(), mm.cols() + nn.cols());
  out << mm, mn, nm, nn;
  return out;
}

void JointInfoBlocks::validate() const {
  if (mm.rows() != mm.cols() || nn.rows() != nn.cols() || mn.rows() != mm.rows() ||
      mn.cols() != nn.rows() || nm.rows() != nn.rows() || nm.cols() != mm.rows()) {
    throw DimensionError("joint information blocks have inconsistent shapes");
  }
  const double scale = std::max({max_abs(mm), max_abs(nn), max_abs(mn)});
  if (max_abs(nm - mn.transpose()) > kSymmetryTol * scale) {
    throw DimensionError("joint information blocks: I_nm must equal I_mn^T");
  }
}

InfoOperator schur_complement(const JointInfoBlocks& joint, double pinv_tol) {
  joint.validate();
  if (!(pinv_tol > 0.0)) throw DimensionError("schur_complement: pinv_tol must be positive");
  if (joint.nn.rows() == 0) return InfoOperator::from_dense(symmetrized(joint.mm));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(joint.nn));
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = pinv_tol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
  // I_mn I_nn^+ I_nm = sum over retained modes of (I_mn u)(I_mn u)^T / lambda
  Matrix reduction = Matrix::Zero(joint.mm.rows(), joint.mm.cols());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= cutoff || lambda(i) <= 0.0) continue;
    const Vector projected = joint.mn * eig.eigenvectors().col(i);
    reduction.noalias() += projected * projected.transpose() / lambda(i);
  }
  return InfoOperator::from_dense(symmetrized(joint.mm - reduction));
}

std::vector<EllipsoidAxis> ellipsoid_axes(const InfoOperator& op, double rel_tol) {
  const Matrix dense = op.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense);
  const Index n = dense.rows();
  const double lmax = n > 0 ? eig.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  std::vector<EllipsoidAxis> axes;
  axes.reserve(static_cast<std::size_t>(n));
  for (Index i = n - 1; i >= 0; --i) {
    EllipsoidAxis axis;
    axis.eigenvalue = eig.eigenvalues()(i);
    axis.direction = eig.eigenvectors().col(i);
    axis.bounded = axis.eigenvalue > rel_tol * lmax && axis.eigenvalue > 0.0;
    axis.length = axis.bounded ? 1.0 / std::sqrt(axis.eigenvalue)
                               : std::numeric_limits<double>::infinity();
    axes.push_back(std::move(axis));
  }
  return axes;
}

bool is_symmetric_psd(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  return eig.eigenvalues().minCoeff() >= -rel_tol * lmax;
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Vector sv;
  if (is_symmetric(m)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
    sv = eig.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<Matrix> svd(m);
    sv = svd.singularValues();
  }
  const double smax = sv.maxCoeff();
  if (smax == 0.0) return 0;
  return (sv.array() > rel_tol * smax).count();
}

}  // namespace infoop
