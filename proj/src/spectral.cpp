#include "infoop/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "infoop/error.hpp"
#include "infoop/prior.hpp"
#include "infoop/random.hpp"

namespace infoop {
namespace {

void require_count(Index k, Index n, const char* what) {
  if (k < 1 || k > n) {
    throw DimensionError(std::string(what) + ": requested " + std::to_string(k) +
                         " modes for an operator of dimension " + std::to_string(n));
  }
}

Matrix apply_columns(const InfoOperator& op, const Matrix& x) {
  if (op.is_dense()) return op.dense() * x;
  Matrix out(op.dim(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = op.apply(x.col(j));
  return out;
}

Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

// Leading k eigenpairs of a symmetric matrix, descending.
void leading_eigenpairs(const Matrix& sym, Index k, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()));
  if (eig.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge");
  const Index n = sym.rows();
  values.resize(k);
  vectors.resize(n, k);
  for (Index i = 0; i < k; ++i) {
    values(i) = eig.eigenvalues()(n - 1 - i);
    vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
}

Index argmax_abs(const Eigen::Ref<const Vector>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::euclidean:
      return "euclidean";
    case Metric::mass:
      return "mass";
    case Metric::prior:
      return "prior";
  }
  return "euclidean";
}

Metric metric_from_string(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "mass") return Metric::mass;
  if (name == "prior") return Metric::prior;
  throw ConfigError("metric", "unknown metric '" + std::string(name) +
                                  "' (expected euclidean, mass or prior)");
}

void fix_mode_signs(Matrix& modes) {
  for (Index j = 0; j < modes.cols(); ++j) {
    if (modes.rows() == 0) break;
    if (modes(argmax_abs(modes.col(j)), j) < 0.0) modes.col(j) *= -1.0;
  }
}

ModeSet sym_eig(const InfoOperator& op, Index k) {
  require_count(k, op.dim(), "sym_eig");
  const Matrix dense = op.to_dense();
  ModeSet out;
  out.metric = Metric::euclidean;
  leading_eigenpairs(dense, k, out.eigenvalues, out.modes);
  fix_mode_signs(out.modes);
  out.residual_norms.resize(k);
  for (Index i = 0; i < k; ++i) {
    out.residual_norms(i) =
        (dense * out.modes.col(i) - out.eigenvalues(i) * out.modes.col(i)).norm();
  }
  return out;
}

ModeSet mass_weighted_eig(const InfoOperator& op, const Matrix& mass, Index k) {
  const Index n = op.dim();
  require_count(k, n, "mass_weighted_eig");
  if (mass.rows() != n || mass.cols() != n) {
    throw DimensionError("mass_weighted_eig: mass matrix must be " + std::to_string(n) + " x " +
                         std::to_string(n));
  }
  if (!mass.allFinite() || (mass - mass.transpose()).cwiseAbs().maxCoeff() >
                               1e-12 * mass.cwiseAbs().maxCoeff()) {
    throw MetricError("mass matrix must be finite and symmetric");
  }
  Eigen::LLT<Matrix> llt(0.5 * (mass + mass.transpose()));
  if (llt.info() != Eigen::Success) throw MetricError("mass matrix is not positive definite");

  const Matrix dense = op.to_dense();
  const auto lower = llt.matrixL();
  const Matrix half = lower.solve(dense);                       // L^{-1} I
  const Matrix whitened = lower.solve(half.transpose());        // L^{-1} I L^{-T}

  ModeSet out;
  out.metric = Metric::mass;
  Matrix y;
  leading_eigenpairs(whitened, k, out.eigenvalues, y);
  out.modes = llt.matrixU().solve(y);  // L^{-T} y
  fix_mode_signs(out.modes);
  out.residual_norms.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Vector c = out.modes.col(i);
    out.residual_norms(i) = (dense * c - out.eigenvalues(i) * (mass * c)).norm();
  }
  return out;
}

ModeSet prior_preconditioned_eig(const InfoOperator& op, const PriorModel& prior, Index k) {
  const Index n = op.dim();
  require_count(k, n, "prior_preconditioned_eig");
  if (prior.dim() != n) {
    throw DimensionError("prior_preconditioned_eig: prior dimension " +
                         std::to_string(prior.dim()) + " does not match operator dimension " +
                         std::to_string(n));
  }
  const Matrix& s = prior.cov_sqrt();
  const Matrix h = s * apply_columns(op, s);

  ModeSet out;
  out.metric = Metric::prior;
  leading_eigenpairs(h, k, out.eigenvalues, out.whitened_modes);
  out.modes = s * out.whitened_modes;
  for (Index j = 0; j < k; ++j) {
    if (out.modes(argmax_abs(out.modes.col(j)), j) < 0.0) {
      out.modes.col(j) *= -1.0;
      out.whitened_modes.col(j) *= -1.0;
    }
  }
  out.residual_norms.resize(k);
  const Matrix hs = 0.5 * (h + h.transpose());
  for (Index i = 0; i < k; ++i) {
    const Vector w = out.whitened_modes.col(i);
    out.residual_norms(i) = (hs * w - out.eigenvalues(i) * w).norm();
  }
  return out;
}

ModeSet randomized_eig(const InfoOperator& op, Index k, const RandomizedOptions& options) {
  const Index n = op.dim();
  require_count(k, n, "randomized_eig");
  if (options.oversample < 0 || options.power_iters < 0) {
    throw DimensionError("randomized_eig: oversample and power_iters must be nonnegative");
  }
  const Index width = k + options.oversample;
  if (width > n) {
    throw DimensionError("randomized_eig: k + oversample = " + std::to_string(width) +
                         " exceeds dimension " + std::to_string(n));
  }

  Rng rng(options.seed);
  Matrix basis = orthonormal_basis(apply_columns(op, rng.normal_matrix(n, width)));
  for (Index it = 0; it < options.power_iters; ++it) {
    basis = orthonormal_basis(apply_columns(op, basis));
  }
  const Matrix image = apply_columns(op, basis);
  const Matrix projected = basis.transpose() * image;

  ModeSet out;
  out.metric = Metric::euclidean;
  Matrix small;
  leading_eigenpairs(projected, k, out.eigenvalues, small);
  out.modes = basis * small;
  fix_mode_signs(out.modes);
  out.residual_norms.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Vector u = out.modes.col(i);
    out.residual_norms(i) = (op.apply(u) - out.eigenvalues(i) * u).norm();
  }
  return out;
}

DiagonalEstimate estimate_diag(const InfoOperator& op, Index n_probes, std::uint64_t seed) {
  if (n_probes < 1) throw DimensionError("estimate_diag: at least one probe is required");
  const Index n = op.dim();
  Rng rng(seed);
  Vector mean = Vector::Zero(n);
  Vector m2 = Vector::Zero(n);
  Vector z(n);
  for (Index p = 0; p < n_probes; ++p) {
    for (Index i = 0; i < n; ++i) z(i) = rng.rademacher();
    const Vector sample = z.cwiseProduct(op.apply(z));
    const Vector delta = sample - mean;
    mean += delta / static_cast<double>(p + 1);
    m2 += delta.cwiseProduct(sample - mean);
  }
  DiagonalEstimate out;
  out.mean = std::move(mean);
  out.probes = n_probes;
  if (n_probes > 1) {
    const double denom = static_cast<double>(n_probes - 1) * static_cast<double>(n_probes);
    out.std_error = (m2 / denom).cwiseMax(0.0).cwiseSqrt();
  } else {
    out.std_error = Vector::Zero(n);
  }
  return out;
}

}  // namespace infoop
