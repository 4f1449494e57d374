#include "infoop/beam_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "infoop/error.hpp"

namespace infoop::beam {

namespace {

constexpr double kPi = std::numbers::pi;

// int_a^b cos(k pi s) ds
double int_cos(Index k, double a, double b) {
  if (k == 0) return b - a;
  const double w = static_cast<double>(k) * kPi;
  return (std::sin(w * b) - std::sin(w * a)) / w;
}

// int_a^b s cos(k pi s) ds
double int_s_cos(Index k, double a, double b) {
  if (k == 0) return 0.5 * (b * b - a * a);
  const double w = static_cast<double>(k) * kPi;
  const auto f = [w](double s) { return s * std::sin(w * s) / w + std::cos(w * s) / (w * w); };
  return f(b) - f(a);
}

// int_0^a t^2 cos(k pi t) dt
double int_t2_cos(Index k, double a) {
  if (k == 0) return a * a * a / 3.0;
  const double w = static_cast<double>(k) * kPi;
  const double sn = std::sin(w * a);
  const double cs = std::cos(w * a);
  return a * a * sn / w + 2.0 * a * cs / (w * w) - 2.0 * sn / (w * w * w);
}

void check_unit(double s, const char* name) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DimensionError(std::string(name) + " must lie in [0, 1], got " + std::to_string(s));
  }
}

}  // namespace

void BeamSpec::validate() const {
  if (!(L > 0.0)) throw ConfigError("L", "beam length must be positive");
  if (!(P > 0.0)) throw ConfigError("P", "load magnitude must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "rotation noise std must be positive");
  if (!(EI0 > 0.0)) throw ConfigError("EI0", "reference rigidity must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "sensor position must lie in (0, 1)");
}

OneSided mu(double rho, double s) {
  check_unit(s, "s");
  if (s < rho) return {mu_left(s), mu_left(s), false};
  if (s > rho) return {mu_right(s), mu_right(s), false};
  return {mu_left(s), mu_right(s), true};
}

double mu_value(double rho, double s) noexcept { return s < rho ? mu_left(s) : mu_right(s); }

double moment_influence(double s, double zeta) noexcept {
  return std::min(s, zeta) * (1.0 - std::max(s, zeta));
}

double moment_product_integral(double s, double sbar) noexcept {
  const double a = std::min(s, sbar);
  const double b = std::max(s, sbar);
  return a * (1.0 - b) * (2.0 * b - a * a - b * b) / 6.0;
}

double kappa_v(const BeamSpec& spec) {
  return spec.P * spec.P * spec.L * spec.L * spec.L / (3.0 * spec.sigma * spec.sigma);
}

double full_kernel(const BeamSpec& spec, double s, double sbar) {
  const double scale = spec.P * spec.P * spec.L * spec.L * spec.L / (spec.sigma * spec.sigma);
  const double a = std::min(s, sbar);
  const double b = std::max(s, sbar);
  return scale * mu_value(spec.rho, a) * mu_value(spec.rho, b) * moment_product_integral(a, b);
}

double normalized_density(double rho, double s) {
  check_unit(s, "s");
  const double m = mu_value(rho, s);
  const double q = s * (1.0 - s);
  return m * m * q * q;
}

OneSided diag_density(const BeamSpec& spec, double s) {
  const OneSided m = mu(spec.rho, s);
  const double q = s * (1.0 - s);
  const double k = kappa_v(spec);
  return {k * m.left * m.left * q * q, k * m.right * m.right * q * q, m.at_jump};
}

double jump_ratio(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "sensor position must lie in (0, 1)");
  return (1.0 - rho) * (1.0 - rho) / (rho * rho);
}

double ei_kernel(const BeamSpec& spec, const ComplianceField& v, double s, double sbar) {
  const double vs = v(s);
  const double vb = v(sbar);
  if (!(vs > 0.0) || !(vb > 0.0)) throw DimensionError("compliance field must be positive");
  return vs * vs * full_kernel(spec, s, sbar) * vb * vb;
}

Matrix influence_matrix(double rho, Index n) {
  if (n < 1) throw DimensionError("influence_matrix: n must be >= 1");
  Matrix b(n, n);
  for (Index i = 1; i <= n; ++i) {
    for (Index m = 1; m <= i; ++m) {
      const Index dk = i - m;
      const Index sk = i + m;
      // mu(s) = -s + H(s - rho); 2 sin sin = cos(dk) - cos(sk)
      const double ramp = int_s_cos(dk, 0.0, 1.0) - int_s_cos(sk, 0.0, 1.0);
      const double step = int_cos(dk, rho, 1.0) - int_cos(sk, rho, 1.0);
      b(i - 1, m - 1) = b(m - 1, i - 1) = step - ramp;
    }
  }
  return b;
}

Matrix weighted_gram(double rho, Index n, bool unweighted) {
  if (n < 1) throw DimensionError("weighted_gram: n must be >= 1");
  if (unweighted) return Matrix::Identity(n, n);
  Matrix c(n, n);
  for (Index i = 1; i <= n; ++i) {
    for (Index m = 1; m <= i; ++m) {
      const Index dk = i - m;
      const Index sk = i + m;
      const double sign = (sk % 2 == 0) ? 1.0 : -1.0;
      // s^2 on [0, rho); (1-s)^2 on (rho, 1], reflected through t = 1 - s
      const double left = int_t2_cos(dk, rho) - int_t2_cos(sk, rho);
      const double right = sign * (int_t2_cos(dk, 1.0 - rho) - int_t2_cos(sk, 1.0 - rho));
      c(i - 1, m - 1) = c(m - 1, i - 1) = left + right;
    }
  }
  return c;
}

namespace {

Vector sine_scales(const BeamSpec& spec, Index n) {
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    const double g = spec.L / (static_cast<double>(i + 1) * kPi);
    d(i) = (spec.P / spec.sigma) * g * g;
  }
  return d;
}

}  // namespace

Matrix galerkin_truncated(const BeamSpec& spec, Index n) {
  spec.validate();
  const Matrix b = influence_matrix(spec.rho, n);
  const Vector d = sine_scales(spec, n);
  const Matrix bd = b * d.asDiagonal();
  Matrix t = bd * bd.transpose();
  return 0.5 * (t + t.transpose());
}

ModeSet galerkin_modes(const BeamSpec& spec, Index n_series, Index k, bool unweighted) {
  spec.validate();
  if (k < 1 || n_series < k) throw DimensionError("galerkin_modes: need 1 <= k <= n_series");
  const Vector d = sine_scales(spec, n_series);
  Matrix a = d.asDiagonal() * weighted_gram(spec.rho, n_series, unweighted) * d.asDiagonal();
  a = 0.5 * (a + a.transpose());
  return sym_eig(InfoOperator::from_dense(std::move(a)), k);
}

Matrix galerkin_mode_shapes(const BeamSpec& spec, const ModeSet& modes, const Vector& s,
                            bool unweighted) {
  const Index n = modes.dim();
  const Vector d = sine_scales(spec, n);
  const double norm = std::sqrt(2.0 / spec.L);
  Matrix basis(s.size(), n);
  for (Index p = 0; p < s.size(); ++p) {
    const double w = unweighted ? 1.0 : mu_value(spec.rho, s(p));
    for (Index i = 0; i < n; ++i) {
      basis(p, i) = w * norm * std::sin(static_cast<double>(i + 1) * kPi * s(p)) * d(i);
    }
  }
  Matrix shapes = basis * modes.modes;
  for (Index c = 0; c < shapes.cols(); ++c) shapes.col(c) /= std::sqrt(modes.eigenvalues(c));
  return shapes;
}

Vector midpoint_grid(Index n) {
  if (n < 1) throw DimensionError("grid size must be >= 1");
  Vector s(n);
  for (Index i = 0; i < n; ++i) s(i) = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return s;
}

Matrix kernel_grid(const BeamSpec& spec, Index n) {
  spec.validate();
  const Vector s = midpoint_grid(n);
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = full_kernel(spec, s(i), s(j));
  }
  return k;
}

}  // namespace infoop::beam
