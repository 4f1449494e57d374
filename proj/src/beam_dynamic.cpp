#include "infoop/beam_dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "infoop/error.hpp"

namespace infoop::dynamic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAntiresonance = 1e-14;

double wavenumber(const DynamicSpec& spec, Index n) {
  return static_cast<double>(n) * kPi / spec.L;
}

Complex modal_denominator(const DynamicSpec& spec, Index n, double omega, double ei) {
  const double k = wavenumber(spec, n);
  const double stiff = ei * k * k * k * k;
  const Complex d(stiff - spec.rhoA * omega * omega, omega * spec.damping());
  if (std::abs(d) <= 1e-12 * stiff) {
    throw ResonanceError("frequency " + std::to_string(omega) + " hits the undamped resonance of mode " +
                         std::to_string(n));
  }
  return d;
}

// int_a^b cos(w x) dx
double int_cos(double w, double a, double b) {
  if (w == 0.0) return b - a;
  return (std::sin(w * b) - std::sin(w * a)) / w;
}

}  // namespace

double DynamicSpec::omega(Index n) const {
  const double k = static_cast<double>(n) * kPi / L;
  return k * k * std::sqrt(EI0 / rhoA);
}

double DynamicSpec::damping() const { return c_d >= 0.0 ? c_d : 2.0 * 0.01 * rhoA * omega(1); }

void DynamicSpec::validate() const {
  if (!(EI0 > 0.0)) throw ConfigError("EI0", "reference rigidity must be positive");
  if (!(rhoA > 0.0)) throw ConfigError("rhoA", "mass per length must be positive");
  if (!(L > 0.0)) throw ConfigError("L", "beam length must be positive");
  if (!(F_hat > 0.0)) throw ConfigError("F_hat", "force amplitude must be positive");
  if (!(sigma_log > 0.0)) throw ConfigError("sigma_log", "log-magnitude noise std must be positive");
  if (n_modes < 1) throw ConfigError("n_modes", "series truncation must be >= 1");
  if (n_elements < 1) throw ConfigError("n_elements", "element count must be >= 1");
  if (!(sensor >= 0.0 && sensor <= L)) throw ConfigError("sensor", "sensor lies outside the beam");
  for (double z : excitations) {
    if (!(z >= 0.0 && z <= L)) throw ConfigError("excitations", "excitation lies outside the beam");
  }
  for (double w : frequencies) {
    if (!(w > 0.0)) throw ConfigError("frequencies", "frequencies must be positive");
  }
}

std::vector<double> default_frequencies(const DynamicSpec& spec, Index n_freq) {
  if (n_freq < 1) throw ConfigError("n_frequencies", "need at least one frequency");
  const double lo = 0.5 * spec.omega(1);
  const double hi = 1.2 * spec.omega(3);
  std::vector<double> out;
  for (Index q = 0; q < n_freq; ++q) {
    const double t = n_freq == 1 ? 0.0 : static_cast<double>(q) / static_cast<double>(n_freq - 1);
    double w = lo * std::pow(hi / lo, t);
    if (spec.damping() == 0.0) {
      for (Index n = 1; n <= 4; ++n) {
        const double wn = spec.omega(n);
        if (std::abs(w - wn) <= 1e-3 * wn) w = wn * (w < wn ? 1.0 - 1.5e-3 : 1.0 + 1.5e-3);
      }
    }
    out.push_back(w);
  }
  return out;
}

namespace {

// Moment at x due to a unit load at a on the simply supported span.
double unit_moment(double x, double a, double L) {
  return x <= a ? x * (L - a) / L : a * (L - x) / L;
}

// int_lo^hi m(x; r) m(x; z) dx, exact: Simpson on pieces split at r and z.
double moment_product(double lo, double hi, double r, double z, double L) {
  double cuts[4] = {lo, hi, std::clamp(r, lo, hi), std::clamp(z, lo, hi)};
  std::sort(cuts, cuts + 4);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b);
    const auto f = [&](double x) { return unit_moment(x, r, L) * unit_moment(x, z, L); };
    total += (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
  }
  return total;
}

// int_lo^hi m(x; a) sin(k x) dx, m the unit-load moment (piecewise linear).
double moment_sine(double lo, double hi, double a, double k, double L) {
  const auto piece = [k](double x0, double x1, double alpha, double beta) {
    const auto f = [&](double x) {
      return -(alpha + beta * x) * std::cos(k * x) / k + beta * std::sin(k * x) / (k * k);
    };
    return f(x1) - f(x0);
  };
  double total = 0.0;
  const double cut = std::clamp(a, lo, hi);
  // x <= a: x (L - a) / L;  x >= a: a (L - x) / L
  if (cut > lo) total += piece(lo, cut, 0.0, (L - a) / L);
  if (hi > cut) total += piece(cut, hi, a, -a / L);
  return total;
}

// Geometry-only quantities are shared between models on the same grid.
struct GeometryKey {
  double L;
  Index modes;
  Index elements;
  double position;
  auto operator<=>(const GeometryKey&) const = default;
};

constexpr std::size_t kCacheLimit = 256;
std::mutex curvature_mutex;
std::map<GeometryKey, std::shared_ptr<const std::vector<Matrix>>> curvature_cache;
std::mutex projection_mutex;
std::map<GeometryKey, Matrix> projection_cache;

std::shared_ptr<const std::vector<Matrix>> curvature_matrices(const DynamicSpec& spec) {
  const GeometryKey key{spec.L, spec.n_modes, spec.n_elements, 0.0};
  const std::lock_guard<std::mutex> lock(curvature_mutex);
  const auto it = curvature_cache.find(key);
  if (it != curvature_cache.end()) return it->second;
  const Index n = spec.n_modes;
  const Index ne = spec.n_elements;
  const double h = spec.L / static_cast<double>(ne);
  auto out = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(ne), Matrix(n, n));
  for (Index e = 0; e < ne; ++e) {
    const double a = h * static_cast<double>(e);
    const double b = h * static_cast<double>(e + 1);
    Matrix& c = (*out)[static_cast<std::size_t>(e)];
    for (Index i = 0; i < n; ++i) {
      const double ki = wavenumber(spec, i + 1);
      for (Index j = 0; j <= i; ++j) {
        const double kj = wavenumber(spec, j + 1);
        const double s = 0.5 * (int_cos(ki - kj, a, b) - int_cos(ki + kj, a, b));
        c(i, j) = c(j, i) = ki * ki * kj * kj * (2.0 / spec.L) * s;
      }
    }
  }
  if (curvature_cache.size() >= kCacheLimit) curvature_cache.clear();
  curvature_cache.emplace(key, out);
  return out;
}

}  // namespace

Complex greens_function(const DynamicSpec& spec, double chi, double s, double omega) {
  const double a = std::min(chi, s), b = std::max(chi, s);
  // exact static flexibility plus the dynamic remainder of the modal series
  const double g0 = spec.L * spec.L * spec.L / spec.EI0 * a * (1.0 - b) * (2.0 * b - a * a - b * b) / 6.0;
  const Complex shift(spec.rhoA * omega * omega, -omega * spec.damping());
  Complex g(0.0, 0.0);
  for (Index n = 1; n <= spec.n_modes; ++n) {
    const double nn = static_cast<double>(n) * kPi;
    const double k = wavenumber(spec, n);
    const double stiff = spec.EI0 * k * k * k * k;
    g += std::sin(nn * chi) * std::sin(nn * s) * shift / (modal_denominator(spec, n, omega, spec.EI0) * stiff);
  }
  return g0 + g * (2.0 / spec.L);
}

Complex frf(const DynamicSpec& spec, double z, double omega) {
  return spec.F_hat * greens_function(spec, spec.sensor / spec.L, z / spec.L, omega);
}

RitzBeam::RitzBeam(const DynamicSpec& spec, Vector p) : spec_(spec), p_(std::move(p)) {
  spec_.validate();
  if (p_.size() == 0) p_ = Vector::Zero(spec_.n_elements);
  if (p_.size() != spec_.n_elements) {
    throw DimensionError("log-stiffness field must have one value per element");
  }
  uniform_ = (p_.array() == 0.0).all();
  curvature_ = curvature_matrices(spec_);
  stiffness_ = Matrix::Zero(spec_.n_modes, spec_.n_modes);
  for (Index e = 0; e < spec_.n_elements; ++e) {
    stiffness_ += spec_.EI0 * std::exp(p_(e)) * (*curvature_)[static_cast<std::size_t>(e)];
  }
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose());

  sensor_ = project(spec_.sensor);
  for (double z : spec_.excitations) {
    excitations_.push_back(project(z));
    products_.push_back(static_products(spec_.sensor, z));
    flexibility_.push_back(static_flexibility(spec_.sensor, z));
  }
}

RitzBeam::Projection RitzBeam::project(double a) const {
  Projection out{moment_projections(a), Vector()};
  out.coefficients = static_coefficients(out.moments);
  return out;
}

Matrix RitzBeam::moment_projections(double a) const {
  const GeometryKey key{spec_.L, spec_.n_modes, spec_.n_elements, a};
  {
    const std::lock_guard<std::mutex> lock(projection_mutex);
    const auto it = projection_cache.find(key);
    if (it != projection_cache.end()) return it->second;
  }
  const Index ne = spec_.n_elements;
  const Index n = spec_.n_modes;
  const double h = spec_.L / static_cast<double>(ne);
  const double norm = std::sqrt(2.0 / spec_.L);
  Matrix q(ne, n);
  for (Index m = 0; m < n; ++m) {
    const double k = wavenumber(spec_, m + 1);
    for (Index e = 0; e < ne; ++e) {
      q(e, m) = norm * moment_sine(h * static_cast<double>(e), h * static_cast<double>(e + 1), a, k, spec_.L) / (k * k);
    }
  }
  const std::lock_guard<std::mutex> lock(projection_mutex);
  if (projection_cache.size() >= kCacheLimit) projection_cache.clear();
  projection_cache.emplace(key, q);
  return q;
}

Vector RitzBeam::static_coefficients(const Matrix& projections) const {
  Vector flex(spec_.n_elements);
  for (Index e = 0; e < flex.size(); ++e) flex(e) = 1.0 / (spec_.EI0 * std::exp(p_(e)));
  return projections.transpose() * flex;
}

Eigen::MatrixXcd RitzBeam::solve(double omega, const Eigen::MatrixXcd& rhs) const {
  const Index n = spec_.n_modes;
  if (uniform_) {
    Eigen::VectorXcd inv(n);
    for (Index i = 0; i < n; ++i) inv(i) = 1.0 / modal_denominator(spec_, i + 1, omega, spec_.EI0);
    return inv.asDiagonal() * rhs;
  }
  Eigen::MatrixXcd a = stiffness_.cast<Complex>();
  for (Index i = 0; i < n; ++i) {
    a(i, i) += Complex(-spec_.rhoA * omega * omega, omega * spec_.damping());
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  if (!(lu.rcond() > 1e-14)) {
    throw ResonanceError("frequency " + std::to_string(omega) + " is at a resonance of the Ritz model");
  }
  return lu.solve(rhs);
}

Vector RitzBeam::static_products(double r, double z) const {
  const Index ne = spec_.n_elements;
  const double h = spec_.L / static_cast<double>(ne);
  Vector out(ne);
  for (Index e = 0; e < ne; ++e) {
    out(e) = moment_product(h * static_cast<double>(e), h * static_cast<double>(e + 1), r, z, spec_.L);
  }
  return out;
}

double RitzBeam::static_flexibility(double r, double z) const {
  const Vector prod = static_products(r, z);
  double acc = 0.0;
  for (Index e = 0; e < prod.size(); ++e) acc += prod(e) / (spec_.EI0 * std::exp(p_(e)));
  return acc;
}

Complex RitzBeam::shift(double omega) const { return {spec_.rhoA * omega * omega, -omega * spec_.damping()}; }

Complex RitzBeam::frf(double z, double omega) const {
  const Projection pz = project(z);
  const Complex s = shift(omega);
  const Eigen::VectorXcd delta = solve(omega, s * pz.coefficients.cast<Complex>());
  const Eigen::VectorXcd u_z = pz.coefficients.cast<Complex>() + delta;
  return spec_.F_hat *
         (static_flexibility(spec_.sensor, z) + s * sensor_.coefficients.cast<Complex>().cwiseProduct(u_z).sum());
}

Eigen::MatrixXcd RitzBeam::remainders(double omega, bool with_sensor) const {
  const Index nk = static_cast<Index>(excitations_.size());
  const Index offset = with_sensor ? 1 : 0;
  Eigen::MatrixXcd rhs(spec_.n_modes, nk + offset);
  if (with_sensor) rhs.col(0) = sensor_.coefficients.cast<Complex>();
  for (Index k = 0; k < nk; ++k) {
    rhs.col(k + offset) = excitations_[static_cast<std::size_t>(k)].coefficients.cast<Complex>();
  }
  return solve(omega, shift(omega) * rhs);
}

std::vector<Complex> RitzBeam::values(double omega) const {
  const Complex s = shift(omega);
  const Eigen::MatrixXcd d = remainders(omega, false);
  const Eigen::VectorXcd g_r = sensor_.coefficients.cast<Complex>();
  std::vector<Complex> out;
  for (std::size_t k = 0; k < excitations_.size(); ++k) {
    const Eigen::VectorXcd u_z = excitations_[k].coefficients.cast<Complex>() + d.col(static_cast<Index>(k));
    out.push_back(spec_.F_hat * (flexibility_[k] + s * g_r.cwiseProduct(u_z).sum()));
  }
  return out;
}

std::vector<RitzBeam::Row> RitzBeam::rows(double omega) const {
  // H = w0(r; z) + s g_r^T (g_z + delta_z), delta = s A^-1 g, with g the exact
  // sine projections of the static deflections.
  const Index ne = spec_.n_elements;
  const Complex s = shift(omega);
  const Eigen::MatrixXcd d = remainders(omega, true);
  const Eigen::VectorXcd d_r = d.col(0);
  const Eigen::VectorXcd u_r = sensor_.coefficients.cast<Complex>() + d_r;
  // C_e d_r for every element; C_e is real, so split the complex vector
  Matrix parts(spec_.n_modes, 2);
  parts << d_r.real(), d_r.imag();
  std::vector<Eigen::VectorXcd> curved(static_cast<std::size_t>(ne));
  for (Index e = 0; e < ne; ++e) {
    const Matrix y = (*curvature_)[static_cast<std::size_t>(e)] * parts;
    curved[static_cast<std::size_t>(e)] = y.col(0).cast<Complex>() + Complex(0.0, 1.0) * y.col(1).cast<Complex>();
  }
  std::vector<Row> out;
  out.reserve(excitations_.size());
  for (std::size_t k = 0; k < excitations_.size(); ++k) {
    const Projection& pz = excitations_[k];
    const Eigen::VectorXcd d_z = d.col(static_cast<Index>(k) + 1);
    const Eigen::VectorXcd u_z = pz.coefficients.cast<Complex>() + d_z;
    const Vector& prod = products_[k];
    // bilinear, not Hermitian: no conjugation
    const Eigen::VectorXcd cross = sensor_.moments.cast<Complex>() * u_z + pz.moments.cast<Complex>() * u_r;
    Eigen::VectorXcd dh(ne);
    for (Index e = 0; e < ne; ++e) {
      const double ei = spec_.EI0 * std::exp(p_(e));
      const Complex dyn = curved[static_cast<std::size_t>(e)].cwiseProduct(d_z).sum();
      dh(e) = -(prod(e) + s * cross(e)) / ei - ei * dyn;
    }
    Row row{Vector(ne), spec_.F_hat * (flexibility_[k] + s * sensor_.coefficients.cast<Complex>().cwiseProduct(u_z).sum())};
    for (Index e = 0; e < ne; ++e) row.sensitivity(e) = std::real(spec_.F_hat * dh(e) / row.value);
    out.push_back(std::move(row));
  }
  return out;
}

Vector log_frf_sensitivity(const DynamicSpec& spec, double z, double omega) {
  DynamicSpec single = spec;
  single.excitations = {z};
  return RitzBeam(single, Vector()).rows(omega).front().sensitivity;
}

namespace {

struct Evaluated {
  Matrix rows;
  Vector log_magnitude;
  Vector magnitude;
};

Evaluated evaluate(const DynamicSpec& spec, const Vector& p) {
  const RitzBeam beam(spec, p);
  const Index nk = static_cast<Index>(spec.excitations.size());
  const Index nq = static_cast<Index>(spec.frequencies.size());
  Evaluated ev{Matrix(nk * nq, spec.n_elements), Vector(nk * nq), Vector(nk * nq)};
  for (Index q = 0; q < nq; ++q) {
    const auto rows = beam.rows(spec.frequencies[static_cast<std::size_t>(q)]);
    for (Index k = 0; k < nk; ++k) {
      const Index r = k * nq + q;
      const auto& row = rows[static_cast<std::size_t>(k)];
      ev.rows.row(r) = row.sensitivity.transpose();
      ev.magnitude(r) = std::abs(row.value);
      ev.log_magnitude(r) = std::log(ev.magnitude(r));
    }
  }
  return ev;
}

std::vector<bool> antiresonance_mask(const Vector& magnitude) {
  std::vector<bool> keep(static_cast<std::size_t>(magnitude.size()), true);
  if (magnitude.size() == 0) return keep;
  const double cutoff = kAntiresonance * magnitude.maxCoeff();
  for (Index i = 0; i < magnitude.size(); ++i) keep[static_cast<std::size_t>(i)] = magnitude(i) > cutoff;
  return keep;
}

}  // namespace

DynamicBlock dynamic_jacobian(const DynamicSpec& spec, const Vector& p, const std::vector<bool>& mask) {
  const Evaluated ev = evaluate(spec, p);
  std::vector<bool> keep = mask.empty() ? antiresonance_mask(ev.magnitude) : mask;
  if (static_cast<Index>(keep.size()) != ev.rows.rows()) {
    throw DimensionError("dynamic row mask has the wrong length");
  }
  const Index kept = static_cast<Index>(std::count(keep.begin(), keep.end(), true));
  Matrix j(kept, spec.n_elements);
  Vector logs(kept);
  Index out = 0;
  for (Index r = 0; r < ev.rows.rows(); ++r) {
    if (!keep[static_cast<std::size_t>(r)]) continue;
    j.row(out) = ev.rows.row(r);
    logs(out) = ev.log_magnitude(r);
    ++out;
  }
  ObservationBlock block(std::move(j), NoiseCovariance::isotropic(kept, spec.sigma_log * spec.sigma_log),
                         "dynamic");
  return {std::move(block), std::move(logs), std::move(keep)};
}

Vector dynamic_log_frf(const DynamicSpec& spec, const Vector& p) {
  const RitzBeam beam(spec, p);
  const Index nk = static_cast<Index>(spec.excitations.size());
  const Index nq = static_cast<Index>(spec.frequencies.size());
  Vector out(nk * nq);
  for (Index q = 0; q < nq; ++q) {
    const auto h = beam.values(spec.frequencies[static_cast<std::size_t>(q)]);
    for (Index k = 0; k < nk; ++k) out(k * nq + q) = std::log(std::abs(h[static_cast<std::size_t>(k)]));
  }
  return out;
}

Vector dynamic_info_density(const DynamicSpec& spec, const Vector& p) {
  if (spec.frequencies.empty() || spec.excitations.empty()) {
    spec.validate();
    return Vector::Zero(spec.n_elements);
  }
  const DynamicBlock db = dynamic_jacobian(spec, p);
  const Matrix& j = db.block.jacobian();
  return j.cwiseAbs2().colwise().sum().transpose() / (spec.sigma_log * spec.sigma_log);
}

}  // namespace infoop::dynamic
