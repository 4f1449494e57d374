#include "infoop/damage2d.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "infoop/error.hpp"
#include "infoop/parallel.hpp"
#include "infoop/random.hpp"

namespace infoop::damage2d {

std::string to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::strain_xx:
      return "strain_xx";
    case SensorKind::displacement_y:
      return "displacement_y";
    case SensorKind::slope_y:
      return "slope_y";
  }
  return "strain_xx";
}

SensorKind sensor_kind_from_string(const std::string& name) {
  if (name == "strain_xx") return SensorKind::strain_xx;
  if (name == "displacement_y") return SensorKind::displacement_y;
  if (name == "slope_y") return SensorKind::slope_y;
  throw ConfigError("sensors", "unknown sensor kind '" + name + "'");
}

namespace {

using Sparse = Eigen::SparseMatrix<double>;

Damage2DConfig layout(Index nx, Index ny) {
  Damage2DConfig c;
  c.nx = nx;
  c.ny = ny;
  const double len = c.length;
  const double h = c.height;
  for (int i = 0; i < 14; ++i) c.sensors.push_back({SensorKind::strain_xx, len * (i + 1) / 15.0, 0.1 * h});
  for (double f : {0.25, 0.5, 0.75}) c.sensors.push_back({SensorKind::displacement_y, f * len, 0.0});
  for (double f : {0.1, 0.35, 0.9}) c.sensors.push_back({SensorKind::slope_y, f * len, 0.5 * h});
  for (int k = 0; k < 8; ++k) c.load_positions.push_back(len * (k + 1) / 9.0);
  return c;
}

// Bilinear shape functions on [-1, 1]^2; local nodes BL, BR, TR, TL.
constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

Matrix unit_element(double hx, double hy, double nu, double t) {
  Matrix d(3, 3);
  d << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
  d /= (1.0 - nu * nu);
  const double g = 1.0 / std::sqrt(3.0);
  Matrix k = Matrix::Zero(8, 8);
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      Matrix b = Matrix::Zero(3, 8);
      for (int i = 0; i < 4; ++i) {
        const double dx = kXi[i] * (1.0 + eta * kEta[i]) / (2.0 * hx);
        const double dy = kEta[i] * (1.0 + xi * kXi[i]) / (2.0 * hy);
        b(0, 2 * i) = dx;
        b(1, 2 * i + 1) = dy;
        b(2, 2 * i) = dy;
        b(2, 2 * i + 1) = dx;
      }
      k += b.transpose() * d * b * (0.25 * hx * hy * t);
    }
  }
  return k;
}

}  // namespace

Damage2DConfig Damage2DConfig::full_scale() { return layout(81, 17); }

Damage2DConfig Damage2DConfig::test_scale() { return layout(41, 9); }

Vector Damage2DConfig::cell_centers_x() const {
  Vector x(n_cells());
  const double hx = length / static_cast<double>(nx);
  for (Index r = 0; r < ny; ++r) {
    for (Index c = 0; c < nx; ++c) x(r * nx + c) = (static_cast<double>(c) + 0.5) * hx;
  }
  return x;
}

Vector Damage2DConfig::cell_centers_y() const {
  Vector y(n_cells());
  const double hy = height / static_cast<double>(ny);
  for (Index r = 0; r < ny; ++r) {
    for (Index c = 0; c < nx; ++c) y(r * nx + c) = (static_cast<double>(r) + 0.5) * hy;
  }
  return y;
}

Vector Damage2DConfig::true_field() const {
  const Vector x = cell_centers_x();
  const Vector y = cell_centers_y();
  Vector d(n_cells());
  for (Index i = 0; i < d.size(); ++i) {
    const double u = (x(i) - damage.x) / damage.sx;
    const double v = (y(i) - damage.y) / damage.sy;
    d(i) = damage.peak * std::exp(-0.5 * (u * u + v * v));
  }
  return clamp_field(d, clamp_lo, clamp_hi);
}

void Damage2DConfig::validate() const {
  if (nx < 2 || ny < 1) throw ConfigError("grid", "need at least 2 x 1 cells");
  if (!(length > 0.0) || !(height > 0.0)) throw ConfigError("grid", "domain size must be positive");
  if (!(E0 > 0.0)) throw ConfigError("E0", "modulus must be positive");
  if (!(poisson > -1.0 && poisson < 0.5)) throw ConfigError("poisson", "must lie in (-1, 0.5)");
  if (!(thickness > 0.0)) throw ConfigError("thickness", "must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("kappa", "floor must lie in (0, 1)");
  if (sensors.empty()) throw ConfigError("sensors", "need at least one sensor");
  for (const Sensor& s : sensors) {
    if (!(s.x >= 0.0 && s.x <= length && s.y >= 0.0 && s.y <= height)) {
      throw ConfigError("sensors", "sensor outside the domain");
    }
  }
  if (load_positions.empty()) throw ConfigError("loads", "need at least one load case");
  for (double x : load_positions) {
    if (!(x >= 0.0 && x <= length)) throw ConfigError("loads", "load position outside the span");
  }
  if (!(load_width > 0.0)) throw ConfigError("load_width", "must be positive");
  if (!(sigma_strain > 0.0)) throw ConfigError("sigma_strain", "must be positive");
  if (!(sigma_displacement > 0.0)) throw ConfigError("sigma_displacement", "must be positive");
  if (!(sigma_slope > 0.0)) throw ConfigError("sigma_slope", "must be positive");
  if (k < 1) throw ConfigError("k", "need at least one retained mode");
  if (!(clamp_lo < clamp_hi)) throw ConfigError("clamp", "lower bound must be below the upper bound");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step", "must be positive");
  if (!(penalty >= 0.0)) throw ConfigError("penalty", "must be nonnegative");
}

Vector clamp_field(const Vector& d, double lo, double hi) { return d.cwiseMax(lo).cwiseMin(hi); }

PlaneStressModel::PlaneStressModel(Damage2DConfig config) : config_(std::move(config)) {
  config_.validate();
  const Index nx = config_.nx;
  const Index ny = config_.ny;
  const double hx = config_.length / static_cast<double>(nx);
  const double hy = config_.height / static_cast<double>(ny);
  unit_element_ = unit_element(hx, hy, config_.poisson, config_.thickness);

  // pin at the bottom-left node, roller at the bottom-right node
  free_map_.assign(static_cast<std::size_t>(n_dofs()), 0);
  free_map_[0] = -1;
  free_map_[1] = -1;
  free_map_[static_cast<std::size_t>(2 * nx + 1)] = -1;
  for (auto& f : free_map_) {
    if (f == 0) f = n_free_++;
  }

  const auto cell_dofs = [&](Index r, Index c) {
    const Index bl = r * (nx + 1) + c;
    const std::array<Index, 4> nodes{bl, bl + 1, bl + nx + 2, bl + nx + 1};
    std::array<Index, 8> dofs{};
    for (int i = 0; i < 4; ++i) {
      dofs[2 * i] = 2 * nodes[i];
      dofs[2 * i + 1] = 2 * nodes[i] + 1;
    }
    return dofs;
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(config_.n_cells() * 36));
  for (Index r = 0; r < ny; ++r) {
    for (Index c = 0; c < nx; ++c) {
      const auto dofs = cell_dofs(r, c);
      for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
          const Index i = free_map_[static_cast<std::size_t>(dofs[a])];
          const Index j = free_map_[static_cast<std::size_t>(dofs[b])];
          if (i >= 0 && j >= 0 && i >= j) trip.emplace_back(i, j, 1.0);
        }
      }
    }
  }
  pattern_.resize(n_free_, n_free_);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();

  scatter_.resize(static_cast<std::size_t>(config_.n_cells()));
  for (Index r = 0; r < ny; ++r) {
    for (Index c = 0; c < nx; ++c) {
      const auto dofs = cell_dofs(r, c);
      auto& slots = scatter_[static_cast<std::size_t>(r * nx + c)];
      for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
          const Index i = free_map_[static_cast<std::size_t>(dofs[a])];
          const Index j = free_map_[static_cast<std::size_t>(dofs[b])];
          Index slot = -1;
          if (i >= 0 && j >= 0 && i >= j) {
            const auto* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[j];
            const auto* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[j + 1];
            slot = static_cast<Index>(std::lower_bound(begin, end, static_cast<int>(i)) - pattern_.innerIndexPtr());
          }
          slots[static_cast<std::size_t>(8 * a + b)] = slot;
        }
      }
    }
  }

  // top traction patches, integrated exactly against the edge hat functions
  for (double center : config_.load_positions) {
    Vector f = Vector::Zero(n_dofs());
    const double a = std::max(0.0, center - 0.5 * config_.load_width);
    const double b = std::min(config_.length, center + 0.5 * config_.load_width);
    const double q = -config_.load / (b - a);
    const Index top = ny * (nx + 1);
    for (Index i = 0; i < nx; ++i) {
      const double x0 = hx * static_cast<double>(i);
      const double x1 = x0 + hx;
      const double lo = std::max(a, x0);
      const double hi = std::min(b, x1);
      if (hi <= lo) continue;
      const double len = hi - lo;
      const double half_sq = 0.5 * (hi * hi - lo * lo);
      f(2 * (top + i) + 1) += q * (x1 * len - half_sq) / hx;
      f(2 * (top + i + 1) + 1) += q * (half_sq - x0 * len) / hx;
    }
    loads_.push_back(std::move(f));
  }

  for (const Sensor& s : config_.sensors) {
    const Index c = std::clamp<Index>(static_cast<Index>(std::floor(s.x / hx)), 0, nx - 1);
    const Index r = std::clamp<Index>(static_cast<Index>(std::floor(s.y / hy)), 0, ny - 1);
    const double xi = 2.0 * (s.x - hx * static_cast<double>(c)) / hx - 1.0;
    const double eta = 2.0 * (s.y - hy * static_cast<double>(r)) / hy - 1.0;
    const auto dofs = cell_dofs(r, c);
    Probe p{};
    for (int i = 0; i < 4; ++i) {
      const double n = 0.25 * (1.0 + xi * kXi[i]) * (1.0 + eta * kEta[i]);
      const double dndx = kXi[i] * (1.0 + eta * kEta[i]) / (2.0 * hx);
      switch (s.kind) {
        case SensorKind::strain_xx:
          p.dofs[i] = dofs[2 * i];
          p.weight[i] = dndx;
          break;
        case SensorKind::displacement_y:
          p.dofs[i] = dofs[2 * i + 1];
          p.weight[i] = n;
          break;
        case SensorKind::slope_y:
          p.dofs[i] = dofs[2 * i + 1];
          p.weight[i] = dndx;
          break;
      }
    }
    probes_.push_back(p);
  }
}

Vector PlaneStressModel::modulus(const Vector& d) const {
  if (d.size() != config_.n_cells()) throw DimensionError("damage field must have one value per cell");
  const double k = config_.kappa;
  return config_.E0 * (k + (1.0 - k) * (1.0 - d.array())).matrix();
}

Sparse PlaneStressModel::stiffness(const Vector& d) const {
  const Vector e = modulus(d);
  if (!(e.array() > 0.0).all()) throw SolverError("cell modulus is not positive; damage exceeds the floor");
  Sparse k = pattern_;
  std::fill(k.valuePtr(), k.valuePtr() + k.nonZeros(), 0.0);
  double* values = k.valuePtr();
  for (Index c = 0; c < e.size(); ++c) {
    const auto& slots = scatter_[static_cast<std::size_t>(c)];
    for (int a = 0; a < 64; ++a) {
      const Index s = slots[static_cast<std::size_t>(a)];
      if (s >= 0) values[s] += e(c) * unit_element_(a / 8, a % 8);
    }
  }
  return k;
}

std::vector<Vector> PlaneStressModel::solve(const Vector& d) const {
  const Sparse k = stiffness(d);
  const Eigen::SimplicialLLT<Sparse, Eigen::Lower> llt(k);
  if (llt.info() != Eigen::Success) throw SolverError("plane-stress stiffness is singular");
  std::vector<Vector> out;
  out.reserve(loads_.size());
  for (const Vector& f : loads_) {
    Vector reduced(n_free_);
    for (Index i = 0; i < f.size(); ++i) {
      const Index r = free_map_[static_cast<std::size_t>(i)];
      if (r >= 0) reduced(r) = f(i);
    }
    const Vector x = llt.solve(reduced);
    Vector u = Vector::Zero(n_dofs());
    for (Index i = 0; i < u.size(); ++i) {
      const Index r = free_map_[static_cast<std::size_t>(i)];
      if (r >= 0) u(i) = x(r);
    }
    out.push_back(std::move(u));
  }
  return out;
}

Vector PlaneStressModel::solve(const Vector& d, Index load_case) const {
  if (load_case < 0 || load_case >= static_cast<Index>(loads_.size())) {
    throw DimensionError("load case index out of range");
  }
  return solve(d)[static_cast<std::size_t>(load_case)];
}

Vector PlaneStressModel::load_vector(Index load_case, double scale) const {
  if (load_case < 0 || load_case >= static_cast<Index>(loads_.size())) {
    throw DimensionError("load case index out of range");
  }
  return scale * loads_[static_cast<std::size_t>(load_case)];
}

Vector PlaneStressModel::observe(const Vector& u) const {
  if (u.size() != n_dofs()) throw DimensionError("displacement vector has the wrong length");
  Vector y(static_cast<Index>(probes_.size()));
  for (std::size_t s = 0; s < probes_.size(); ++s) {
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += probes_[s].weight[i] * u(probes_[s].dofs[i]);
    y(static_cast<Index>(s)) = v;
  }
  return y;
}

Vector PlaneStressModel::predict(const Vector& d) const {
  const auto fields = solve(d);
  const Index ns = static_cast<Index>(probes_.size());
  Vector y(ns * static_cast<Index>(fields.size()));
  for (std::size_t c = 0; c < fields.size(); ++c) y.segment(static_cast<Index>(c) * ns, ns) = observe(fields[c]);
  return y;
}

Vector PlaneStressModel::noise_std() const {
  const Index ns = static_cast<Index>(config_.sensors.size());
  Vector per(ns);
  for (Index s = 0; s < ns; ++s) {
    switch (config_.sensors[static_cast<std::size_t>(s)].kind) {
      case SensorKind::strain_xx:
        per(s) = config_.sigma_strain;
        break;
      case SensorKind::displacement_y:
        per(s) = config_.sigma_displacement;
        break;
      case SensorKind::slope_y:
        per(s) = config_.sigma_slope;
        break;
    }
  }
  return per.replicate(static_cast<Index>(config_.load_positions.size()), 1);
}

Vector solve_plane_stress(const Damage2DConfig& config, const Vector& d, Index load_case) {
  return PlaneStressModel(config).solve(d, load_case);
}

Vector observe(const Damage2DConfig& config, const Vector& u) { return PlaneStressModel(config).observe(u); }

FdJacobian fd_jacobian(const PlaneStressModel& model, const Vector& nominal, double step) {
  if (!(step > 0.0)) throw ConfigError("fd_step", "must be positive");
  const Index n = model.config().n_cells();
  if (nominal.size() != n) throw DimensionError("nominal field must have one value per cell");
  const Vector y0 = model.predict(nominal);
  const double scale = y0.cwiseAbs().maxCoeff();
  Matrix j(y0.size(), n);
  std::vector<char> tiny(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](Index c) {
    Vector plus = nominal;
    Vector minus = nominal;
    plus(c) += step;
    minus(c) -= step;
    const Vector diff = model.predict(plus) - model.predict(minus);
    j.col(c) = diff / (2.0 * step);
    tiny[static_cast<std::size_t>(c)] = diff.cwiseAbs().maxCoeff() < 1e-12 * scale ? 1 : 0;
  });
  std::vector<Index> unresolved;
  for (Index c = 0; c < n; ++c) {
    if (tiny[static_cast<std::size_t>(c)] != 0) unresolved.push_back(c);
  }
  const Vector sd = model.noise_std();
  return {ObservationBlock(std::move(j), NoiseCovariance::diagonal(sd.cwiseAbs2()), "damage2d"),
          std::move(unresolved)};
}

Linearized linearize(const PlaneStressModel& model, const Vector& nominal) {
  return {nominal, model.predict(nominal), fd_jacobian(model, nominal, model.config().fd_step)};
}

Vector synthesize(const PlaneStressModel& model, std::uint64_t seed, double noise_scale) {
  Vector y = model.predict(model.config().true_field());
  const Vector sd = model.noise_std();
  Rng rng(seed);
  for (Index i = 0; i < y.size(); ++i) y(i) += noise_scale * sd(i) * rng.normal();
  return y;
}

ModeReport mode_report(const ObservationBlock& block, Index k) {
  if (k < 1) throw ConfigError("k", "need at least one retained mode");
  InfoOperator info = assemble_info(block);
  ModeSet modes = sym_eig(info, k);
  const double last = modes.eigenvalues(modes.size() - 1);
  const double ratio = last > 0.0 ? modes.eigenvalues(0) / last : std::numeric_limits<double>::infinity();
  return {std::move(modes), ratio, std::move(info)};
}

SubspaceMap subspace_map(const Linearized& lin, const Vector& data, const ModeSet& modes, Index k,
                         double penalty_rel, double lo, double hi) {
  if (k < 1 || k > modes.size()) throw ConfigError("k", "retained mode count exceeds the available modes");
  if (data.size() != lin.prediction.size()) throw DimensionError("data vector has the wrong length");
  const ObservationBlock& block = lin.jacobian.block;
  const Matrix psi = modes.modes.leftCols(k);
  const Matrix a = block.whitened_jacobian() * psi;
  const Vector r = block.noise().whiten(Vector(data - lin.prediction));
  const double alpha = penalty_rel * modes.eigenvalues(0);
  const Matrix h = a.transpose() * a + alpha * Matrix::Identity(k, k);
  const Eigen::LDLT<Matrix> ldlt(h);
  if (ldlt.info() != Eigen::Success) throw SolverError("reduced normal matrix is singular");
  SubspaceMap out;
  out.coefficients = ldlt.solve(a.transpose() * r);
  out.unclamped = lin.nominal + psi * out.coefficients;
  out.field = clamp_field(out.unclamped, lo, hi);
  out.penalty = alpha;
  return out;
}

}  // namespace infoop::damage2d
