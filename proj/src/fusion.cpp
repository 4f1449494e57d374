#include "infoop/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "infoop/error.hpp"
#include "infoop/random.hpp"

namespace infoop::fusion {

std::string to_string(Blocks blocks) {
  switch (blocks) {
    case Blocks::static_only:
      return "static";
    case Blocks::dynamic_only:
      return "dynamic";
    case Blocks::hybrid:
      return "hybrid";
  }
  return "hybrid";
}

Blocks blocks_from_string(const std::string& name) {
  if (name == "static") return Blocks::static_only;
  if (name == "dynamic") return Blocks::dynamic_only;
  if (name == "hybrid") return Blocks::hybrid;
  throw ConfigError("blocks", "expected static, dynamic or hybrid, got '" + name + "'");
}

namespace {

bool uses_static(Blocks b) { return b != Blocks::dynamic_only; }
bool uses_dynamic(Blocks b) { return b != Blocks::static_only; }

fe::BeamSolver static_solver(const FusionBenchmark& bench, const Vector& p) {
  fe::BeamMesh mesh = fe::BeamMesh::uniform_spans({bench.L}, bench.n_elements, bench.EI0);
  mesh.ei = bench.rigidity(p);
  return fe::BeamSolver(std::move(mesh));
}

Vector select(const Vector& v, const std::vector<bool>& keep) {
  Vector out(static_cast<Index>(std::count(keep.begin(), keep.end(), true)));
  Index j = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) out(j++) = v(i);
  }
  return out;
}

void check_p(const FusionBenchmark& bench, const Vector& p) {
  if (p.size() != bench.n_elements) throw DimensionError("log-stiffness vector has the wrong length");
}

}  // namespace

FusionBenchmark FusionBenchmark::standard() {
  FusionBenchmark bench;
  bench.dynamic.sensor = 0.35;
  bench.dynamic.excitations = {0.2, 0.45, 0.6, 0.85};
  return bench;
}

void FusionBenchmark::validate() const {
  if (!(L > 0.0)) throw ConfigError("L", "span length must be positive");
  if (!(EI0 > 0.0)) throw ConfigError("EI0", "reference rigidity must be positive");
  if (n_elements < 2) throw ConfigError("n_elements", "need at least two elements");
  if (!(damage.reduction >= 0.0 && damage.reduction < 1.0)) {
    throw ConfigError("damage.reduction", "must lie in [0, 1) so the true EI stays positive");
  }
  if (!(damage.half_width > 0.0)) throw ConfigError("damage.half_width", "must be positive");
  if (!(damage.center - damage.half_width > 0.5 && damage.center + damage.half_width < 1.0)) {
    throw ConfigError("damage.center", "damaged region must lie inside the right half-span");
  }
  if (tilt_sensors.empty()) throw ConfigError("tilt_sensors", "need at least one tilt sensor");
  for (double r : tilt_sensors) {
    if (!(r > 0.0 && r < L)) throw ConfigError("tilt_sensors", "sensors must lie inside the span");
  }
  if (n_loads < 2) throw ConfigError("n_loads", "need at least two load positions");
  if (!(sigma_tilt > 0.0)) throw ConfigError("sigma_tilt", "must be positive");
  if (!(gamma_pr > 0.0)) throw ConfigError("gamma_pr", "must be positive");
  if (!(eps_pr > 0.0)) throw ConfigError("eps_pr", "must be positive");
  if (!(damping_ratio >= 0.0)) throw ConfigError("damping_ratio", "must be nonnegative");
  if (dynamic.frequencies.empty() && n_frequencies < 1) {
    throw ConfigError("n_frequencies", "need at least one frequency");
  }
  dynamic_spec().validate();
}

Vector FusionBenchmark::element_centers() const {
  const double h = L / static_cast<double>(n_elements);
  return Vector::LinSpaced(n_elements, 0.5 * h, L - 0.5 * h);
}

Vector FusionBenchmark::true_log_stiffness() const {
  const Vector x = element_centers();
  Vector p(n_elements);
  for (Index e = 0; e < n_elements; ++e) {
    const double t = (x(e) / L - damage.center) / damage.half_width;
    double drop = 0.0;
    if (std::abs(t) < 1.0) {
      const double c = std::cos(0.5 * std::numbers::pi * t);
      drop = damage.reduction * c * c;
    }
    p(e) = std::log1p(-drop);
  }
  return p;
}

Vector FusionBenchmark::rigidity(const Vector& p) const { return EI0 * p.array().exp().matrix(); }

std::vector<fe::MovingLoadCase> FusionBenchmark::load_cases() const {
  auto cases = fe::uniform_sweep(L, n_loads, load, sigma_tilt);
  for (auto& c : cases) c.weight = 1.0;
  return cases;
}

dynamic::DynamicSpec FusionBenchmark::dynamic_spec() const {
  dynamic::DynamicSpec spec = dynamic;
  spec.L = L;
  spec.EI0 = EI0;
  spec.n_elements = n_elements;
  if (spec.c_d < 0.0) spec.c_d = 2.0 * damping_ratio * spec.rhoA * spec.omega(1);
  if (spec.frequencies.empty() && n_frequencies > 0) {
    spec.frequencies = dynamic::default_frequencies(spec, n_frequencies);
  }
  return spec;
}

PriorModel FusionBenchmark::prior() const { return difference_precision(n_elements, gamma_pr, eps_pr); }

FusionData predict(const FusionBenchmark& bench, const Vector& p) {
  check_p(bench, p);
  const fe::BeamSolver solver = static_solver(bench, p);
  return {fe::static_tilts(solver, bench.tilt_sensors, bench.load_cases()),
          dynamic::dynamic_log_frf(bench.dynamic_spec(), p)};
}

FusionData synthesize_data(const FusionBenchmark& bench, std::uint64_t seed, double noise_scale) {
  bench.validate();
  FusionData data = predict(bench, bench.true_log_stiffness());
  Rng rng(seed);
  const double s_tilt = noise_scale * bench.sigma_tilt;
  const double s_log = noise_scale * bench.dynamic.sigma_log;
  for (Index i = 0; i < data.tilts.size(); ++i) data.tilts(i) += s_tilt * rng.normal();
  for (Index i = 0; i < data.log_frf.size(); ++i) data.log_frf(i) += s_log * rng.normal();
  return data;
}

MapResult gauss_newton(const LeastSquaresModel& model, const PriorModel& prior, const Vector& start,
                       const GaussNewtonOptions& options) {
  if (start.size() != prior.dim()) throw DimensionError("start vector does not match the prior");
  const Matrix& q = prior.precision();
  const Vector& mean = prior.mean();
  const auto objective = [&](const Vector& p, const Vector& r) {
    const Vector d = p - mean;
    return 0.5 * r.squaredNorm() + 0.5 * d.dot(q * d);
  };

  MapResult out;
  Vector p = start;
  Linearization lin = model.linearize(p);
  double phi = objective(p, lin.residual);
  for (Index it = 0; it < options.max_iterations; ++it) {
    out.misfit_history.push_back(phi);
    const Matrix h = lin.jacobian.transpose() * lin.jacobian + q;
    const Vector g = lin.jacobian.transpose() * lin.residual + q * (p - mean);
    const Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) throw SolverError("Gauss-Newton normal matrix is not positive definite");
    Vector step = -llt.solve(g);
    const double largest = step.cwiseAbs().maxCoeff();
    if (largest > options.max_step) step *= options.max_step / largest;
    const double slope = g.dot(step);

    double alpha = 1.0;
    bool accepted = false;
    Vector trial;
    double phi_trial = phi;
    for (Index b = 0; b <= options.max_backtracks; ++b) {
      trial = p + alpha * step;
      try {
        phi_trial = objective(trial, model.residual(trial));
      } catch (const SolverError&) {
        // trial field left the range where the model is solvable
        alpha *= options.backtrack;
        continue;
      } catch (const ResonanceError&) {
        alpha *= options.backtrack;
        continue;
      }
      if (phi_trial <= phi + options.armijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= options.backtrack;
    }
    ++out.iterations;
    const double step_norm = alpha * step.norm();
    if (!accepted) {
      // no decrease even for the shortest step: keep p and report
      out.stagnated = step.norm() >= options.step_tol;
      out.converged = !out.stagnated;
      break;
    }
    p = trial;
    phi = phi_trial;
    if (step_norm < options.step_tol) {
      out.converged = true;
      break;
    }
    lin = model.linearize(p);
  }
  out.misfit_history.push_back(phi);
  const Linearization final_lin = model.linearize(p);
  out.band = posterior_band(final_lin.jacobian, prior);
  out.p_map = std::move(p);
  return out;
}

LeastSquaresModel fusion_model(const FusionBenchmark& bench, const FusionData& data, Blocks blocks) {
  bench.validate();
  const dynamic::DynamicSpec spec = bench.dynamic_spec();
  const auto cases = bench.load_cases();
  const Index nk = static_cast<Index>(spec.excitations.size() * spec.frequencies.size());
  if (uses_static(blocks) && data.tilts.size() != static_cast<Index>(bench.tilt_sensors.size() * cases.size())) {
    throw DimensionError("static data has the wrong length");
  }
  if (uses_dynamic(blocks) && data.log_frf.size() != nk) throw DimensionError("dynamic data has the wrong length");

  // antiresonant rows are fixed once, at the healthy field
  const std::vector<bool> keep =
      uses_dynamic(blocks) ? dynamic::dynamic_jacobian(spec, Vector::Zero(bench.n_elements)).retained
                           : std::vector<bool>{};
  const Vector dyn_data = uses_dynamic(blocks) ? select(data.log_frf, keep) : Vector();
  const double s_tilt = bench.sigma_tilt;
  const double s_log = spec.sigma_log;

  LeastSquaresModel model;
  model.residual = [=, &bench](const Vector& p) {
    check_p(bench, p);
    Vector r(0);
    if (uses_static(blocks)) {
      r = (fe::static_tilts(static_solver(bench, p), bench.tilt_sensors, cases) - data.tilts) / s_tilt;
    }
    if (uses_dynamic(blocks)) {
      const Vector d = (select(dynamic::dynamic_log_frf(spec, p), keep) - dyn_data) / s_log;
      Vector joined(r.size() + d.size());
      joined << r, d;
      r = std::move(joined);
    }
    return r;
  };
  model.linearize = [=, &bench](const Vector& p) {
    check_p(bench, p);
    Linearization lin{Vector(0), Matrix(0, bench.n_elements)};
    if (uses_static(blocks)) {
      const fe::BeamSolver solver = static_solver(bench, p);
      lin.residual = (fe::static_tilts(solver, bench.tilt_sensors, cases) - data.tilts) / s_tilt;
      lin.jacobian = fe::static_tilt_jacobian(solver, bench.tilt_sensors, cases).whitened_jacobian();
    }
    if (uses_dynamic(blocks)) {
      const dynamic::DynamicBlock db = dynamic::dynamic_jacobian(spec, p, keep);
      const Vector d = (db.log_magnitude - dyn_data) / s_log;
      Vector r(lin.residual.size() + d.size());
      r << lin.residual, d;
      Matrix j(lin.jacobian.rows() + db.block.rows(), bench.n_elements);
      j << lin.jacobian, db.block.whitened_jacobian();
      lin.residual = std::move(r);
      lin.jacobian = std::move(j);
    }
    return lin;
  };
  return model;
}

MapResult gauss_newton_map(const FusionBenchmark& bench, const FusionData& data, Blocks blocks,
                           const GaussNewtonOptions& options) {
  const PriorModel prior = bench.prior();
  return gauss_newton(fusion_model(bench, data, blocks), prior, prior.mean(), options);
}

Vector posterior_band(const Matrix& whitened_jacobian, const PriorModel& prior) {
  if (whitened_jacobian.cols() != prior.dim()) throw DimensionError("Jacobian does not match the prior");
  const Matrix h = whitened_jacobian.transpose() * whitened_jacobian + prior.precision();
  const Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) throw SolverError("posterior precision is not positive definite");
  const Matrix cov = llt.solve(Matrix::Identity(h.rows(), h.cols()));
  return cov.diagonal().cwiseSqrt();
}

Matrix whitened_jacobian(const FusionBenchmark& bench, const Vector& p, Blocks blocks) {
  bench.validate();
  check_p(bench, p);
  Matrix j(0, bench.n_elements);
  if (uses_static(blocks)) {
    j = fe::static_tilt_jacobian(static_solver(bench, p), bench.tilt_sensors, bench.load_cases())
            .whitened_jacobian();
  }
  if (uses_dynamic(blocks)) {
    const Matrix d = dynamic::dynamic_jacobian(bench.dynamic_spec(), p).block.whitened_jacobian();
    Matrix joined(j.rows() + d.rows(), bench.n_elements);
    joined << j, d;
    j = std::move(joined);
  }
  return j;
}

Vector posterior_band(const FusionBenchmark& bench, const Vector& p_hat, Blocks blocks) {
  return posterior_band(whitened_jacobian(bench, p_hat, blocks), bench.prior());
}

InfoOperator block_information(const FusionBenchmark& bench, const Vector& p, Blocks blocks) {
  const Matrix j = whitened_jacobian(bench, p, blocks);
  return InfoOperator::from_dense(j.transpose() * j);
}

DensityReport density_report(const FusionBenchmark& bench) {
  const Vector p0 = Vector::Zero(bench.n_elements);
  const InfoOperator stat = block_information(bench, p0, Blocks::static_only);
  const InfoOperator dyn = block_information(bench, p0, Blocks::dynamic_only);
  const std::array<InfoOperator, 2> parts{stat, dyn};
  const InfoOperator hyb = add_blocks(parts);
  return {bench.element_centers(), stat.dense().diagonal(), dyn.dense().diagonal(), hyb.dense().diagonal()};
}

double rigidity_error(const FusionBenchmark& bench, const Vector& p) {
  check_p(bench, p);
  const Vector truth = bench.rigidity(bench.true_log_stiffness());
  return (bench.rigidity(p) - truth).norm() / truth.norm();
}

}  // namespace infoop::fusion
