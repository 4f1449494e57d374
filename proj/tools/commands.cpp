#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "infoop/beam_analytic.hpp"
#include "infoop/beam_fe.hpp"
#include "infoop/damage2d.hpp"
#include "infoop/error.hpp"
#include "infoop/fusion.hpp"
#include "infoop/io.hpp"
#include "infoop/prior.hpp"
#include "infoop/spectral.hpp"

namespace infoop::cli {

namespace {

using nlohmann::json;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Index positive(Index value, const std::string& key) {
  if (value < 1) throw ConfigError(key, "must be a positive integer");
  return value;
}

Index parse_count(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a positive integer, got '" + text + "'");
  }
  if (used != text.size() || n < 1) throw ConfigError(key, "expected a positive integer, got '" + text + "'");
  return static_cast<Index>(n);
}

Matrix read_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("input", "cannot read '" + path + "'");
  Matrix m = io::read_matrix_csv(in);
  if (m.rows() == 0 || m.rows() != m.cols()) throw ConfigError("input", "operator CSV must be square and nonempty");
  return m;
}

std::string modes_csv(const ModeSet& modes) {
  std::ostringstream s;
  io::write_modes_csv(s, modes);
  return s.str();
}

double min_eig(const Matrix& m) { return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues()(0); }

}  // namespace

CommandResult beam_analytic(const Options& opt, const ConfigTable& section, Artifacts& art) {
  beam::BeamSpec spec;
  spec.L = section.number("L", spec.L);
  spec.P = section.number("P", spec.P);
  spec.sigma = section.number("sigma", spec.sigma);
  spec.EI0 = section.number("EI0", spec.EI0);
  spec.rho = opt.rho.value_or(section.number("rho", spec.rho));
  const Index n = positive(opt.grid ? parse_count(*opt.grid, "grid") : section.integer("grid", 400), "grid");
  const Index k = positive(opt.k.value_or(section.integer("k", 6)), "k");
  const Index n_series = positive(section.integer("n_series", 200), "n_series");
  section.reject_unknown();
  art.open();
  spec.validate();
  if (k > n_series) throw ConfigError("k", "cannot exceed n_series");

  const Vector s = beam::midpoint_grid(n);
  Matrix density(n, 4);
  for (Index i = 0; i < n; ++i) {
    const beam::OneSided d = beam::diag_density(spec, s(i));
    density.row(i) << s(i), d.left, d.right, beam::normalized_density(spec.rho, s(i));
  }
  std::ostringstream dens;
  dens << "# density rho=" << io::format_double(spec.rho) << " n=" << n << '\n'
       << "s,density_left,density_right,normalized\n"
       << csv_rows(density);
  art.write("density.csv", dens.str(), "csv", "diagonal information density on the midpoint grid");

  std::ostringstream ker;
  ker << "# kernel rho=" << io::format_double(spec.rho) << " n=" << n << '\n' << csv_rows(beam::kernel_grid(spec, n));
  art.write("kernel.csv", ker.str(), "csv", "compliance kernel on the midpoint grid");

  const ModeSet modes = beam::galerkin_modes(spec, n_series, k);
  Matrix shapes(n + 1, k);
  shapes.row(0) = modes.eigenvalues.transpose();
  shapes.bottomRows(n) = beam::galerkin_mode_shapes(spec, modes, s);
  art.write("modes.csv", csv_rows(shapes), "csv", "eigenvalues, then mode shapes sampled on the midpoint grid");

  // argmax of the density at resolution 1e-4
  double best = -1.0;
  double argmax = 0.0;
  for (int j = 0; j <= 10000; ++j) {
    const double x = j / 10000.0;
    const beam::OneSided d = beam::diag_density(spec, x);
    const double v = std::max(d.left, d.right);
    if (v > best) {
      best = v;
      argmax = x;
    }
  }
  const beam::OneSided at = beam::diag_density(spec, spec.rho);
  json summary{{"rho", spec.rho},
               {"jump_ratio", beam::jump_ratio(spec.rho)},
               {"density_left_at_sensor", at.left},
               {"density_right_at_sensor", at.right},
               {"kappa_v", beam::kappa_v(spec)},
               {"argmax_density", argmax},
               {"eigenvalues", to_json(modes.eigenvalues)}};
  art.write("summary.json", summary.dump(2) + "\n", "json", "jump ratio, density peak and leading eigenvalues");
  json echo{{"L", spec.L}, {"P", spec.P}, {"sigma", spec.sigma}, {"EI0", spec.EI0}, {"rho", spec.rho},
            {"grid", n},   {"k", k},       {"n_series", n_series}};
  return {echo, summary};
}

CommandResult beam_two_span(const Options& opt, const ConfigTable& section, Artifacts& art) {
  const std::vector<double> spans = section.numbers("spans", {1.0, 1.0});
  const Index elements =
      positive(opt.grid ? parse_count(*opt.grid, "grid") : section.integer("elements_per_span", 64), "elements_per_span");
  const double ei0 = section.number("EI0", 1.0);
  const double rho = opt.rho.value_or(section.number("rho", 0.25));
  const Index n_loads = section.integer("n_loads", 81);
  const double load = section.number("P", 1.0);
  const double sigma = section.number("sigma", 1.0);
  const std::string param = section.text("param", "compliance");
  section.reject_unknown();
  art.open();
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho", "sensor fraction must lie in (0, 1)");
  if (!(load > 0.0)) throw ConfigError("P", "load magnitude must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "rotation noise std must be positive");
  if (param != "compliance" && param != "rigidity") throw ConfigError("param", "expected compliance or rigidity");

  const fe::BeamSolver solver(fe::BeamMesh::uniform_spans(spans, elements, ei0));
  const double total = solver.mesh().length();
  const double sensor = rho * total;
  const auto cases = fe::uniform_sweep(total, n_loads, load, sigma);
  const fe::KernelSamples ks = fe::assemble_kernel(
      solver, sensor, cases, param == "rigidity" ? fe::KernelParam::rigidity : fe::KernelParam::compliance);

  const Index n = ks.x.size();
  std::ostringstream ker;
  ker << "# kernel rho=" << io::format_double(rho) << " n=" << n << '\n' << csv_rows(ks.kernel);
  art.write("kernel.csv", ker.str(), "csv", "discrete kernel at the moment sample points");
  Matrix density(n, 2);
  density.col(0) = ks.x;
  density.col(1) = ks.kernel.diagonal();
  art.write("density.csv", "x,density\n" + csv_rows(density), "csv", "kernel diagonal at the sample points");
  art.write("samples.csv", "x\n" + csv_rows(ks.x), "csv", "sample coordinates of the kernel rows");

  Index peak = 0;
  ks.kernel.diagonal().maxCoeff(&peak);
  const double scale = ks.kernel.cwiseAbs().maxCoeff();
  json summary{{"sensor", sensor},
               {"length", total},
               {"n_samples", n},
               {"trace", ks.kernel.trace()},
               {"argmax_density", ks.x(peak)},
               {"asymmetry", (ks.kernel - ks.kernel.transpose()).cwiseAbs().maxCoeff() / scale},
               {"min_eigenvalue_rel", min_eig(ks.kernel) / Eigen::SelfAdjointEigenSolver<Matrix>(ks.kernel).eigenvalues().maxCoeff()}};
  art.write("summary.json", summary.dump(2) + "\n", "json", "kernel diagnostics");
  json echo{{"spans", spans}, {"elements_per_span", elements}, {"EI0", ei0}, {"rho", rho},
            {"n_loads", n_loads}, {"P", load}, {"sigma", sigma}, {"param", param}};
  return {echo, summary};
}

CommandResult fuse_benchmark(const Options& opt, const ConfigTable& section, Artifacts& art) {
  fusion::FusionBenchmark b = fusion::FusionBenchmark::standard();
  b.L = section.number("L", b.L);
  b.EI0 = section.number("EI0", b.EI0);
  b.n_elements = section.integer("n_elements", b.n_elements);
  b.tilt_sensors = section.numbers("tilt_sensors", b.tilt_sensors);
  b.n_loads = section.integer("n_loads", b.n_loads);
  b.load = section.number("load", b.load);
  b.sigma_tilt = section.number("sigma_tilt", b.sigma_tilt);
  b.n_frequencies = section.integer("n_frequencies", b.n_frequencies);
  b.damping_ratio = section.number("damping_ratio", b.damping_ratio);
  b.gamma_pr = section.number("gamma_pr", b.gamma_pr);
  b.eps_pr = section.number("eps_pr", b.eps_pr);
  const ConfigTable damage = section.table("damage");
  b.damage.center = damage.number("center", b.damage.center);
  b.damage.half_width = damage.number("half_width", b.damage.half_width);
  b.damage.reduction = damage.number("reduction", b.damage.reduction);
  const ConfigTable dyn = section.table("dynamic");
  b.dynamic.sensor = dyn.number("sensor", b.dynamic.sensor);
  b.dynamic.excitations = dyn.numbers("excitations", b.dynamic.excitations);
  b.dynamic.frequencies = dyn.numbers("frequencies", b.dynamic.frequencies);
  b.dynamic.sigma_log = dyn.number("sigma_log", b.dynamic.sigma_log);
  b.dynamic.n_modes = dyn.integer("n_modes", b.dynamic.n_modes);
  b.dynamic.rhoA = dyn.number("rhoA", b.dynamic.rhoA);
  b.dynamic.F_hat = dyn.number("F_hat", b.dynamic.F_hat);
  b.dynamic.c_d = dyn.number("c_d", b.dynamic.c_d);
  const ConfigTable solver = section.table("solver");
  fusion::GaussNewtonOptions gn;
  gn.max_iterations = positive(solver.integer("max_iterations", gn.max_iterations), "max_iterations");
  gn.step_tol = solver.number("step_tol", gn.step_tol);
  gn.max_step = solver.number("max_step", gn.max_step);
  const fusion::Blocks blocks = fusion::blocks_from_string(opt.blocks.value_or(section.text("blocks", "hybrid")));
  const std::uint64_t seed = opt.seed.value_or(section.seed("seed", 1));
  const double noise_scale = section.number("noise_scale", 1.0);
  section.reject_unknown();
  art.open();
  b.validate();
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale", "must be nonnegative");
  if (!(gn.step_tol > 0.0)) throw ConfigError("step_tol", "must be positive");
  if (!(gn.max_step > 0.0)) throw ConfigError("max_step", "must be positive");

  const fusion::FusionData data = fusion::synthesize_data(b, seed, noise_scale);
  const fusion::MapResult r = fusion::gauss_newton_map(b, data, blocks, gn);
  const Vector x = b.element_centers();
  const Vector truth = b.true_log_stiffness();

  Matrix rec(x.size(), 5);
  rec.col(0) = x;
  rec.col(1) = b.rigidity(truth);
  rec.col(2) = b.rigidity(r.p_map);
  rec.col(3) = b.rigidity(Vector(r.p_map - 2.0 * r.band));
  rec.col(4) = b.rigidity(Vector(r.p_map + 2.0 * r.band));
  art.write("reconstruction.csv", "x,EI_true,EI_map,band_lo,band_hi\n" + csv_rows(rec), "csv",
            "true and MAP rigidity per element with two-sigma log-space band");

  const fusion::DensityReport dr = fusion::density_report(b);
  Matrix dens(dr.x.size(), 4);
  dens << dr.x, dr.static_density, dr.dynamic_density, dr.hybrid_density;
  art.write("density.csv", "x,static,dynamic,hybrid\n" + csv_rows(dens), "csv",
            "information density per element at the healthy field");

  json convergence{{"blocks", fusion::to_string(blocks)},
                   {"seed", seed},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"stagnated", r.stagnated},
                   {"misfit_history", r.misfit_history},
                   {"rigidity_error", fusion::rigidity_error(b, r.p_map)},
                   {"max_log_stiffness_error", (r.p_map - truth).cwiseAbs().maxCoeff()}};
  art.write("convergence.json", convergence.dump(2) + "\n", "json", "Gauss-Newton history and errors");

  json echo{{"L", b.L},
            {"EI0", b.EI0},
            {"n_elements", b.n_elements},
            {"tilt_sensors", b.tilt_sensors},
            {"n_loads", b.n_loads},
            {"load", b.load},
            {"sigma_tilt", b.sigma_tilt},
            {"n_frequencies", b.n_frequencies},
            {"damping_ratio", b.damping_ratio},
            {"gamma_pr", b.gamma_pr},
            {"eps_pr", b.eps_pr},
            {"damage", {{"center", b.damage.center}, {"half_width", b.damage.half_width}, {"reduction", b.damage.reduction}}},
            {"dynamic",
             {{"sensor", b.dynamic.sensor},
              {"excitations", b.dynamic.excitations},
              {"frequencies", b.dynamic.frequencies},
              {"sigma_log", b.dynamic.sigma_log},
              {"n_modes", b.dynamic.n_modes},
              {"rhoA", b.dynamic.rhoA},
              {"F_hat", b.dynamic.F_hat},
              {"c_d", b.dynamic.c_d}}},
            {"solver", {{"max_iterations", gn.max_iterations}, {"step_tol", gn.step_tol}, {"max_step", gn.max_step}}},
            {"blocks", fusion::to_string(blocks)},
            {"seed", seed},
            {"noise_scale", noise_scale}};
  return {echo, convergence};
}

CommandResult damage2d(const Options& opt, const ConfigTable& section, Artifacts& art) {
  using namespace infoop::damage2d;
  const std::string scale = section.text("scale", "full");
  if (scale != "full" && scale != "test") throw ConfigError("scale", "expected full or test");
  Damage2DConfig c = scale == "full" ? Damage2DConfig::full_scale() : Damage2DConfig::test_scale();
  const double base_length = c.length;
  const double base_height = c.height;

  c.nx = section.integer("nx", c.nx);
  c.ny = section.integer("ny", c.ny);
  if (opt.grid) {
    const auto cross = opt.grid->find('x');
    if (cross == std::string::npos) throw ConfigError("grid", "expected <ny>x<nx>, got '" + *opt.grid + "'");
    c.ny = parse_count(opt.grid->substr(0, cross), "grid");
    c.nx = parse_count(opt.grid->substr(cross + 1), "grid");
  }
  c.length = section.number("length", c.length);
  c.height = section.number("height", c.height);
  c.E0 = section.number("E0", c.E0);
  c.poisson = section.number("poisson", c.poisson);
  c.thickness = section.number("thickness", c.thickness);
  c.kappa = section.number("kappa", c.kappa);
  c.load = section.number("load", c.load);
  c.load_width = section.number("load_width", c.load_width);
  c.sigma_strain = section.number("sigma_strain", c.sigma_strain);
  c.sigma_displacement = section.number("sigma_displacement", c.sigma_displacement);
  c.sigma_slope = section.number("sigma_slope", c.sigma_slope);
  c.k = opt.k.value_or(section.integer("k", c.k));
  const std::vector<double> clamp = section.numbers("clamp", {c.clamp_lo, c.clamp_hi});
  if (clamp.size() != 2) throw ConfigError(section.path("clamp"), "expected [lo, hi]");
  c.clamp_lo = clamp[0];
  c.clamp_hi = clamp[1];
  c.fd_step = section.number("fd_step", c.fd_step);
  c.penalty = section.number("penalty", c.penalty);

  // default layouts follow the domain when it is resized
  const double sx = c.length / base_length;
  const double sy = c.height / base_height;
  for (Sensor& s : c.sensors) {
    s.x *= sx;
    s.y *= sy;
  }
  for (double& x : c.load_positions) x *= sx;
  c.load_positions = section.numbers("load_positions", c.load_positions);
  if (section.has("sensors")) {
    c.sensors.clear();
    for (const ConfigTable& t : section.tables("sensors")) {
      c.sensors.push_back({sensor_kind_from_string(t.text("kind", "")), t.number("x", -1.0), t.number("y", -1.0)});
    }
  }
  const ConfigTable bump = section.table("damage");
  c.damage.x = bump.number("x", c.damage.x * sx);
  c.damage.y = bump.number("y", c.damage.y * sy);
  c.damage.sx = bump.number("sx", c.damage.sx * sx);
  c.damage.sy = bump.number("sy", c.damage.sy * sy);
  c.damage.peak = bump.number("peak", c.damage.peak);
  const std::uint64_t seed = opt.seed.value_or(section.seed("seed", 1));
  const double noise_scale = section.number("noise_scale", 1.0);
  const double nominal_level = section.number("nominal", 0.0);
  section.reject_unknown();
  art.open();
  c.validate();
  if (c.k > c.n_cells()) throw ConfigError("k", "cannot exceed the number of cells");
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale", "must be nonnegative");

  const PlaneStressModel model(c);
  const Vector nominal = Vector::Constant(c.n_cells(), nominal_level);
  const Linearized lin = linearize(model, nominal);
  const ModeReport rep = mode_report(lin.jacobian.block, c.k);
  const Vector data = synthesize(model, seed, noise_scale);
  const SubspaceMap map = subspace_map(lin, data, rep.modes, c.k, c.penalty, c.clamp_lo, c.clamp_hi);
  const Vector truth = c.true_field();

  art.write("field_true.csv", field_csv(truth, c.ny, c.nx), "csv", "true damage field, bottom row first");
  art.write("field_map.csv", field_csv(map.field, c.ny, c.nx), "csv", "clamped subspace MAP field, bottom row first");
  for (Index i = 0; i < c.k; ++i) {
    std::ostringstream name;
    name << "modes/mode_" << (i + 1) << ".csv";
    art.write(name.str(), field_csv(rep.modes.modes.col(i), c.ny, c.nx), "csv",
              "information mode " + std::to_string(i + 1) + " as a field");
  }

  const Matrix psi = rep.modes.modes.leftCols(c.k);
  const double before = (psi.transpose() * (nominal - truth)).norm();
  const double after = (psi.transpose() * (map.field - truth)).norm();
  json spectrum{{"eigenvalues", to_json(rep.modes.eigenvalues)},
                {"ratio", rep.ratio},
                {"rank", numerical_rank(rep.info.dense())},
                {"n_cells", c.n_cells()},
                {"n_observations", c.n_observations()},
                {"unresolved_columns", lin.jacobian.unresolved.size()},
                {"penalty", map.penalty},
                {"coefficients", to_json(map.coefficients)},
                {"within_subspace_error_nominal", before},
                {"within_subspace_error_map", after},
                {"within_subspace_reduction", before > 0.0 ? 1.0 - after / before : 0.0},
                {"field_error_nominal", (nominal - truth).norm()},
                {"field_error_map", (map.field - truth).norm()},
                {"seed", seed}};
  art.write("spectrum.json", spectrum.dump(2) + "\n", "json", "leading spectrum, rank and reconstruction errors");

  json sensors = json::array();
  for (const Sensor& s : c.sensors) sensors.push_back({{"kind", to_string(s.kind)}, {"x", s.x}, {"y", s.y}});
  json echo{{"scale", scale},
            {"nx", c.nx},
            {"ny", c.ny},
            {"length", c.length},
            {"height", c.height},
            {"E0", c.E0},
            {"poisson", c.poisson},
            {"thickness", c.thickness},
            {"kappa", c.kappa},
            {"load", c.load},
            {"load_width", c.load_width},
            {"load_positions", c.load_positions},
            {"sensors", sensors},
            {"sigma_strain", c.sigma_strain},
            {"sigma_displacement", c.sigma_displacement},
            {"sigma_slope", c.sigma_slope},
            {"k", c.k},
            {"clamp", {c.clamp_lo, c.clamp_hi}},
            {"fd_step", c.fd_step},
            {"penalty", c.penalty},
            {"damage", {{"x", c.damage.x}, {"y", c.damage.y}, {"sx", c.damage.sx}, {"sy", c.damage.sy}, {"peak", c.damage.peak}}},
            {"seed", seed},
            {"noise_scale", noise_scale},
            {"nominal", nominal_level}};
  return {echo, spectrum};
}

CommandResult modes(const Options& opt, const ConfigTable& section, Artifacts& art) {
  const std::string input = opt.input.value_or(section.text("input", ""));
  const Index k = positive(opt.k.value_or(section.integer("k", 6)), "k");
  const Metric metric = metric_from_string(opt.metric.value_or(section.text("metric", "euclidean")));
  const double tau = opt.tau.value_or(section.number("tau", 1.0));
  const bool has_spacing = section.has("spacing");
  const double spacing = section.number("spacing", 0.0);
  const double gamma = section.number("gamma", 1.0);
  const double eps = section.number("eps", 1e-2);
  section.reject_unknown();
  art.open();
  if (input.empty()) throw ConfigError("input", "an operator CSV is required");

  const Matrix dense = read_operator(input);
  const Index n = dense.rows();
  if (k > n) throw ConfigError("k", "cannot exceed the operator dimension");
  const InfoOperator op = InfoOperator::from_dense(dense);
  const double h = has_spacing ? spacing : 1.0 / static_cast<double>(n);
  if (!(h > 0.0)) throw ConfigError("spacing", "must be positive");

  ModeSet result;
  json summary;
  switch (metric) {
    case Metric::euclidean:
      result = sym_eig(op, k);
      break;
    case Metric::mass:
      result = mass_weighted_eig(op, h * Matrix::Identity(n, n), k);
      break;
    case Metric::prior: {
      const PriorModel prior = difference_precision(n, gamma, eps);
      result = prior_preconditioned_eig(op, prior, k);
      const LisResult lis = lis_select(result, tau);
      art.write("lis_modes.csv", modes_csv(lis.retained), "csv", "likelihood-informed modes above tau");
      const json lis_json{{"tau", tau},
                          {"eigenvalues", to_json(lis.retained.eigenvalues)},
                          {"variance_ratios", to_json(lis.variance_ratios)},
                          {"modes_csv", "lis_modes.csv"}};
      art.write("lis.json", lis_json.dump(2) + "\n", "json", "likelihood-informed subspace");
      summary["lis_dimension"] = lis.retained.size();
      break;
    }
  }
  art.write("modes.csv", modes_csv(result), "csv", "eigenvalues, then one row per parameter component");
  art.write("modes.json", io::modes_to_json(result).dump(2) + "\n", "json", "mode set with metric tag");
  summary["metric"] = std::string(to_string(metric));
  summary["eigenvalues"] = to_json(result.eigenvalues);
  json echo{{"input", input}, {"k", k}, {"metric", std::string(to_string(metric))}, {"tau", tau},
            {"spacing", h},   {"gamma", gamma}, {"eps", eps}};
  return {echo, summary};
}

CommandResult weak_gain(const Options& opt, const ConfigTable& section, Artifacts& art) {
  const double length = section.number("L", 1.0);
  const Index elements = positive(section.integer("n_elements", 64), "n_elements");
  const double ei0 = section.number("EI0", 1.0);
  const Index n_loads = section.integer("n_loads", 81);
  const double load = section.number("P", 1.0);
  const double sigma = section.number("sigma", 1e-3);
  const std::vector<double> sensors = section.numbers("sensors", {0.25 * length});
  const std::vector<double> candidates = section.numbers("candidates", {0.1 * length, 0.5 * length, 0.75 * length, 0.9 * length});
  const double gamma = section.number("gamma", 1.0);
  const double eps = section.number("eps", 1e-2);
  const double tau_weak = opt.tau.value_or(section.number("tau", 1e-2));
  const double tau_lis = section.number("tau_lis", 1.0);
  section.reject_unknown();
  art.open();
  if (sensors.empty()) throw ConfigError("sensors", "at least one existing sensor is required");
  if (candidates.empty()) throw ConfigError("candidates", "at least one candidate is required");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "must be positive");
  if (!(tau_weak > 0.0)) throw ConfigError("tau", "must be positive");
  for (double x : sensors) {
    if (!(x > 0.0 && x < length)) throw ConfigError("sensors", "positions must lie inside the span");
  }
  for (double x : candidates) {
    if (!(x > 0.0 && x < length)) throw ConfigError("candidates", "positions must lie inside the span");
  }

  const fe::BeamSolver solver(fe::BeamMesh::uniform_spans({length}, elements, ei0));
  const auto cases = fe::uniform_sweep(length, n_loads, load, sigma);
  const InfoOperator info = assemble_info(fe::static_tilt_jacobian(solver, sensors, cases));
  const PriorModel prior = difference_precision(elements, gamma, eps);
  const ModeSet modes = prior_preconditioned_eig(info, prior, elements);
  const Matrix weak = weak_projector(modes, tau_weak);
  const Matrix identity = Matrix::Identity(elements, elements);

  Matrix gains(static_cast<Index>(candidates.size()), 3);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ObservationBlock block = fe::static_tilt_jacobian(solver, {candidates[i]}, cases);
    gains.row(static_cast<Index>(i)) << candidates[i], infoop::weak_gain(block, prior, weak).scalar_gain,
        infoop::weak_gain(block, prior, identity).scalar_gain;
  }
  art.write("gains.csv", "position,weak_gain,total_gain\n" + csv_rows(gains), "csv",
            "weak-direction and total whitened gain per candidate sensor");

  const LisResult lis = lis_select(modes, tau_lis);
  art.write("lis_modes.csv", modes_csv(lis.retained), "csv", "likelihood-informed modes of the current experiment");
  const json lis_json{{"tau", tau_lis},
                      {"eigenvalues", to_json(lis.retained.eigenvalues)},
                      {"variance_ratios", to_json(lis.variance_ratios)},
                      {"modes_csv", "lis_modes.csv"}};
  art.write("lis.json", lis_json.dump(2) + "\n", "json", "likelihood-informed subspace of the current experiment");

  Index best = 0;
  gains.col(1).maxCoeff(&best);
  const Index n_weak = (modes.eigenvalues.array() < tau_weak).count();
  json summary{{"weak_dimension", n_weak},
               {"lis_dimension", lis.retained.size()},
               {"best_candidate", gains(best, 0)},
               {"best_weak_gain", gains(best, 1)}};
  json echo{{"L", length},       {"n_elements", elements}, {"EI0", ei0},    {"n_loads", n_loads},
            {"P", load},         {"sigma", sigma},         {"sensors", sensors}, {"candidates", candidates},
            {"gamma", gamma},    {"eps", eps},             {"tau", tau_weak}, {"tau_lis", tau_lis}};
  return {echo, summary};
}

CommandResult schur(const Options& opt, const ConfigTable& section, Artifacts& art) {
  const std::string input = opt.input.value_or(section.text("input", ""));
  const Index m = opt.interest.value_or(section.integer("n_interest", 0));
  const double tol = section.number("pinv_tol", kDefaultPinvTol);
  section.reject_unknown();
  art.open();
  if (input.empty()) throw ConfigError("input", "a joint operator CSV is required");
  const Matrix joint = read_operator(input);
  if (m < 1 || m >= joint.rows()) throw ConfigError("n_interest", "must lie in [1, n - 1]");
  if (!(tol > 0.0)) throw ConfigError("pinv_tol", "must be positive");

  const JointInfoBlocks blocks = JointInfoBlocks::partition(joint, m);
  const InfoOperator effective = schur_complement(blocks, tol);
  std::ostringstream csv;
  io::write_operator_csv(csv, effective);
  art.write("schur.csv", csv.str(), "csv", "effective information of the interest block");

  const Matrix& eff = effective.dense();
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(blocks.mm).eigenvalues().maxCoeff();
  const double tr_mm = blocks.mm.trace();
  json summary{{"n_interest", m},
               {"n_nuisance", joint.rows() - m},
               {"trace_marginal", tr_mm},
               {"trace_effective", eff.trace()},
               {"information_loss_fraction", tr_mm > 0.0 ? 1.0 - eff.trace() / tr_mm : 0.0},
               {"min_eigenvalue_loss_rel", lmax > 0.0 ? min_eig(blocks.mm - eff) / lmax : 0.0}};
  art.write("summary.json", summary.dump(2) + "\n", "json", "information loss from eliminating nuisances");
  json echo{{"input", input}, {"n_interest", m}, {"pinv_tol", tol}};
  return {echo, summary};
}

}  // namespace infoop::cli
