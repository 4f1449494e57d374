#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "infoop/damage2d.hpp"
#include "infoop/error.hpp"
#include "infoop/parallel.hpp"

using namespace infoop;
using namespace infoop::damage2d;

namespace {

// Few cells, so that the whole parameter space fits under the observation count.
Damage2DConfig tiny_config() {
  Damage2DConfig c = Damage2DConfig::test_scale();
  c.nx = 8;
  c.ny = 2;
  return c;
}

Damage2DConfig single_load(double x) {
  Damage2DConfig c = Damage2DConfig::test_scale();
  c.load_positions = {x};
  return c;
}

Vector midspan_uy(const PlaneStressModel& m, const Vector& u) {
  const Index nx = m.config().nx;
  Vector out(m.config().ny + 1);
  for (Index j = 0; j <= m.config().ny; ++j) out(j) = u(2 * (j * (nx + 1) + nx / 2) + 1);
  return out;
}

const Linearized& test_scale_linearization() {
  static const Linearized lin = [] {
    const PlaneStressModel m(Damage2DConfig::test_scale());
    return linearize(m, Vector::Zero(m.config().n_cells()));
  }();
  return lin;
}

const ModeReport& test_scale_modes() {
  static const ModeReport rep = mode_report(test_scale_linearization().jacobian.block, 8);
  return rep;
}

template <class F>
std::string config_key(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("sensor kinds round-trip; unknown kinds name the key") {
  for (SensorKind k : {SensorKind::strain_xx, SensorKind::displacement_y, SensorKind::slope_y}) {
    CHECK(sensor_kind_from_string(to_string(k)) == k);
  }
  CHECK(config_key([] { sensor_kind_from_string("rotation"); }) == "sensors");
}

TEST_CASE("full-scale layout counts") {
  const Damage2DConfig c = Damage2DConfig::full_scale();
  CHECK(c.n_cells() == 1377);
  CHECK(c.n_observations() == 160);
  const PlaneStressModel m(c);
  CHECK(m.predict(Vector::Zero(c.n_cells())).size() == 160);
  CHECK(m.noise_std().size() == 160);
}

TEST_CASE("configuration validation names the offending key") {
  CHECK(config_key([] {
    Damage2DConfig c = Damage2DConfig::test_scale();
    c.kappa = 0.0;
    c.validate();
  }) == "kappa");
  CHECK(config_key([] {
    Damage2DConfig c = Damage2DConfig::test_scale();
    c.sensors.push_back({SensorKind::strain_xx, 11.0, 0.5});
    PlaneStressModel m(c);
  }) == "sensors");
  CHECK(config_key([] {
    Damage2DConfig c = Damage2DConfig::test_scale();
    c.k = 0;
    c.validate();
  }) == "k");
  CHECK(config_key([] {
    Damage2DConfig c = Damage2DConfig::test_scale();
    c.clamp_hi = -1.0;
    c.validate();
  }) == "clamp");
}

TEST_CASE("true field is a clamped bump in the bottom fibres") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const Vector d = c.true_field();
  CHECK(d.minCoeff() >= 0.0);
  CHECK(d.maxCoeff() <= c.damage.peak);
  Index at = 0;
  d.maxCoeff(&at);
  CHECK(c.cell_centers_y()(at) < 0.5 * c.height / static_cast<double>(c.ny) + 1e-12);
  CHECK(std::abs(c.cell_centers_x()(at) - c.damage.x) <= c.length / static_cast<double>(c.nx));
}

TEST_CASE("undamaged midspan deflection matches slender-beam theory") {
  // Euler-Bernoulli point load at midspan: P L^3 / (48 E I)
  const Damage2DConfig c = single_load(5.0);
  const PlaneStressModel m(c);
  const Vector u = m.solve(Vector::Zero(c.n_cells()), 0);
  const double inertia = c.thickness * std::pow(c.height, 3) / 12.0;
  const double expected = -c.load * std::pow(c.length, 3) / (48.0 * c.E0 * inertia);
  const Vector column = midspan_uy(m, u);
  const double neutral = 0.5 * (column(c.ny / 2) + column((c.ny + 1) / 2));
  CHECK(std::abs(neutral - expected) <= 0.1 * std::abs(expected));
}

TEST_CASE("uniform damage scales displacements by the modulus factor") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const PlaneStressModel m(c);
  const auto base = m.solve(Vector::Zero(c.n_cells()));
  for (double level : {0.2, 0.5, 0.9}) {
    const auto damaged = m.solve(Vector::Constant(c.n_cells(), level));
    const double factor = 1.0 / (c.kappa + (1.0 - c.kappa) * (1.0 - level));
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK((damaged[k] - factor * base[k]).cwiseAbs().maxCoeff() <= 1e-9 * factor * base[k].cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("response is linear in the applied traction") {
  Damage2DConfig c = Damage2DConfig::test_scale();
  const Vector d = c.true_field();
  const Vector u1 = solve_plane_stress(c, d, 3);
  c.load *= 2.0;
  const Vector u2 = solve_plane_stress(c, d, 3);
  CHECK((u2 - 2.0 * u1).cwiseAbs().maxCoeff() <= 1e-11 * u1.cwiseAbs().maxCoeff());
  c.load = 0.0;
  const PlaneStressModel zero(c);
  CHECK(zero.predict(d).isZero(0.0));
}

TEST_CASE("load vectors carry the total traction") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const PlaneStressModel m(c);
  for (Index k = 0; k < static_cast<Index>(c.load_positions.size()); ++k) {
    CHECK(m.load_vector(k).sum() == doctest::Approx(-c.load).epsilon(1e-12));
    CHECK(m.load_vector(k, 3.0).sum() == doctest::Approx(-3.0 * c.load).epsilon(1e-12));
  }
  CHECK_THROWS_AS(m.load_vector(8), DimensionError);
}

TEST_CASE("bending strain sign: tension below, compression above, flipped by load reversal") {
  Damage2DConfig c = single_load(5.0);
  c.sensors = {{SensorKind::strain_xx, 4.0, 0.05}, {SensorKind::strain_xx, 4.0, 0.95}};
  const Vector d = Vector::Zero(c.n_cells());
  const Vector sag = PlaneStressModel(c).predict(d);
  CHECK(sag(0) > 0.0);
  CHECK(sag(1) < 0.0);
  c.load = -1.0;
  const Vector hog = PlaneStressModel(c).predict(d);
  CHECK(hog(0) < 0.0);
  CHECK(hog(1) > 0.0);
  CHECK((hog + sag).cwiseAbs().maxCoeff() <= 1e-12 * sag.cwiseAbs().maxCoeff());
}

TEST_CASE("observe matches the free-function form") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const Vector d = c.true_field();
  const PlaneStressModel m(c);
  const Vector u = solve_plane_stress(c, d, 2);
  CHECK((observe(c, u) - m.observe(u)).cwiseAbs().maxCoeff() == 0.0);
  const Index ns = static_cast<Index>(c.sensors.size());
  CHECK((m.predict(d).segment(2 * ns, ns) - m.observe(u)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(m.observe(Vector::Zero(3)), DimensionError);
}

TEST_CASE("stiffness below the floor is rejected") {
  const Damage2DConfig c = tiny_config();
  const PlaneStressModel m(c);
  CHECK_THROWS_AS(m.solve(Vector::Constant(c.n_cells(), 2.0)), SolverError);
  CHECK_THROWS_AS(m.solve(Vector::Zero(3)), DimensionError);
}

TEST_CASE("finite-difference Jacobian converges at second order") {
  const Damage2DConfig c = tiny_config();
  const PlaneStressModel m(c);
  const Vector nominal = Vector::Constant(c.n_cells(), 0.3);
  const Matrix j1 = fd_jacobian(m, nominal, 4e-2).block.jacobian();
  const Matrix j2 = fd_jacobian(m, nominal, 2e-2).block.jacobian();
  const Matrix j3 = fd_jacobian(m, nominal, 1e-2).block.jacobian();
  const double ratio = (j1 - j2).norm() / (j2 - j3).norm();
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("doubling the modulus halves the Jacobian at the undamaged state") {
  Damage2DConfig c = tiny_config();
  const Vector nominal = Vector::Zero(c.n_cells());
  const Matrix j1 = fd_jacobian(PlaneStressModel(c), nominal, 1e-4).block.jacobian();
  c.E0 *= 2.0;
  const Matrix j2 = fd_jacobian(PlaneStressModel(c), nominal, 1e-4).block.jacobian();
  CHECK((2.0 * j2 - j1).norm() <= 1e-7 * j1.norm());  // difference roundoff at this step
}

TEST_CASE("a cell far from loads and sensors has a near-zero column") {
  const Matrix& j = test_scale_linearization().jacobian.block.jacobian();
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const Index corner = (c.ny - 1) * c.nx;  // top-left, above the pin
  CHECK(j.col(corner).norm() <= 1e-2 * j.colwise().norm().maxCoeff());
}

TEST_CASE("too small a step is reported as unresolved") {
  const Damage2DConfig c = tiny_config();
  const PlaneStressModel m(c);
  const FdJacobian fd = fd_jacobian(m, Vector::Zero(c.n_cells()), 1e-300);
  CHECK(static_cast<Index>(fd.unresolved.size()) == c.n_cells());
  CHECK(fd_jacobian(m, Vector::Zero(c.n_cells()), 1e-6).unresolved.empty());
  CHECK(config_key([&] { fd_jacobian(m, Vector::Zero(c.n_cells()), 0.0); }) == "fd_step");
}

TEST_CASE("Jacobian is independent of the worker count") {
  const Damage2DConfig c = tiny_config();
  const PlaneStressModel m(c);
  const Vector nominal = c.true_field();
  ::setenv("INFOOP_THREADS", "1", 1);
  const Matrix serial = fd_jacobian(m, nominal, 1e-6).block.jacobian();
  ::setenv("INFOOP_THREADS", "3", 1);
  const Matrix threaded = fd_jacobian(m, nominal, 1e-6).block.jacobian();
  ::unsetenv("INFOOP_THREADS");
  CHECK(serial == threaded);
}

TEST_CASE("information operator: PSD, rank bound, ordered spectrum") {
  const ModeReport& rep = test_scale_modes();
  const Matrix& info = rep.info.dense();
  CHECK(is_symmetric_psd(info));
  CHECK(numerical_rank(info) <= 160);
  const Vector& ev = rep.modes.eigenvalues;
  CHECK(ev.size() == 8);
  CHECK(ev.minCoeff() >= 0.0);
  for (Index i = 1; i < ev.size(); ++i) CHECK(ev(i) <= ev(i - 1));
  CHECK(rep.ratio == doctest::Approx(ev(0) / ev(7)));
}

TEST_CASE("randomized eigensolver agrees with the dense one on this operator") {
  const ModeReport& rep = test_scale_modes();
  const ModeSet approx = randomized_eig(rep.info, 8, RandomizedOptions{.oversample = 20, .power_iters = 6, .seed = 4});
  for (Index i = 0; i < 8; ++i) {
    CHECK(std::abs(approx.eigenvalues(i) - rep.modes.eigenvalues(i)) <= 1e-6 * rep.modes.eigenvalues(i));
  }
}

TEST_CASE("clamping is idempotent and only moves values toward the interval") {
  Vector d(6);
  d << -0.5, 0.0, 0.3, 0.9, 1.4, 0.95;
  const Vector c = clamp_field(d, 0.0, 0.9);
  CHECK(clamp_field(c, 0.0, 0.9) == c);
  for (Index i = 0; i < d.size(); ++i) {
    CHECK(std::abs(c(i) - d(i)) <= std::max(0.0, std::max(-d(i), d(i) - 0.9)) + 1e-15);
    CHECK(c(i) >= 0.0);
    CHECK(c(i) <= 0.9);
  }
}

TEST_CASE("subspace MAP: stationarity and orthogonality of the residual") {
  const Linearized& lin = test_scale_linearization();
  const ModeReport& rep = test_scale_modes();
  const PlaneStressModel m(Damage2DConfig::test_scale());
  const Vector data = synthesize(m, 1);
  const ObservationBlock& block = lin.jacobian.block;
  const Matrix a = block.whitened_jacobian() * rep.modes.modes.leftCols(8);
  const Vector r = block.noise().whiten(Vector(data - lin.prediction));

  const SubspaceMap pen = subspace_map(lin, data, rep.modes, 8, 1e-6, 0.0, 0.9);
  CHECK(pen.penalty == doctest::Approx(1e-6 * rep.modes.eigenvalues(0)));
  const Vector grad = a.transpose() * (r - a * pen.coefficients) - pen.penalty * pen.coefficients;
  CHECK(grad.norm() <= 1e-8 * (a.transpose() * r).norm());

  const SubspaceMap plain = subspace_map(lin, data, rep.modes, 8, 0.0, 0.0, 0.9);
  CHECK((a.transpose() * (r - a * plain.coefficients)).norm() <= 1e-8 * (a.transpose() * r).norm());
}

TEST_CASE("nominal data gives a zero update") {
  const Linearized& lin = test_scale_linearization();
  const SubspaceMap s = subspace_map(lin, lin.prediction, test_scale_modes().modes, 8, 1e-6, 0.0, 0.9);
  CHECK(s.coefficients.isZero(0.0));
  CHECK(s.unclamped == lin.nominal);
}

TEST_CASE("retaining every mode recovers the linearized update") {
  const Damage2DConfig c = tiny_config();
  const PlaneStressModel m(c);
  const Linearized lin = linearize(m, Vector::Constant(c.n_cells(), 0.1));
  const ModeReport rep = mode_report(lin.jacobian.block, c.n_cells());
  Vector delta(c.n_cells());
  for (Index i = 0; i < delta.size(); ++i) delta(i) = 0.05 * std::sin(0.7 * static_cast<double>(i));
  const Vector data = lin.prediction + lin.jacobian.block.jacobian() * delta;
  const SubspaceMap s = subspace_map(lin, data, rep.modes, c.n_cells(), 0.0, -1.0, 2.0);
  CHECK((s.unclamped - lin.nominal - delta).cwiseAbs().maxCoeff() <= 1e-6 * delta.cwiseAbs().maxCoeff());
  CHECK(config_key([&] { subspace_map(lin, data, rep.modes, c.n_cells() + 1, 0.0, 0.0, 0.9); }) == "k");
}

TEST_CASE("shipped seed: the retained subspace is improved, the rest untouched") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const PlaneStressModel m(c);
  const Linearized& lin = test_scale_linearization();
  const ModeReport& rep = test_scale_modes();
  const Vector data = synthesize(m, 1);
  const SubspaceMap s = subspace_map(lin, data, rep.modes, 8, c.penalty, c.clamp_lo, c.clamp_hi);
  const Matrix psi = rep.modes.modes.leftCols(8);
  const Vector truth = c.true_field();
  const double before = (psi.transpose() * (lin.nominal - truth)).norm();
  const double after = (psi.transpose() * (s.field - truth)).norm();
  CHECK(after <= before);
  const Vector update = s.unclamped - lin.nominal;
  CHECK((update - psi * (psi.transpose() * update)).norm() <= 1e-12 * update.norm());
  CHECK((s.field.array() >= c.clamp_lo).all());
  CHECK((s.field.array() <= c.clamp_hi).all());
}

TEST_CASE("synthesized data is deterministic per seed with the configured noise level") {
  const Damage2DConfig c = Damage2DConfig::test_scale();
  const PlaneStressModel m(c);
  CHECK(synthesize(m, 9) == synthesize(m, 9));
  CHECK(synthesize(m, 9) != synthesize(m, 10));
  const Vector exact = synthesize(m, 9, 0.0);
  CHECK(exact == m.predict(c.true_field()));
  double z = 0.0;
  Index count = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    z += (synthesize(m, seed) - exact).cwiseQuotient(m.noise_std()).squaredNorm();
    count += exact.size();
  }
  CHECK(std::sqrt(z / static_cast<double>(count)) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("parallel_for visits each index once and propagates failures") {
  std::vector<int> hits(100, 0);
  ::setenv("INFOOP_THREADS", "4", 1);
  parallel_for(100, [&](Index i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(50, [](Index i) {
                    if (i == 17) throw SolverError("boom");
                  }),
                  SolverError);
  ::setenv("INFOOP_THREADS", "zero", 1);
  CHECK(config_key([] { thread_count(); }) == "INFOOP_THREADS");
  ::unsetenv("INFOOP_THREADS");
  CHECK(thread_count() >= 1);
}
