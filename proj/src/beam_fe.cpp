#include "infoop/beam_fe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infoop/error.hpp"

namespace infoop::fe {

namespace {

// Hermite shape functions and their derivatives on [0, 1], element size h.
struct Shape {
  double n[4];
};

Shape values(double xi, double h) {
  const double x2 = xi * xi, x3 = x2 * xi;
  return {{1 - 3 * x2 + 2 * x3, h * (xi - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (-x2 + x3)}};
}

Shape slopes(double xi, double h) {
  const double x2 = xi * xi;
  return {{(-6 * xi + 6 * x2) / h, 1 - 4 * xi + 3 * x2, (6 * xi - 6 * x2) / h, -2 * xi + 3 * x2}};
}

Shape curvatures(double xi, double h) {
  return {{(-6 + 12 * xi) / (h * h), (-4 + 6 * xi) / h, (6 - 12 * xi) / (h * h), (-2 + 6 * xi) / h}};
}

double eval(const Shape& s, const Vector& u, Index e) {
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) acc += s.n[a] * u(2 * e + a);
  return acc;
}

constexpr double kGauss = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2

}  // namespace

BeamMesh BeamMesh::uniform_spans(const std::vector<double>& span_lengths, Index elements_per_span,
                                 double ei0) {
  if (span_lengths.empty()) throw ConfigError("spans", "at least one span is required");
  if (elements_per_span < 1) throw ConfigError("elements", "elements per span must be >= 1");
  if (!(ei0 > 0.0)) throw ConfigError("EI0", "reference rigidity must be positive");
  const Index n_spans = static_cast<Index>(span_lengths.size());
  BeamMesh mesh;
  mesh.nodes.resize(n_spans * elements_per_span + 1);
  mesh.nodes(0) = 0.0;
  mesh.supports.push_back(0);
  double start = 0.0;
  for (Index s = 0; s < n_spans; ++s) {
    const double len = span_lengths[static_cast<std::size_t>(s)];
    if (!(len > 0.0)) throw ConfigError("spans", "span lengths must be positive");
    for (Index e = 1; e <= elements_per_span; ++e) {
      mesh.nodes(s * elements_per_span + e) =
          start + len * static_cast<double>(e) / static_cast<double>(elements_per_span);
    }
    start += len;
    mesh.supports.push_back((s + 1) * elements_per_span);
  }
  mesh.ei = Vector::Constant(n_spans * elements_per_span, ei0);
  return mesh;
}

Index BeamMesh::element_at(double x) const {
  const double x0 = nodes(0);
  const double x1 = nodes(nodes.size() - 1);
  if (!(x >= x0 && x <= x1)) {
    throw DimensionError("position " + std::to_string(x) + " lies outside the beam");
  }
  const auto* begin = nodes.data();
  const auto* end = nodes.data() + nodes.size();
  const auto it = std::upper_bound(begin, end, x);
  Index e = static_cast<Index>(it - begin) - 1;
  return std::clamp<Index>(e, 0, n_elements() - 1);
}

void BeamMesh::validate() const {
  if (nodes.size() < 2 || ei.size() != nodes.size() - 1) {
    throw DimensionError("beam mesh needs n_nodes = n_elements + 1 >= 2");
  }
  for (Index e = 0; e < n_elements(); ++e) {
    if (!(nodes(e + 1) > nodes(e))) throw DimensionError("beam nodes must be increasing");
    if (!(ei(e) > 0.0) || !std::isfinite(ei(e))) throw DimensionError("element rigidity must be positive");
  }
  for (Index s : supports) {
    if (s < 0 || s >= n_nodes()) throw DimensionError("support node index out of range");
  }
}

std::vector<MovingLoadCase> uniform_sweep(double length, Index n_z, double P, double sigma) {
  if (n_z < 2) throw ConfigError("n_loads", "a load sweep needs at least 2 positions");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "noise std must be positive");
  const double dz = length / static_cast<double>(n_z - 1);
  std::vector<MovingLoadCase> cases;
  cases.reserve(static_cast<std::size_t>(n_z));
  for (Index k = 0; k < n_z; ++k) {
    const double w = (k == 0 || k == n_z - 1) ? 0.5 * dz : dz;
    cases.push_back({length * static_cast<double>(k) / static_cast<double>(n_z - 1), P, w, sigma});
  }
  return cases;
}

Matrix element_stiffness(double ei, double h) {
  Matrix k(4, 4);
  const double h2 = h * h;
  k << 12, 6 * h, -12, 6 * h,
       6 * h, 4 * h2, -6 * h, 2 * h2,
       -12, -6 * h, 12, -6 * h,
       6 * h, 2 * h2, -6 * h, 4 * h2;
  return k * (ei / (h2 * h));
}

BeamSolver::BeamSolver(BeamMesh mesh) : mesh_(std::move(mesh)) {
  mesh_.validate();
  std::vector<Index> sup = mesh_.supports;
  std::sort(sup.begin(), sup.end());
  sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
  if (sup.size() < 2) throw SolverError("beam needs at least two vertical supports");

  const Index nd = mesh_.n_dofs();
  std::vector<bool> fixed(static_cast<std::size_t>(nd), false);
  for (Index s : sup) fixed[static_cast<std::size_t>(2 * s)] = true;
  std::vector<Index> map(static_cast<std::size_t>(nd), -1);
  for (Index d = 0; d < nd; ++d) {
    if (!fixed[static_cast<std::size_t>(d)]) {
      map[static_cast<std::size_t>(d)] = static_cast<Index>(free_.size());
      free_.push_back(d);
    }
  }
  const Index nf = static_cast<Index>(free_.size());
  Matrix k = Matrix::Zero(nf, nf);
  for (Index e = 0; e < mesh_.n_elements(); ++e) {
    const Matrix ke = element_stiffness(mesh_.ei(e), mesh_.element_size(e));
    for (int a = 0; a < 4; ++a) {
      const Index ra = map[static_cast<std::size_t>(2 * e + a)];
      if (ra < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const Index rb = map[static_cast<std::size_t>(2 * e + b)];
        if (rb >= 0) k(ra, rb) += ke(a, b);
      }
    }
  }
  // symmetric diagonal equilibration: deflection and rotation dofs differ in scale by h^2
  scale_ = k.diagonal().cwiseSqrt().cwiseInverse();
  factor_.compute(scale_.asDiagonal() * k * scale_.asDiagonal());
  if (factor_.info() != Eigen::Success || !(factor_.rcond() > 1e-14)) {
    throw SolverError("beam stiffness is singular or ill-conditioned");
  }
}

Vector BeamSolver::solve(const Vector& f) const {
  if (f.size() != mesh_.n_dofs()) throw DimensionError("load vector has the wrong size");
  const Index nf = static_cast<Index>(free_.size());
  Vector rhs(nf);
  for (Index i = 0; i < nf; ++i) rhs(i) = f(free_[static_cast<std::size_t>(i)]);
  const Vector sol = scale_.cwiseProduct(factor_.solve(scale_.cwiseProduct(rhs)));
  Vector u = Vector::Zero(mesh_.n_dofs());
  for (Index i = 0; i < nf; ++i) u(free_[static_cast<std::size_t>(i)]) = sol(i);
  return u;
}

Vector BeamSolver::load_vector(double z, double P) const {
  const Index e = mesh_.element_at(z);
  const double h = mesh_.element_size(e);
  const Shape s = values((z - mesh_.nodes(e)) / h, h);
  Vector f = Vector::Zero(mesh_.n_dofs());
  for (int a = 0; a < 4; ++a) f(2 * e + a) = P * s.n[a];
  return f;
}

Vector BeamSolver::rotation_functional(double r) const {
  const Index e = mesh_.element_at(r);
  const double h = mesh_.element_size(e);
  const Shape s = slopes((r - mesh_.nodes(e)) / h, h);
  Vector l = Vector::Zero(mesh_.n_dofs());
  for (int a = 0; a < 4; ++a) l(2 * e + a) = s.n[a];
  return l;
}

Vector BeamSolver::solve_primal(const MovingLoadCase& load) const {
  return solve(load_vector(load.z, load.P));
}

Vector BeamSolver::solve_adjoint(double r) const { return solve(rotation_functional(r)); }

double BeamSolver::deflection(const Vector& u, double x) const {
  const Index e = mesh_.element_at(x);
  const double h = mesh_.element_size(e);
  return eval(values((x - mesh_.nodes(e)) / h, h), u, e);
}

double BeamSolver::rotation(const Vector& u, double x) const {
  const Index e = mesh_.element_at(x);
  const double h = mesh_.element_size(e);
  return eval(slopes((x - mesh_.nodes(e)) / h, h), u, e);
}

double BeamSolver::moment(const Vector& u, double x) const {
  const Index e = mesh_.element_at(x);
  const double h = mesh_.element_size(e);
  return -mesh_.ei(e) * eval(curvatures((x - mesh_.nodes(e)) / h, h), u, e);
}

MomentSamples moment_fields(const BeamMesh& mesh, const Vector& dofs, const std::vector<double>& xi) {
  if (dofs.size() != mesh.n_dofs()) throw DimensionError("dof vector has the wrong size");
  const Index per = static_cast<Index>(xi.size());
  MomentSamples out;
  out.x.resize(mesh.n_elements() * per);
  out.moment.resize(mesh.n_elements() * per);
  out.element.resize(static_cast<std::size_t>(mesh.n_elements() * per));
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const double h = mesh.element_size(e);
    for (Index q = 0; q < per; ++q) {
      const double t = xi[static_cast<std::size_t>(q)];
      const Index i = e * per + q;
      out.x(i) = mesh.nodes(e) + t * h;
      out.moment(i) = -mesh.ei(e) * eval(curvatures(t, h), dofs, e);
      out.element[static_cast<std::size_t>(i)] = e;
    }
  }
  return out;
}

KernelSamples assemble_kernel(const BeamSolver& solver, double sensor,
                              const std::vector<MovingLoadCase>& cases, KernelParam param,
                              const std::vector<double>& xi) {
  if (cases.empty()) throw DimensionError("assemble_kernel: no load cases");
  const BeamMesh& mesh = solver.mesh();
  const MomentSamples adj = moment_fields(mesh, solver.solve_adjoint(sensor), xi);
  const Index n = adj.x.size();
  Matrix rows(static_cast<Index>(cases.size()), n);
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const MovingLoadCase& c = cases[k];
    const MomentSamples m = moment_fields(mesh, solver.solve_primal(c), xi);
    const double scale = std::sqrt(c.weight) / c.sigma;
    rows.row(static_cast<Index>(k)) = scale * adj.moment.cwiseProduct(m.moment).transpose();
  }
  if (param == KernelParam::rigidity) {
    for (Index i = 0; i < n; ++i) {
      const double v = 1.0 / mesh.ei(adj.element[static_cast<std::size_t>(i)]);
      rows.col(i) *= -v * v;
    }
  }
  Matrix k = rows.transpose() * rows;
  return {adj.x, 0.5 * (k + k.transpose())};
}

Vector static_tilts(const BeamSolver& solver, const std::vector<double>& sensors,
                    const std::vector<MovingLoadCase>& cases) {
  std::vector<Vector> fields;
  fields.reserve(cases.size());
  for (const auto& c : cases) fields.push_back(solver.solve_primal(c));
  Vector out(static_cast<Index>(sensors.size() * cases.size()));
  Index row = 0;
  for (double r : sensors) {
    for (const auto& u : fields) out(row++) = solver.rotation(u, r);
  }
  return out;
}

namespace {

// Per-element integrals of M_adj * M_z / EI_e^2, exact for linear moments.
Matrix curvature_products(const BeamSolver& solver, const std::vector<double>& sensors,
                          const std::vector<MovingLoadCase>& cases) {
  const BeamMesh& mesh = solver.mesh();
  const std::vector<double> gauss{kGauss, 1.0 - kGauss};
  std::vector<MomentSamples> primal;
  primal.reserve(cases.size());
  for (const auto& c : cases) primal.push_back(moment_fields(mesh, solver.solve_primal(c), gauss));
  const Index ne = mesh.n_elements();
  Matrix out(static_cast<Index>(sensors.size() * cases.size()), ne);
  Index row = 0;
  for (double r : sensors) {
    const MomentSamples adj = moment_fields(mesh, solver.solve_adjoint(r), gauss);
    for (const auto& m : primal) {
      for (Index e = 0; e < ne; ++e) {
        const double h = mesh.element_size(e);
        const double prod = adj.moment(2 * e) * m.moment(2 * e) + adj.moment(2 * e + 1) * m.moment(2 * e + 1);
        out(row, e) = 0.5 * h * prod;
      }
      ++row;
    }
  }
  return out;
}

}  // namespace

Matrix static_tilt_compliance_jacobian(const BeamSolver& solver, const std::vector<double>& sensors,
                                       const std::vector<MovingLoadCase>& cases) {
  return curvature_products(solver, sensors, cases);
}

ObservationBlock static_tilt_jacobian(const BeamSolver& solver, const std::vector<double>& sensors,
                                      const std::vector<MovingLoadCase>& cases) {
  const BeamMesh& mesh = solver.mesh();
  Matrix j = curvature_products(solver, sensors, cases);
  // d theta / d p_e = -EI_e * d theta / d v_e * v_e^2 = -(1/EI_e) int M_adj M
  for (Index e = 0; e < mesh.n_elements(); ++e) j.col(e) *= -1.0 / mesh.ei(e);
  Vector var(j.rows());
  Index row = 0;
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    for (const auto& c : cases) var(row++) = c.sigma * c.sigma / c.weight;
  }
  return ObservationBlock(std::move(j), NoiseCovariance::diagonal(std::move(var)), "static");
}

}  // namespace infoop::fe
