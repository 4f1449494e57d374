#pragma once

#include <vector>

#include <Eigen/Dense>

#include "infoop/info_operator.hpp"

// Hermite-cubic Euler-Bernoulli beam. Deflection w is positive in the load
// direction, rotation is w', bending moment M = -EI w'' (sagging positive).
namespace infoop::fe {

struct BeamMesh {
  Vector nodes;                 // increasing coordinates
  Vector ei;                    // rigidity per element
  std::vector<Index> supports;  // node indices with the deflection fixed

  // Consecutive spans with supports at every span boundary.
  static BeamMesh uniform_spans(const std::vector<double>& span_lengths, Index elements_per_span,
                                double ei0);

  Index n_elements() const noexcept { return ei.size(); }
  Index n_nodes() const noexcept { return nodes.size(); }
  Index n_dofs() const noexcept { return 2 * nodes.size(); }
  double length() const { return nodes(nodes.size() - 1) - nodes(0); }
  double element_size(Index e) const { return nodes(e + 1) - nodes(e); }

  // Element containing x; the right end belongs to the last element.
  Index element_at(double x) const;

  void validate() const;
};

struct MovingLoadCase {
  double z = 0.0;
  double P = 1.0;
  double weight = 1.0;
  double sigma = 1.0;
};

// n_z equally spaced load positions on [0, length] with trapezoid weights.
std::vector<MovingLoadCase> uniform_sweep(double length, Index n_z, double P, double sigma);

// Positions (fractions of an element) where moment fields are sampled.
inline const std::vector<double>& quarter_points() {
  static const std::vector<double> xi{0.25, 0.75};
  return xi;
}

struct MomentSamples {
  Vector x;
  Vector moment;
  std::vector<Index> element;
};

class BeamSolver {
 public:
  explicit BeamSolver(BeamMesh mesh);

  const BeamMesh& mesh() const noexcept { return mesh_; }

  // Solves K u = f on the free dofs; constrained entries of u are zero.
  Vector solve(const Vector& f) const;

  Vector load_vector(double z, double P) const;
  Vector rotation_functional(double r) const;

  Vector solve_primal(const MovingLoadCase& load) const;
  // Field whose moment is the adjoint moment of a rotation sensor at r.
  Vector solve_adjoint(double r) const;

  double deflection(const Vector& u, double x) const;
  double rotation(const Vector& u, double x) const;
  double moment(const Vector& u, double x) const;

 private:
  BeamMesh mesh_;
  std::vector<Index> free_;
  Vector scale_;
  Eigen::LLT<Matrix> factor_;
};

Matrix element_stiffness(double ei, double h);

MomentSamples moment_fields(const BeamMesh& mesh, const Vector& dofs,
                            const std::vector<double>& xi = quarter_points());

enum class KernelParam { compliance, rigidity };

struct KernelSamples {
  Vector x;
  Matrix kernel;
};

// Sum over cases of (w_k / sigma_k^2) K_k(x) K_k(xbar), K_k = mu_r M_{z_k}.
// The rigidity variant applies the pointwise factor v(x)^2 v(xbar)^2.
KernelSamples assemble_kernel(const BeamSolver& solver, double sensor,
                              const std::vector<MovingLoadCase>& cases,
                              KernelParam param = KernelParam::compliance,
                              const std::vector<double>& xi = quarter_points());

// Rotations at every (sensor, case), sensor outer.
Vector static_tilts(const BeamSolver& solver, const std::vector<double>& sensors,
                    const std::vector<MovingLoadCase>& cases);

// Rows d theta / d p_e with p_e = log(EI_e / EI0), sensor outer, case inner.
// Noise variance of each row is sigma_k^2 / w_k.
ObservationBlock static_tilt_jacobian(const BeamSolver& solver, const std::vector<double>& sensors,
                                      const std::vector<MovingLoadCase>& cases);

// Same rows with respect to the element compliances v_e = 1 / EI_e.
Matrix static_tilt_compliance_jacobian(const BeamSolver& solver, const std::vector<double>& sensors,
                                       const std::vector<MovingLoadCase>& cases);

}  // namespace infoop::fe
