#pragma once

#include <functional>

#include "infoop/info_operator.hpp"
#include "infoop/spectral.hpp"

// Closed-form simply supported beam: rotation sensor at normalized position
// rho, moving point load of magnitude P, rotation noise std sigma.
namespace infoop::beam {

struct BeamSpec {
  double L = 1.0;
  double P = 1.0;
  double sigma = 1.0;
  double rho = 0.25;
  double EI0 = 1.0;

  void validate() const;
};

// Value of a function with a jump at the sensor. Away from the jump both
// sides coincide.
struct OneSided {
  double left = 0.0;
  double right = 0.0;
  bool at_jump = false;

  double value() const noexcept { return right; }
};

inline double mu_left(double s) noexcept { return -s; }
inline double mu_right(double s) noexcept { return 1.0 - s; }

// Normalized adjoint moment field of a rotation sensor at rho.
OneSided mu(double rho, double s);

// Right-sided value of mu, for use in kernels.
double mu_value(double rho, double s) noexcept;

// min(s, zeta) * (1 - max(s, zeta)).
double moment_influence(double s, double zeta) noexcept;

// Integral over the load position of moment_influence(s,.) * moment_influence(sbar,.).
double moment_product_integral(double s, double sbar) noexcept;

// P^2 L^3 / (3 sigma^2).
double kappa_v(const BeamSpec& spec);

// Compliance kernel; right-sided at s == rho.
double full_kernel(const BeamSpec& spec, double s, double sbar);

// mu^2 s^2 (1-s)^2. rho may be 0 or 1 (pure one-branch limits).
double normalized_density(double rho, double s);

OneSided diag_density(const BeamSpec& spec, double s);

// density(rho+) / density(rho-) = (1-rho)^2 / rho^2.
double jump_ratio(double rho);

// Compliance field v(s) > 0 on [0,1].
using ComplianceField = std::function<double(double)>;

// Kernel in rigidity coordinates: v(s)^2 K(s,sbar) v(sbar)^2.
double ei_kernel(const BeamSpec& spec, const ComplianceField& v, double s, double sbar);

// B_in = int 2 sin(i pi s) mu(s) sin(n pi s) ds, closed form, i,n = 1..n.
Matrix influence_matrix(double rho, Index n);

// C_nm = int 2 sin(n pi s) sin(m pi s) w(s)^2 ds with w = mu (or w = 1 when
// unweighted), closed form.
Matrix weighted_gram(double rho, Index n, bool unweighted = false);

// T = (P/sigma)^2 B diag((L/n pi)^4) B^T, truncated at n terms in both indices.
Matrix galerkin_truncated(const BeamSpec& spec, Index n);

// Leading k modes of the sensor-weighted kernel operator on L2(0, L).
// Modes are coefficient vectors in the sine basis (Euclidean metric); use
// galerkin_mode_shapes to evaluate them. The sine index is kept complete by
// forming D^{1/2} C D^{1/2}, which has the same nonzero spectrum as T with
// an untruncated inner sum.
ModeSet galerkin_modes(const BeamSpec& spec, Index n_series, Index k, bool unweighted = false);

// Mode functions sampled at normalized positions s, unit norm in L2(0, L).
Matrix galerkin_mode_shapes(const BeamSpec& spec, const ModeSet& modes, const Vector& s,
                            bool unweighted = false);

// Midpoints (i + 0.5) / n.
Vector midpoint_grid(Index n);

// n x n kernel values on the midpoint grid.
Matrix kernel_grid(const BeamSpec& spec, Index n);

}  // namespace infoop::beam
