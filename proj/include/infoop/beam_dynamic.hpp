#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "infoop/info_operator.hpp"

// Harmonically forced simply supported beam observed through log |FRF|.
// Positions r, z are physical (0..L); greens_function takes normalized ones.
namespace infoop::dynamic {

using Complex = std::complex<double>;

struct DynamicSpec {
  double EI0 = 1.0;
  double rhoA = 1.0;
  double c_d = -1.0;  // negative selects 1% modal damping on mode 1
  double L = 1.0;
  double F_hat = 1.0;
  double sensor = 0.25;
  std::vector<double> excitations{0.3};
  std::vector<double> frequencies;
  double sigma_log = 0.01;
  Index n_modes = 60;
  Index n_elements = 64;

  double omega(Index n) const;  // undamped natural frequency of mode n >= 1
  double damping() const;       // c_d, or 2 * 0.01 * rhoA * omega_1 when unset
  void validate() const;
};

// n_freq frequencies, geometric between 0.5 omega_1 and 1.2 omega_3. With
// zero damping, points within 0.1% of a natural frequency are nudged off.
std::vector<double> default_frequencies(const DynamicSpec& spec, Index n_freq);

// (2/L) sum_n sin(n pi chi) sin(n pi s) / D_n(omega), summed as the exact
// static Green's function plus the rapidly converging dynamic remainder.
Complex greens_function(const DynamicSpec& spec, double chi, double s, double omega);

// F_hat * response at the sensor to excitation at z.
Complex frf(const DynamicSpec& spec, double z, double omega);

// Sine-basis Ritz model with per-element rigidity EI0 * exp(p_e). The span is
// statically determinate, so the static flexibility is exact for any
// rigidity field; only the dynamic remainder, forced by the exact sine
// projections of the static deflections, is expanded in the basis.
class RitzBeam {
 public:
  RitzBeam(const DynamicSpec& spec, Vector p);

  const DynamicSpec& spec() const noexcept { return spec_; }
  const Vector& log_stiffness() const noexcept { return p_; }
  bool uniform() const noexcept { return uniform_; }

  Complex frf(double z, double omega) const;

  // Re[(1/H) dH/dp_e] per element, with H itself.
  struct Row {
    Vector sensitivity;
    Complex value;
  };
  std::vector<Row> rows(double omega) const;  // one per excitation
  std::vector<Complex> values(double omega) const;

 private:
  Matrix moment_projections(double a) const;  // (element, mode): int_e phi_m m_a / k_m^2
  Vector static_coefficients(const Matrix& projections) const;
  Complex shift(double omega) const;
  Eigen::MatrixXcd solve(double omega, const Eigen::MatrixXcd& rhs) const;
  // delta for the excitations, preceded by the sensor column if requested
  Eigen::MatrixXcd remainders(double omega, bool with_sensor) const;

  struct Projection {
    Matrix moments;       // moment_projections
    Vector coefficients;  // sine coefficients of the static deflection
  };
  Projection project(double a) const;
  Vector static_products(double r, double z) const;
  double static_flexibility(double r, double z) const;

  DynamicSpec spec_;
  Vector p_;
  bool uniform_ = true;
  std::shared_ptr<const std::vector<Matrix>> curvature_;  // per element: k_n^2 k_m^2 (2/L) int_e sin sin
  Matrix stiffness_;
  Projection sensor_;
  std::vector<Projection> excitations_;
  std::vector<Vector> products_;     // per excitation: int_e m_r m_z
  std::vector<double> flexibility_;  // per excitation: exact static H
};

// Row over the uniform element grid at p = 0 (curvature-product series).
Vector log_frf_sensitivity(const DynamicSpec& spec, double z, double omega);

struct DynamicBlock {
  ObservationBlock block;
  Vector log_magnitude;       // model log|H| for the retained rows
  std::vector<bool> retained;  // per (excitation, frequency), excitation outer
};

// Rows with |H| below 1e-14 of the largest magnitude are dropped as antiresonant.
// A nonempty mask overrides that choice.
DynamicBlock dynamic_jacobian(const DynamicSpec& spec, const Vector& p,
                              const std::vector<bool>& mask = {});

// log|H| for every (excitation, frequency), excitation outer.
Vector dynamic_log_frf(const DynamicSpec& spec, const Vector& p);

// sum_q sum_k sigma_log^-2 row_e^2 per element (antiresonant rows skipped).
Vector dynamic_info_density(const DynamicSpec& spec, const Vector& p = {});

}  // namespace infoop::dynamic
