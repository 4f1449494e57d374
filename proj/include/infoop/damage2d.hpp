#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "infoop/info_operator.hpp"
#include "infoop/spectral.hpp"

// Plane-stress damage identification on a rectangular bilinear-quad grid.
// Damage is one value per cell, stored row-major with row 0 at the bottom;
// the cell modulus is E0 (kappa + (1 - kappa)(1 - d)).
namespace infoop::damage2d {

enum class SensorKind { strain_xx, displacement_y, slope_y };

std::string to_string(SensorKind kind);
SensorKind sensor_kind_from_string(const std::string& name);

struct Sensor {
  SensorKind kind = SensorKind::strain_xx;
  double x = 0.0;
  double y = 0.0;
};

// Smooth Gaussian bump used as the true damage field; the default sits in
// the bottom fibres of the tension zone.
struct DamageBump {
  double x = 6.2;
  double y = 0.05;
  double sx = 0.6;
  double sy = 0.15;
  double peak = 0.6;
};

struct Damage2DConfig {
  Index nx = 81;  // cells along the span
  Index ny = 17;  // cells through the depth
  double length = 10.0;
  double height = 1.0;
  double E0 = 1000.0;
  double poisson = 0.3;
  double thickness = 1.0;
  double kappa = 0.1;
  std::vector<Sensor> sensors;
  std::vector<double> load_positions;  // centers of the top traction patches
  double load = 1.0;                   // total downward force per case
  double load_width = 0.25;
  double sigma_strain = 1e-4;
  double sigma_displacement = 1e-4;
  double sigma_slope = 1e-4;
  DamageBump damage;
  Index k = 8;
  double clamp_lo = 0.0;
  double clamp_hi = 0.9;
  double fd_step = 1e-6;
  double penalty = 1e-6;  // modal penalty relative to lambda_1

  // 17 x 81 cells, 14 bottom strain gauges, 3 deflection and 3 slope
  // sensors, 8 load cases.
  static Damage2DConfig full_scale();
  // Same layout on 9 x 41 cells.
  static Damage2DConfig test_scale();

  Index n_cells() const noexcept { return nx * ny; }
  Index n_observations() const noexcept {
    return static_cast<Index>(sensors.size() * load_positions.size());
  }
  Vector cell_centers_x() const;  // per cell, row-major
  Vector cell_centers_y() const;
  Vector true_field() const;
  void validate() const;
};

// Elementwise clamp into [lo, hi].
Vector clamp_field(const Vector& d, double lo, double hi);

class PlaneStressModel {
 public:
  explicit PlaneStressModel(Damage2DConfig config);

  const Damage2DConfig& config() const noexcept { return config_; }
  Index n_dofs() const noexcept { return 2 * (config_.nx + 1) * (config_.ny + 1); }

  Vector modulus(const Vector& d) const;

  // Nodal displacements (ux, uy interleaved) for every load case, sharing
  // one factorization of the stiffness.
  std::vector<Vector> solve(const Vector& d) const;
  Vector solve(const Vector& d, Index load_case) const;

  Vector load_vector(Index load_case, double scale = 1.0) const;

  // One value per sensor, in configuration order.
  Vector observe(const Vector& u) const;

  // Stacked observations: load case outer, sensor inner.
  Vector predict(const Vector& d) const;
  Vector noise_std() const;  // matching predict()

 private:
  Eigen::SparseMatrix<double> stiffness(const Vector& d) const;

  Damage2DConfig config_;
  Matrix unit_element_;          // 8 x 8 stiffness for E = 1
  std::vector<Index> free_map_;  // full dof -> reduced index, -1 if fixed
  Index n_free_ = 0;
  Eigen::SparseMatrix<double> pattern_;          // reduced, lower triangle
  std::vector<std::array<Index, 64>> scatter_;   // per cell: value slot or -1
  std::vector<Vector> loads_;
  struct Probe {
    std::array<Index, 4> dofs;
    std::array<double, 4> weight;
  };
  std::vector<Probe> probes_;
};

// Displacements for one load case (fresh factorization).
Vector solve_plane_stress(const Damage2DConfig& config, const Vector& d, Index load_case);

// Per-sensor values for one displacement vector.
Vector observe(const Damage2DConfig& config, const Vector& u);

struct FdJacobian {
  ObservationBlock block;
  std::vector<Index> unresolved;  // columns whose difference fell below 1e-12 of |Y|
};

// Central differences per cell with step fd_step; noise is the diagonal of
// the per-type standard deviations.
FdJacobian fd_jacobian(const PlaneStressModel& model, const Vector& nominal, double step);

struct Linearized {
  Vector nominal;
  Vector prediction;  // Y(nominal)
  FdJacobian jacobian;
};

Linearized linearize(const PlaneStressModel& model, const Vector& nominal);

// Y(true field) + Gaussian noise with the configured standard deviations.
Vector synthesize(const PlaneStressModel& model, std::uint64_t seed, double noise_scale = 1.0);

struct ModeReport {
  ModeSet modes;
  double ratio = 0.0;  // lambda_1 / lambda_k
  InfoOperator info;
};

ModeReport mode_report(const ObservationBlock& block, Index k);

struct SubspaceMap {
  Vector field;        // clamped reconstruction
  Vector unclamped;    // nominal + Psi c
  Vector coefficients;
  double penalty = 0.0;
};

// Linearized MAP restricted to the span of the first k modes with isotropic
// coefficient penalty penalty_rel * lambda_1, then clamped.
SubspaceMap subspace_map(const Linearized& lin, const Vector& data, const ModeSet& modes, Index k,
                         double penalty_rel, double lo, double hi);

}  // namespace infoop::damage2d
