#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "infoop/beam_dynamic.hpp"
#include "infoop/beam_fe.hpp"
#include "infoop/info_operator.hpp"
#include "infoop/prior.hpp"

// Damaged simply supported beam identified from static tilts, log |FRF| data,
// or both, in log-stiffness coordinates p_e = log(EI_e / EI0).
namespace infoop::fusion {

enum class Blocks { static_only, dynamic_only, hybrid };

std::string to_string(Blocks blocks);
// "static" | "dynamic" | "hybrid"; anything else is a ConfigError on "blocks".
Blocks blocks_from_string(const std::string& name);

// Smooth cos^2 bump; center and half-width are fractions of the span.
struct DamageProfile {
  double center = 0.7;
  double half_width = 0.08;
  double reduction = 0.4;  // fractional EI loss at the center
};

struct FusionBenchmark {
  double L = 1.0;
  double EI0 = 1.0;
  Index n_elements = 64;
  DamageProfile damage;
  std::vector<double> tilt_sensors{0.25, 0.75};  // physical positions
  Index n_loads = 81;
  double load = 1.0;
  double sigma_tilt = 1e-6;
  // Sensor, excitations, damping and frequencies; L, EI0 and the element
  // count are taken from the benchmark. Empty frequencies select
  // default_frequencies with n_frequencies points; a negative c_d selects
  // damping_ratio on mode 1.
  dynamic::DynamicSpec dynamic;
  Index n_frequencies = 24;
  double damping_ratio = 0.05;
  double gamma_pr = 10.0;
  double eps_pr = 1e-2;

  static FusionBenchmark standard();

  void validate() const;
  Vector element_centers() const;
  Vector true_log_stiffness() const;
  Vector rigidity(const Vector& p) const;
  std::vector<fe::MovingLoadCase> load_cases() const;
  dynamic::DynamicSpec dynamic_spec() const;
  PriorModel prior() const;  // zero mean
};

struct FusionData {
  Vector tilts;    // sensor outer, load inner
  Vector log_frf;  // excitation outer, frequency inner
};

FusionData predict(const FusionBenchmark& bench, const Vector& p);

// Forward model at the true field plus Gaussian noise with the declared
// standard deviations times noise_scale. noise_scale = 0 gives exact data.
FusionData synthesize_data(const FusionBenchmark& bench, std::uint64_t seed, double noise_scale = 1.0);

// Noise-whitened residual (model - data) and its Jacobian.
struct Linearization {
  Vector residual;
  Matrix jacobian;
};

struct LeastSquaresModel {
  std::function<Vector(const Vector&)> residual;
  std::function<Linearization(const Vector&)> linearize;
};

struct GaussNewtonOptions {
  Index max_iterations = 50;
  double step_tol = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  Index max_backtracks = 40;
  double max_step = 0.5;  // largest |step|_inf before the line search
};

struct MapResult {
  Vector p_map;
  Vector band;  // sqrt diag (J^T J + Q)^-1 at p_map
  Index iterations = 0;
  std::vector<double> misfit_history;  // objective before each step, then the final value
  bool converged = false;
  bool stagnated = false;
};

// Minimizes 1/2 |r(p)|^2 + 1/2 (p - m)^T Q (p - m) by Gauss-Newton with
// Armijo backtracking, starting from `start`. Steps longer than max_step in
// any coordinate are shortened first.
MapResult gauss_newton(const LeastSquaresModel& model, const PriorModel& prior, const Vector& start,
                       const GaussNewtonOptions& options = {});

LeastSquaresModel fusion_model(const FusionBenchmark& bench, const FusionData& data, Blocks blocks);

MapResult gauss_newton_map(const FusionBenchmark& bench, const FusionData& data, Blocks blocks,
                           const GaussNewtonOptions& options = {});

Vector posterior_band(const Matrix& whitened_jacobian, const PriorModel& prior);
Vector posterior_band(const FusionBenchmark& bench, const Vector& p_hat, Blocks blocks);

// Whitened Jacobian of the selected blocks at p, static rows first.
Matrix whitened_jacobian(const FusionBenchmark& bench, const Vector& p, Blocks blocks);

InfoOperator block_information(const FusionBenchmark& bench, const Vector& p, Blocks blocks);

struct DensityReport {
  Vector x;
  Vector static_density;
  Vector dynamic_density;
  Vector hybrid_density;  // diagonal of the assembled hybrid operator
};

// Diagonal information densities at the healthy uniform field.
DensityReport density_report(const FusionBenchmark& bench);

// |EI(p) - EI_true|_2 / |EI_true|_2
double rigidity_error(const FusionBenchmark& bench, const Vector& p);

}  // namespace infoop::fusion
