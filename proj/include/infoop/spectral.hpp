#pragma once

#include <cstdint>
#include <string_view>

#include "infoop/info_operator.hpp"

namespace infoop {

class PriorModel;

/// Metric under which a mode set is orthonormal.
enum class Metric { euclidean, mass, prior };

std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view name);

/// Leading eigenpairs of an information operator.
///
/// Eigenvalues are sorted in descending order. The largest-magnitude component
/// of every mode is positive. For the prior metric, `whitened_modes` holds the
/// Euclidean-orthonormal modes w_i with modes = C_pr^{1/2} w_i.
struct ModeSet {
  Vector eigenvalues;
  Matrix modes;
  Metric metric = Metric::euclidean;
  Vector residual_norms;
  Matrix whitened_modes;

  Index size() const noexcept { return eigenvalues.size(); }
  Index dim() const noexcept { return modes.rows(); }
};

/// Leading k eigenpairs of I psi = lambda psi.
ModeSet sym_eig(const InfoOperator& op, Index k);

/// Leading k eigenpairs of I c = lambda M c, modes M-orthonormal.
ModeSet mass_weighted_eig(const InfoOperator& op, const Matrix& mass, Index k);

/// Leading k eigenpairs of C^{1/2} I C^{1/2} w = lambda w with phi = C^{1/2} w.
ModeSet prior_preconditioned_eig(const InfoOperator& op, const PriorModel& prior, Index k);

struct RandomizedOptions {
  Index oversample = 8;
  Index power_iters = 2;
  std::uint64_t seed = 0;
};

/// Randomized range finder with subspace (power) iterations, using only
/// operator actions. Deterministic for a given seed.
ModeSet randomized_eig(const InfoOperator& op, Index k, const RandomizedOptions& options = {});

struct DiagonalEstimate {
  Vector mean;
  Vector std_error;
  Index probes = 0;
};

/// Hutchinson-type diagonal estimate from Rademacher probes z: mean of z .* (I z).
DiagonalEstimate estimate_diag(const InfoOperator& op, Index n_probes, std::uint64_t seed);

/// Flips each column so that its largest-magnitude entry is positive.
void fix_mode_signs(Matrix& modes);

}  // namespace infoop
