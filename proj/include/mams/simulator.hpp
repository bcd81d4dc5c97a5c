#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mams/bounds.hpp"

namespace mams {

struct SimConfig {
  std::uint64_t seed = 1;
  /// Stream index; sweeps use the point index so points are independent.
  std::uint64_t stream = 0;
  std::uint64_t num_events = 10'000'000;
  /// Fraction of simulated time discarded before estimation, in [0, 0.5).
  double warmup_fraction = 0.05;
  std::size_t num_batches = 20;
  SystemState initial_state{};

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Throws ConfigError when the configuration is unusable for `system`.
void validate_config(const SimConfig& config, const MamsSystem& system);

/// Time-average estimate with a 95% batch-means half-width.
struct SimEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;
  std::size_t batches_used = 0;

  /// |mean - value| <= k * ci_half_width
  bool within(double value, double k) const noexcept;

  friend bool operator==(const SimEstimate&, const SimEstimate&) = default;
};

struct SimCounts {
  std::uint64_t events = 0;
  std::uint64_t arrivals = 0;
  /// Completion transitions that removed a job.
  std::uint64_t completions = 0;
  /// Mark-1 completion transitions that found the queue empty.
  std::uint64_t unused_completions = 0;
  std::uint64_t initial_q = 0;
  std::uint64_t final_q = 0;
  std::uint64_t max_q = 0;
  double simulated_time = 0.0;
  /// Post-warmup time covered by the batches.
  double observed_time = 0.0;

  friend bool operator==(const SimCounts&, const SimCounts&) = default;
};

struct SimReport {
  SimEstimate e_q;
  SimEstimate p_empty;
  /// P(Y_A = i and Q = 0) per arrival state.
  std::vector<SimEstimate> p_joint_empty;
  /// Time average of mu_{Y_C} 1{Q = 0}.
  SimEstimate unused_rate;
  /// E[(mu_{Y_C} Delta_A(Y_A) - sum_j s_{Y_C,j,1} Delta_C(j)) 1{Q = 0}] / (mu - lambda).
  /// NaN for an unstable system.
  SimEstimate e_u_term;
  /// Time average of the closed-form drift g_A + g_C along the trajectory.
  SimEstimate drift;
  SimCounts counts;
  /// rho >= 1: stationary estimators do not converge.
  bool unstable = false;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Event-driven simulation of the joint (Q, Y_A, Y_C) chain. All estimators
/// are time-weighted over the post-warmup horizon, split into equal-time
/// batches.
SimReport simulate(const MamsSystem& system, const SimConfig& config);

/// P(Y_A = i | Q = 0) per arrival state, with half-widths combined
/// conservatively (relative half-widths add). Throws DomainError when the
/// estimated P(Q = 0) is zero.
std::vector<SimEstimate> estimate_empty_conditional(const MamsSystem& system, const SimReport& report);

}  // namespace mams
