#pragma once

#include <optional>
#include <utility>

#include "mams/chain.hpp"

namespace mams {

/// Two-level arrival process (rates lambda_h >= lambda_l, switching H->L at
/// alpha_h and L->H at alpha_l) feeding an exponential server of rate mu.
struct TwoLevelParams {
  double lambda_h = 0.0;
  double lambda_l = 0.0;
  double alpha_h = 0.0;
  double alpha_l = 0.0;
  double mu = 0.0;

  /// Checks positivity/finiteness and swaps the H/L labels (with their
  /// switching rates) when lambda_h < lambda_l. Throws DomainError.
  static TwoLevelParams make(double lambda_h, double lambda_l, double alpha_h, double alpha_l, double mu);

  /// lambda = (lambda_h alpha_l + lambda_l alpha_h) / (alpha_l + alpha_h)
  double long_run_rate() const noexcept;
  bool intermittent_overload() const noexcept { return lambda_h > mu; }

  friend bool operator==(const TwoLevelParams&, const TwoLevelParams&) = default;
};

struct TwoLevelAnalysis {
  TwoLevelParams params;
  double lambda = 0.0;
  double rho = 0.0;
  double delta_h = 0.0;
  double delta_l = 0.0;
  /// E[Delta(Y^arrival)]
  double e_delta_arrival = 0.0;
  /// P(Y = H)
  double p_h = 0.0;
  double heavy_traffic_constant = 0.0;
};

/// Throws DomainError when lambda >= mu.
TwoLevelAnalysis analyze_two_level(const TwoLevelParams& params);

/// E[Q] given P(Y = H | Q = 0):
///   rho (E[Delta(Y^arrival)] + 1) / (1 - rho) + E[Delta(Y) | Q = 0].
double mean_q_given_empty_prob(const TwoLevelAnalysis& analysis, double p_h_given_empty);

/// Bounds on P(Y = H | Q = 0). Both uppers are clamped to [0, 1];
/// upper_slow exists only under intermittent overload (lambda_h > mu).
struct EmptyProbBounds {
  double lower = 0.0;
  double upper_fast = 0.0;
  std::optional<double> upper_slow;
};

EmptyProbBounds empty_prob_bounds(const TwoLevelParams& params, const TwoLevelAnalysis& analysis);

struct TwoLevelQueueBounds {
  double lower = 0.0;
  /// min(upper_fast, upper_slow) when both exist.
  double upper = 0.0;
  double upper_fast = 0.0;
  std::optional<double> upper_slow;
};

TwoLevelQueueBounds e_q_bounds(const TwoLevelParams& params, const TwoLevelAnalysis& analysis);

/// Arrival chain {H, L} and one-state completion chain {X}.
std::pair<MarkedChain, MarkedChain> to_mams(const TwoLevelParams& params);

}  // namespace mams
