#pragma once

#include <cstdint>
#include <functional>

#include "mams/chain.hpp"
#include "mams/relative.hpp"

namespace mams {

/// A chain together with its stationary analysis and relative values.
struct ChainModel {
  MarkedChain chain;
  ChainAnalysis analysis;
  RelativeValues relative;
};

/// Validates, analyzes and solves relative values for one chain.
ChainModel model_chain(const MarkedChain& chain);

enum class Stability { Require, AllowUnstable };

/// Single-server queue with independent Markov-modulated arrival and
/// completion processes.
struct MamsSystem {
  ChainModel arrival;
  ChainModel completion;
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;

  bool stable() const noexcept { return rho < 1.0; }
};

/// Throws DomainError when either chain has zero event rate, or when
/// rho >= 1 unless `stability` is AllowUnstable.
MamsSystem build_system(const MarkedChain& arrival, const MarkedChain& completion,
                        Stability stability = Stability::Require);

struct QueueLengthBounds {
  double explicit_term = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Limit of (1 - rho) E[Q] as rho -> 1 with the chains' shape fixed.
  double heavy_traffic_constant = 0.0;
  double e_delta_arrival_weighted = 0.0;
  double e_delta_comp_weighted = 0.0;
};

/// Explicit term and the max/min sandwich on E[Q]. Requires rho < 1.
QueueLengthBounds bounds(const MamsSystem& system);

struct SystemState {
  std::uint64_t q = 0;
  StateIndex arrival = 0;
  StateIndex completion = 0;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Arrival and completion parts of the drift of
/// f(q, i_A, i_C) = q (q + 2 Delta_A(i_A) - 2 Delta_C(i_C)).
struct DriftTerms {
  double arrival = 0.0;
  double completion = 0.0;

  double total() const noexcept { return arrival + completion; }
};

/// Simplified closed forms:
///   g_A = 2 lambda q + (1 - 2 Delta_C(i_C)) lambda_{i_A} + 2 sum_j r_{i_A,j,1} Delta_A(j)
///   g_C = -2 mu q + ((1 - 2 Delta_A(i_A)) mu_{i_C} + 2 sum_j s_{i_C,j,1} Delta_C(j)) 1{q > 0}
DriftTerms drift_closed_form(const MamsSystem& system, const SystemState& state);

/// The same drift evaluated from the generator's transition sums, with
/// unused service u = (c - q)^+.
DriftTerms drift_definitional(const MamsSystem& system, const SystemState& state);

struct DriftSelfCheck {
  DriftTerms closed_form;
  DriftTerms definitional;

  double discrepancy() const noexcept;
};

/// Closed-form drift together with its definitional counterpart.
DriftSelfCheck drift_self_check(const MamsSystem& system, const SystemState& state);

/// Test function over (q, i_A, i_C).
using TestFunction = std::function<double(double q, StateIndex arrival, StateIndex completion)>;

/// Generator applied to an arbitrary test function, split into the part
/// driven by arrival-chain transitions and the part driven by completion
/// transitions.
DriftTerms apply_generator(const MamsSystem& system, const SystemState& state, const TestFunction& f);

}  // namespace mams
