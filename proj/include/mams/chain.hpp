#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mams {

using StateIndex = std::size_t;

/// Whether a transition carries an event (an arrival or a completion).
enum class Mark : std::uint8_t { Silent = 0, Event = 1 };

inline int mark_value(Mark m) { return static_cast<int>(m); }

struct Transition {
  StateIndex from = 0;
  StateIndex to = 0;
  Mark mark = Mark::Silent;
  double rate = 0.0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Finite-state continuous-time Markov chain whose transitions are marked
/// 0 or 1. The same type models both the arrival and the completion process.
///
/// Construction does not enforce the model assumptions; call validate().
class MarkedChain {
 public:
  MarkedChain() = default;
  MarkedChain(std::vector<std::string> states, std::vector<Transition> transitions);

  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::string& label(StateIndex i) const { return states_.at(i); }
  std::optional<StateIndex> index_of(const std::string& label) const;

  /// Largest single transition rate (0 for a chain without transitions).
  double max_rate() const noexcept;
  /// Total rate out of state i over all transitions, self-loops included.
  double total_outflow(StateIndex i) const;
  /// Total mark-1 rate out of state i.
  double event_rate_from(StateIndex i) const;

  /// Copy with every rate of the given mark multiplied by `factor`.
  MarkedChain scaled(Mark mark, double factor) const;
  /// Copy with every rate multiplied by `factor`.
  MarkedChain scaled(double factor) const;

  friend bool operator==(const MarkedChain&, const MarkedChain&) = default;

 private:
  std::vector<std::string> states_;
  std::vector<Transition> transitions_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool reducible = false;

  bool ok() const noexcept { return violations.empty(); }
};

/// Checks every model assumption and lists each violation found.
ValidationReport validate(const MarkedChain& chain);

/// Strong connectivity of the directed graph induced by the transitions.
bool is_strongly_connected(const MarkedChain& chain);

struct ChainAnalysis {
  Eigen::VectorXd pi;
  double event_rate = 0.0;
  Eigen::VectorXd per_state_event_rate;
  /// Distribution of the state entered by a mark-1 transition, weighted by
  /// the stationary rate of such transitions. All zeros when event_rate == 0.
  Eigen::VectorXd event_weighted_dist;
  /// ||pi Q||_inf of the computed solution.
  double balance_residual = 0.0;
};

/// Infinitesimal generator over all transitions regardless of mark.
Eigen::MatrixXd generator(const MarkedChain& chain);

/// Stationary distribution and event-rate quantities of a valid chain.
/// Throws StructuralError for a reducible chain, DomainError for any other
/// validation failure and NumericalError if the balance system is singular.
ChainAnalysis analyze(const MarkedChain& chain);

}  // namespace mams
