#include "mams/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mams/errors.hpp"

namespace mams {

ChainModel model_chain(const MarkedChain& chain) {
  ChainModel m;
  m.chain = chain;
  m.analysis = analyze(chain);
  m.relative = solve_relative(chain, m.analysis);
  return m;
}

MamsSystem build_system(const MarkedChain& arrival, const MarkedChain& completion, Stability stability) {
  MamsSystem s;
  s.arrival = model_chain(arrival);
  s.completion = model_chain(completion);
  s.lambda = s.arrival.analysis.event_rate;
  s.mu = s.completion.analysis.event_rate;
  if (!(s.lambda > 0.0)) throw DomainError("arrival chain has zero long-run event rate");
  if (!(s.mu > 0.0)) throw DomainError("completion chain has zero long-run event rate");
  s.rho = s.lambda / s.mu;
  if (stability == Stability::Require && !(s.rho < 1.0)) {
    std::ostringstream msg;
    msg << "unstable system: lambda = " << s.lambda << " >= mu = " << s.mu << " (rho = " << s.rho << ")";
    throw DomainError(msg.str());
  }
  return s;
}

QueueLengthBounds bounds(const MamsSystem& system) {
  if (!system.stable()) {
    std::ostringstream msg;
    msg << "bounds require rho < 1: lambda = " << system.lambda << ", mu = " << system.mu;
    throw DomainError(msg.str());
  }
  const auto& a = system.arrival;
  const auto& c = system.completion;
  const double rho = system.rho;

  QueueLengthBounds b;
  b.e_delta_arrival_weighted = a.analysis.event_weighted_dist.dot(a.relative.delta);
  b.e_delta_comp_weighted = c.analysis.event_weighted_dist.dot(c.relative.delta);
  b.explicit_term = (rho * b.e_delta_arrival_weighted + b.e_delta_comp_weighted + rho) / (1.0 - rho);
  b.lower = b.explicit_term + a.relative.min_value - c.relative.max_value;
  b.upper = b.explicit_term + a.relative.max_value - c.relative.min_value;
  b.heavy_traffic_constant = b.e_delta_arrival_weighted + b.e_delta_comp_weighted + 1.0;
  return b;
}

namespace {

// sum_j r_{i,j,1} Delta(j)
double event_weighted_successor(const ChainModel& m, StateIndex i) {
  double sum = 0.0;
  for (const auto& t : m.chain.transitions())
    if (t.from == i && t.mark == Mark::Event) sum += t.rate * m.relative.delta(t.to);
  return sum;
}

}  // namespace

DriftTerms drift_closed_form(const MamsSystem& system, const SystemState& state) {
  const auto& a = system.arrival;
  const auto& c = system.completion;
  const double q = static_cast<double>(state.q);
  const double da = a.relative.delta(state.arrival);
  const double dc = c.relative.delta(state.completion);
  const double lambda_i = a.analysis.per_state_event_rate(state.arrival);
  const double mu_i = c.analysis.per_state_event_rate(state.completion);

  DriftTerms g;
  g.arrival = 2.0 * system.lambda * q + (1.0 - 2.0 * dc) * lambda_i + 2.0 * event_weighted_successor(a, state.arrival);
  g.completion = -2.0 * system.mu * q;
  if (state.q > 0) g.completion += (1.0 - 2.0 * da) * mu_i + 2.0 * event_weighted_successor(c, state.completion);
  return g;
}

DriftTerms apply_generator(const MamsSystem& system, const SystemState& state, const TestFunction& f) {
  const double q = static_cast<double>(state.q);
  const double here = f(q, state.arrival, state.completion);
  DriftTerms g;
  for (const auto& t : system.arrival.chain.transitions()) {
    if (t.from != state.arrival) continue;
    g.arrival += t.rate * (f(q + mark_value(t.mark), t.to, state.completion) - here);
  }
  for (const auto& t : system.completion.chain.transitions()) {
    if (t.from != state.completion) continue;
    const int c = mark_value(t.mark);
    const int unused = std::max(c - static_cast<int>(std::min<std::uint64_t>(state.q, 1)), 0);
    g.completion += t.rate * (f(q - c + unused, state.arrival, t.to) - here);
  }
  return g;
}

DriftTerms drift_definitional(const MamsSystem& system, const SystemState& state) {
  const auto& da = system.arrival.relative.delta;
  const auto& dc = system.completion.relative.delta;
  return apply_generator(system, state, [&](double q, StateIndex ia, StateIndex ic) {
    return q * (q + 2.0 * da(static_cast<Eigen::Index>(ia)) - 2.0 * dc(static_cast<Eigen::Index>(ic)));
  });
}

double DriftSelfCheck::discrepancy() const noexcept {
  return std::max(std::abs(closed_form.arrival - definitional.arrival),
                  std::abs(closed_form.completion - definitional.completion));
}

DriftSelfCheck drift_self_check(const MamsSystem& system, const SystemState& state) {
  if (state.arrival >= system.arrival.chain.size() || state.completion >= system.completion.chain.size())
    throw DomainError("drift self-check: chain state out of range");
  return {drift_closed_form(system, state), drift_definitional(system, state)};
}

}  // namespace mams
