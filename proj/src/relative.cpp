#include "mams/relative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mams/errors.hpp"

namespace mams {

RelativeValues solve_relative(const MarkedChain& chain, const ChainAnalysis& analysis) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  const Eigen::MatrixXd q = generator(chain);

  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = -q;
  a.row(n) = analysis.pi.transpose();
  Eigen::VectorXd b(n + 1);
  b.head(n) = analysis.per_state_event_rate.array() - analysis.event_rate;
  b(n) = 0.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n) {
    std::ostringstream msg;
    msg << "relative-value system is rank deficient (rank " << qr.rank() << " of " << n << ")";
    const double cond = qr.maxPivot() / std::max(std::abs(qr.matrixQR()(n - 1, n - 1)), 1e-300);
    throw NumericalError(msg.str(), cond);
  }
  Eigen::VectorXd delta = qr.solve(b);
  // The Poisson rows are invariant to constant shifts; remove the residual mean.
  delta.array() -= analysis.pi.dot(delta);

  RelativeValues rel;
  rel.delta = delta;
  rel.max_value = delta.maxCoeff();
  rel.min_value = delta.minCoeff();
  rel.stationary_mean_residual = analysis.pi.dot(delta);

  const double residual = (-q * delta - b.head(n)).cwiseAbs().maxCoeff();
  const double tol = 1e-10 * std::max(chain.max_rate(), 1e-300);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "relative-value residual " << residual << " exceeds tolerance " << tol;
    const double cond = qr.maxPivot() / std::max(std::abs(qr.matrixQR()(n - 1, n - 1)), 1e-300);
    throw NumericalError(msg.str(), cond);
  }
  return rel;
}

Eigen::VectorXd drift_residuals(const MarkedChain& chain, const ChainAnalysis& analysis,
                                const RelativeValues& rel) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(chain.size()), -analysis.event_rate);
  for (const auto& t : chain.transitions()) {
    out(t.from) += t.rate * (rel.delta(t.to) - rel.delta(t.from) + mark_value(t.mark));
  }
  return out;
}

namespace {

// P(N > k) for N ~ Poisson(mean), k = 0..K, summed from the far tail down so
// small tail probabilities keep full relative precision.
std::vector<double> poisson_tails(double mean) {
  const auto k_max = static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(mean) + 40.0));
  std::vector<double> pmf(k_max + 1);
  const double log_mean = std::log(mean);
  for (std::size_t m = 0; m <= k_max; ++m) {
    const double dm = static_cast<double>(m);
    pmf[m] = std::exp(dm * log_mean - mean - std::lgamma(dm + 1.0));
  }
  std::vector<double> tail(k_max + 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = k_max; k-- > 0;) {
    acc += pmf[k + 1];
    tail[k] = acc;
  }
  return tail;
}

struct OracleRun {
  Eigen::VectorXd estimate;
  double error_bound = 0.0;
  bool complete = false;
};

OracleRun run_oracle(const MarkedChain& chain, double horizon, std::size_t step_budget) {
  const ChainAnalysis analysis = analyze(chain);
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::VectorXd v = analysis.per_state_event_rate.array() - analysis.event_rate;

  const Eigen::MatrixXd q = generator(chain);
  const double unif = (-q.diagonal()).maxCoeff();
  if (horizon <= 0.0) return {Eigen::VectorXd::Zero(n), 0.0, true};
  if (!(unif > 0.0)) return {v * horizon, 0.0, true};

  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) + q / unif;
  const std::vector<double> tail = poisson_tails(unif * horizon);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  double bound = v.cwiseAbs().maxCoeff() * horizon;
  for (std::size_t k = 0; k < tail.size(); ++k) {
    if (k >= step_budget) return {acc / unif, bound, false};
    acc += tail[k] * v;
    v = p * v;
    // ||P^m v||_inf <= ||v||_inf and sum_{j>k} P(N>j) <= mean * P(N>k).
    bound = v.cwiseAbs().maxCoeff() * horizon * tail[k];
    if (bound <= kOracleTruncationTolerance) break;
  }
  return {acc / unif, bound, true};
}

std::string budget_message(std::size_t step_budget, double bound) {
  std::ostringstream msg;
  msg << "transient oracle exhausted its budget of " << step_budget << " steps (error bound " << bound << ")";
  return msg.str();
}

}  // namespace

Eigen::VectorXd transient_oracle_all(const MarkedChain& chain, double horizon, std::size_t step_budget) {
  OracleRun run = run_oracle(chain, horizon, step_budget);
  if (!run.complete)
    throw OracleBudgetError(budget_message(step_budget, run.error_bound), run.estimate.cwiseAbs().maxCoeff(),
                            run.error_bound);
  return run.estimate;
}

double transient_oracle(const MarkedChain& chain, StateIndex start_state, double horizon,
                        std::size_t step_budget) {
  if (start_state >= chain.size()) throw DomainError("transient oracle: start state out of range");
  OracleRun run = run_oracle(chain, horizon, step_budget);
  const double estimate = run.estimate(static_cast<Eigen::Index>(start_state));
  if (!run.complete) throw OracleBudgetError(budget_message(step_budget, run.error_bound), estimate, run.error_bound);
  return estimate;
}

double default_oracle_horizon(const MarkedChain& chain) {
  if (chain.size() <= 1) return 50.0;
  const Eigen::VectorXd out = -generator(chain).diagonal();
  return 50.0 / out.minCoeff();
}

}  // namespace mams
