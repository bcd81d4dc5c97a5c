#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "mams/chain.hpp"

namespace mams {

/// Relative arrivals (or completions) of a marked chain: the limiting excess
/// of expected mark-1 events when starting in each state, over the long-run
/// rate. Normalized to zero stationary mean.
struct RelativeValues {
  Eigen::VectorXd delta;
  double max_value = 0.0;
  double min_value = 0.0;
  /// pi . delta of the returned vector.
  double stationary_mean_residual = 0.0;
};

/// Solves the Poisson system (-Q) delta = lambda_i - lambda together with
/// pi . delta = 0 as an (n+1) x n least-squares problem.
RelativeValues solve_relative(const MarkedChain& chain, const ChainAnalysis& analysis);

/// Per state: sum_{j,a} r_{i,j,a} (delta_j - delta_i + a) - lambda.
/// Zero for the exact solution.
Eigen::VectorXd drift_residuals(const MarkedChain& chain, const ChainAnalysis& analysis,
                                const RelativeValues& rel);

/// Truncation error targeted by the transient oracle.
inline constexpr double kOracleTruncationTolerance = 1e-9;

/// E[A_i(T)] - lambda T for every start state i, by uniformization.
/// `step_budget` caps the number of uniformized steps; exceeding it before
/// the truncation tolerance is met throws OracleBudgetError.
Eigen::VectorXd transient_oracle_all(const MarkedChain& chain, double horizon, std::size_t step_budget);

/// Single-start form of transient_oracle_all.
double transient_oracle(const MarkedChain& chain, StateIndex start_state, double horizon,
                        std::size_t step_budget);

/// 50 / (smallest state-changing outflow rate). 50 for a one-state chain.
double default_oracle_horizon(const MarkedChain& chain);

}  // namespace mams
