#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mams/chain.hpp"

namespace testing {

inline mams::Transition tr(std::size_t from, std::size_t to, int mark, double rate) {
  return {from, to, mark ? mams::Mark::Event : mams::Mark::Silent, rate};
}

inline mams::MarkedChain two_level_chain(double lh, double ll, double ah, double al) {
  return mams::MarkedChain({"H", "L"}, {tr(0, 0, 1, lh), tr(1, 1, 1, ll), tr(0, 1, 0, ah), tr(1, 0, 0, al)});
}

inline mams::MarkedChain sample_two_level_chain() { return two_level_chain(2.0, 0.2, 0.5, 0.1); }

inline mams::MarkedChain poisson_chain(double rate) { return mams::MarkedChain({"X"}, {tr(0, 0, 1, rate)}); }

/// Levels held for Exp(alpha), then moving to the next level cyclically.
inline mams::MarkedChain cyclic_chain(const std::vector<double>& levels, double alpha, const std::string& prefix = "S") {
  std::vector<std::string> states;
  std::vector<mams::Transition> ts;
  const std::size_t n = levels.size();
  for (std::size_t i = 0; i < n; ++i) {
    states.push_back(prefix + std::to_string(i));
    ts.push_back(tr(i, i, 1, levels[i]));
    if (n > 1) ts.push_back(tr(i, (i + 1) % n, 0, alpha));
  }
  return mams::MarkedChain(states, ts);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// Random irreducible marked chain: a Hamiltonian cycle guarantees strong
/// connectivity, extra transitions are added with probability `density`.
inline mams::MarkedChain random_chain(std::mt19937_64& rng, std::size_t n, double lo, double hi, double density = 0.5) {
  std::vector<std::string> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back("s" + std::to_string(i));
  std::vector<mams::Transition> ts;
  std::bernoulli_distribution coin(density);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::array<bool, 2>>> used(n, std::vector<std::array<bool, 2>>(n, {false, false}));
  auto add = [&](std::size_t i, std::size_t j, int mark) {
    if (i == j && mark == 0) return;
    if (used[i][j][static_cast<std::size_t>(mark)]) return;
    used[i][j][static_cast<std::size_t>(mark)] = true;
    ts.push_back(tr(i, j, mark, log_uniform(rng, lo, hi)));
  };
  if (n > 1) {
    for (std::size_t k = 0; k < n; ++k) add(order[k], order[(k + 1) % n], coin(rng) ? 1 : 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (int mark = 0; mark < 2; ++mark) {
        if (coin(rng)) add(i, j, mark);
      }
    }
  }
  // At least one event transition.
  bool any_event = false;
  for (const auto& t : ts) any_event = any_event || t.mark == mams::Mark::Event;
  if (!any_event) add(0, 0, 1);
  return mams::MarkedChain(states, ts);
}

/// Dense generator built directly from the transition list.
inline Eigen::MatrixXd dense_generator(const mams::MarkedChain& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : c.transitions()) {
    if (t.from == t.to) continue;
    q(static_cast<Eigen::Index>(t.from), static_cast<Eigen::Index>(t.to)) += t.rate;
    q(static_cast<Eigen::Index>(t.from), static_cast<Eigen::Index>(t.from)) -= t.rate;
  }
  return q;
}

inline Eigen::VectorXd event_rates(const mams::MarkedChain& c) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.size()));
  for (const auto& t : c.transitions())
    if (t.mark == mams::Mark::Event) r(static_cast<Eigen::Index>(t.from)) += t.rate;
  return r;
}

/// Stationary distribution by power iteration on the uniformized matrix.
inline Eigen::VectorXd power_iteration_pi(const mams::MarkedChain& c) {
  const Eigen::MatrixXd q = dense_generator(c);
  const auto n = q.rows();
  const double big = 1.5 * std::max(1e-12, (-q.diagonal()).maxCoeff());
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) + q / big;
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 2'000'000; ++it) {
    Eigen::RowVectorXd next = pi * p;
    next /= next.sum();
    if ((next - pi).lpNorm<Eigen::Infinity>() < 1e-16) return next.transpose();
    pi = next;
  }
  return pi.transpose();
}

/// Relative values through the deviation matrix (Pi - Q)^{-1} - Pi applied
/// to the centered event rates.
inline Eigen::VectorXd deviation_matrix_delta(const mams::MarkedChain& c) {
  const Eigen::MatrixXd q = dense_generator(c);
  const auto n = q.rows();
  const Eigen::VectorXd pi = power_iteration_pi(c);
  const Eigen::MatrixXd big_pi = Eigen::VectorXd::Ones(n) * pi.transpose();
  const Eigen::MatrixXd dev = (big_pi - q).fullPivLu().inverse() - big_pi;
  const Eigen::VectorXd rates = event_rates(c);
  const double lambda = pi.dot(rates);
  return dev * (rates - Eigen::VectorXd::Constant(n, lambda));
}

}  // namespace testing
