#include "mams/two_level.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mams/errors.hpp"

namespace mams {

TwoLevelParams TwoLevelParams::make(double lambda_h, double lambda_l, double alpha_h, double alpha_l, double mu) {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "two-level parameter " << name << " must be positive and finite (got " << v << ")";
      throw DomainError(msg.str());
    }
  };
  positive("lambda_h", lambda_h);
  positive("lambda_l", lambda_l);
  positive("alpha_h", alpha_h);
  positive("alpha_l", alpha_l);
  positive("mu", mu);
  if (lambda_h < lambda_l) {
    std::swap(lambda_h, lambda_l);
    std::swap(alpha_h, alpha_l);
  }
  return {lambda_h, lambda_l, alpha_h, alpha_l, mu};
}

double TwoLevelParams::long_run_rate() const noexcept {
  return (lambda_h * alpha_l + lambda_l * alpha_h) / (alpha_l + alpha_h);
}

TwoLevelAnalysis analyze_two_level(const TwoLevelParams& params) {
  const TwoLevelParams p = TwoLevelParams::make(params.lambda_h, params.lambda_l, params.alpha_h, params.alpha_l, params.mu);
  TwoLevelAnalysis a;
  a.params = p;
  a.lambda = p.long_run_rate();
  if (!(a.lambda < p.mu)) {
    std::ostringstream msg;
    msg << "unstable two-level system: lambda = " << a.lambda << " >= mu = " << p.mu;
    throw DomainError(msg.str());
  }
  a.rho = a.lambda / p.mu;
  const double alpha = p.alpha_h + p.alpha_l;
  const double gap = p.lambda_h - p.lambda_l;
  a.delta_h = p.alpha_h * gap / (alpha * alpha);
  a.delta_l = -p.alpha_l * gap / (alpha * alpha);
  a.e_delta_arrival = gap * gap * p.alpha_l * p.alpha_h / (a.lambda * alpha * alpha * alpha);
  a.p_h = p.alpha_l / alpha;
  a.heavy_traffic_constant = a.e_delta_arrival + 1.0;
  return a;
}

double mean_q_given_empty_prob(const TwoLevelAnalysis& analysis, double p_h_given_empty) {
  if (!(p_h_given_empty >= 0.0 && p_h_given_empty <= 1.0))
    throw DomainError("P(Y = H | Q = 0) must lie in [0, 1]");
  const auto& p = analysis.params;
  const double alpha = p.alpha_h + p.alpha_l;
  const double e_delta_empty = (p.lambda_h - p.lambda_l) / alpha * (p_h_given_empty - analysis.p_h);
  return analysis.rho * (analysis.e_delta_arrival + 1.0) / (1.0 - analysis.rho) + e_delta_empty;
}

namespace {

std::optional<double> slow_probability_bound(const TwoLevelParams& p, const TwoLevelAnalysis& a) {
  // Strict: the bound needs lambda_h > mu.
  if (!(p.lambda_h > p.mu)) return std::nullopt;
  return 1.0 / (1.0 - a.rho) / (p.lambda_h - p.mu) * (p.alpha_h * p.alpha_l / (p.alpha_h + p.alpha_l));
}

}  // namespace

EmptyProbBounds empty_prob_bounds(const TwoLevelParams& params, const TwoLevelAnalysis& analysis) {
  EmptyProbBounds b;
  b.upper_fast = std::clamp(params.alpha_l / (params.alpha_l + params.alpha_h), 0.0, 1.0);
  if (auto slow = slow_probability_bound(params, analysis)) b.upper_slow = std::clamp(*slow, 0.0, 1.0);
  return b;
}

TwoLevelQueueBounds e_q_bounds(const TwoLevelParams& params, const TwoLevelAnalysis& analysis) {
  const double alpha = params.alpha_h + params.alpha_l;
  const double base = analysis.rho / (1.0 - analysis.rho) * (analysis.e_delta_arrival + 1.0);
  const double swing = (params.lambda_h - params.lambda_l) / alpha * (params.alpha_l / alpha);

  TwoLevelQueueBounds b;
  b.lower = base - swing;
  b.upper_fast = base;
  b.upper = b.upper_fast;
  if (params.lambda_h > params.mu) {
    b.upper_slow = base - swing * (1.0 - params.alpha_h / ((1.0 - analysis.rho) * (params.lambda_h - params.mu)));
    b.upper = std::min(b.upper_fast, *b.upper_slow);
  }
  return b;
}

std::pair<MarkedChain, MarkedChain> to_mams(const TwoLevelParams& params) {
  MarkedChain arrival({"H", "L"}, {
                                      {0, 0, Mark::Event, params.lambda_h},
                                      {1, 1, Mark::Event, params.lambda_l},
                                      {0, 1, Mark::Silent, params.alpha_h},
                                      {1, 0, Mark::Silent, params.alpha_l},
                                  });
  MarkedChain completion({"X"}, {{0, 0, Mark::Event, params.mu}});
  return {std::move(arrival), std::move(completion)};
}

}  // namespace mams
