#include "mams/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "mams/errors.hpp"
#include "mams/rng.hpp"

namespace mams {

bool SimEstimate::within(double value, double k) const noexcept {
  return std::abs(mean - value) <= k * ci_half_width;
}

void validate_config(const SimConfig& config, const MamsSystem& system) {
  std::ostringstream msg;
  if (config.num_batches < 10) msg << "num_batches must be at least 10 (got " << config.num_batches << "); ";
  if (config.num_events < 10 * static_cast<std::uint64_t>(config.num_batches))
    msg << "num_events must be at least 10 * num_batches; ";
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 0.5))
    msg << "warmup_fraction must lie in [0, 0.5) (got " << config.warmup_fraction << "); ";
  if (config.initial_state.arrival >= system.arrival.chain.size())
    msg << "initial arrival state " << config.initial_state.arrival << " out of range; ";
  if (config.initial_state.completion >= system.completion.chain.size())
    msg << "initial completion state " << config.initial_state.completion << " out of range; ";
  const std::string text = msg.str();
  if (!text.empty()) throw ConfigError("invalid simulation config: " + text.substr(0, text.size() - 2));
}

namespace {

struct Step {
  double cumulative_rate;
  StateIndex to;
  bool event;
};

struct ChainTable {
  std::vector<std::vector<Step>> steps;
  std::vector<double> outflow;

  explicit ChainTable(const MarkedChain& chain) : steps(chain.size()), outflow(chain.size(), 0.0) {
    for (const auto& t : chain.transitions()) {
      outflow[t.from] += t.rate;
      steps[t.from].push_back({outflow[t.from], t.to, t.mark == Mark::Event});
    }
  }

  const Step& pick(StateIndex from, double u) const {
    const auto& list = steps[from];
    for (const auto& s : list)
      if (u < s.cumulative_rate) return s;
    return list.back();
  }
};

// Integrals of piecewise-constant metrics over equal-width time cells. When
// the cell array fills up, adjacent cells are merged and the width doubles,
// so the run length need not be known in advance.
class CellAccumulator {
 public:
  CellAccumulator(std::size_t metrics, std::size_t capacity, double width)
      : metrics_(metrics), capacity_(capacity), width_(width), cell_end_(width), sums_(metrics * capacity, 0.0) {}

  void add(double t, double dt, std::span<const double> values) {
    const double end = t + dt;
    while (t < end) {
      if (t >= cell_end_) {
        advance();
        continue;
      }
      const double seg = std::min(end, cell_end_) - t;
      double* cell = &sums_[cell_ * metrics_];
      for (std::size_t k = 0; k < metrics_; ++k) cell[k] += seg * values[k];
      t += seg;
    }
  }

  std::size_t complete_cells() const noexcept { return cell_; }
  double width() const noexcept { return width_; }
  double sum(std::size_t cell, std::size_t metric) const { return sums_[cell * metrics_ + metric]; }

 private:
  void advance() {
    ++cell_;
    if (cell_ == capacity_) {
      const std::size_t half = capacity_ / 2;
      for (std::size_t j = 0; j < half; ++j)
        for (std::size_t k = 0; k < metrics_; ++k)
          sums_[j * metrics_ + k] = sums_[2 * j * metrics_ + k] + sums_[(2 * j + 1) * metrics_ + k];
      std::fill(sums_.begin() + static_cast<std::ptrdiff_t>(half * metrics_), sums_.end(), 0.0);
      cell_ = half;
      width_ *= 2.0;
    }
    cell_end_ = static_cast<double>(cell_ + 1) * width_;
  }

  std::size_t metrics_;
  std::size_t capacity_;
  double width_;
  std::size_t cell_ = 0;
  double cell_end_;
  std::vector<double> sums_;
};

enum Metric : std::size_t { kQueue, kEmpty, kUnusedRate, kUnusedDelta, kDrift, kFirstJoint };

SimEstimate batch_estimate(const std::vector<double>& batch_means) {
  const double b = static_cast<double>(batch_means.size());
  double mean = 0.0;
  for (double x : batch_means) mean += x;
  mean /= b;
  double ss = 0.0;
  for (double x : batch_means) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (b - 1.0));
  return {mean, 1.96 * sd / std::sqrt(b), batch_means.size()};
}

SimEstimate scaled(SimEstimate e, double factor) {
  e.mean *= factor;
  e.ci_half_width *= std::abs(factor);
  return e;
}

}  // namespace

SimReport simulate(const MamsSystem& system, const SimConfig& config) {
  validate_config(config, system);

  const auto& arr = system.arrival;
  const auto& comp = system.completion;
  const std::size_t na = arr.chain.size();
  const std::size_t nc = comp.chain.size();
  const ChainTable arrivals(arr.chain);
  const ChainTable completions(comp.chain);

  // Per (i_A, i_C) constants of the drift and the unused-service integrand.
  std::vector<double> drift_base(na * nc), drift_busy(na * nc), unused_delta(na * nc), mu_of(nc);
  {
    std::vector<double> succ_a(na, 0.0), succ_c(nc, 0.0);
    for (const auto& t : arr.chain.transitions())
      if (t.mark == Mark::Event) succ_a[t.from] += t.rate * arr.relative.delta(t.to);
    for (const auto& t : comp.chain.transitions())
      if (t.mark == Mark::Event) succ_c[t.from] += t.rate * comp.relative.delta(t.to);
    for (std::size_t ic = 0; ic < nc; ++ic) mu_of[ic] = comp.analysis.per_state_event_rate(ic);
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double da = arr.relative.delta(ia);
      const double lam = arr.analysis.per_state_event_rate(ia);
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const double dc = comp.relative.delta(ic);
        drift_base[ia * nc + ic] = (1.0 - 2.0 * dc) * lam + 2.0 * succ_a[ia];
        drift_busy[ia * nc + ic] = (1.0 - 2.0 * da) * mu_of[ic] + 2.0 * succ_c[ic];
        unused_delta[ia * nc + ic] = mu_of[ic] * da - succ_c[ic];
      }
    }
  }
  const double drift_slope = 2.0 * (system.lambda - system.mu);

  double max_total = 0.0;
  for (double a : arrivals.outflow)
    for (double c : completions.outflow) max_total = std::max(max_total, a + c);

  const std::size_t metrics = kFirstJoint + na;
  const std::size_t capacity = std::max<std::size_t>(4096, 64 * config.num_batches);
  CellAccumulator acc(metrics, capacity + capacity % 2, 1.0 / (16.0 * max_total));
  std::vector<double> values(metrics, 0.0);

  StreamRng rng(config.seed, config.stream);
  std::uint64_t q = config.initial_state.q;
  StateIndex ia = config.initial_state.arrival;
  StateIndex ic = config.initial_state.completion;
  double t = 0.0;

  SimCounts counts;
  counts.initial_q = q;
  counts.max_q = q;

  for (std::uint64_t e = 0; e < config.num_events; ++e) {
    const double out_a = arrivals.outflow[ia];
    const double total = out_a + completions.outflow[ic];
    const double dt = rng.exponential(total);

    const bool empty = q == 0;
    const std::size_t joint = ia * nc + ic;
    const double dq = static_cast<double>(q);
    values[kQueue] = dq;
    values[kEmpty] = empty ? 1.0 : 0.0;
    values[kUnusedRate] = empty ? mu_of[ic] : 0.0;
    values[kUnusedDelta] = empty ? unused_delta[joint] : 0.0;
    values[kDrift] = drift_slope * dq + drift_base[joint] + (empty ? 0.0 : drift_busy[joint]);
    std::fill(values.begin() + kFirstJoint, values.end(), 0.0);
    if (empty) values[kFirstJoint + ia] = 1.0;
    acc.add(t, dt, values);
    t += dt;

    double u = rng.uniform() * total;
    if (u < out_a) {
      const Step& s = arrivals.pick(ia, u);
      if (s.event) {
        ++q;
        ++counts.arrivals;
        counts.max_q = std::max(counts.max_q, q);
      }
      ia = s.to;
    } else {
      const Step& s = completions.pick(ic, u - out_a);
      if (s.event) {
        if (q > 0) {
          --q;
          ++counts.completions;
        } else {
          ++counts.unused_completions;
        }
      }
      ic = s.to;
    }
  }
  counts.events = config.num_events;
  counts.final_q = q;
  counts.simulated_time = t;

  const std::size_t cells = acc.complete_cells();
  const double width = acc.width();
  const auto warm = static_cast<std::size_t>(std::ceil(config.warmup_fraction * t / width));
  if (cells < warm + config.num_batches) {
    throw ConfigError("simulation too short: not enough post-warmup time for the requested batches");
  }
  const std::size_t available = cells - warm;
  const std::size_t per_batch = available / config.num_batches;
  const std::size_t first = warm + available % config.num_batches;
  const double batch_time = static_cast<double>(per_batch) * width;
  counts.observed_time = batch_time * static_cast<double>(config.num_batches);

  auto estimate = [&](std::size_t metric) {
    std::vector<double> means(config.num_batches);
    for (std::size_t b = 0; b < config.num_batches; ++b) {
      double s = 0.0;
      for (std::size_t c = 0; c < per_batch; ++c) s += acc.sum(first + b * per_batch + c, metric);
      means[b] = s / batch_time;
    }
    return batch_estimate(means);
  };

  SimReport report;
  report.unstable = !system.stable();
  report.e_q = estimate(kQueue);
  report.p_empty = estimate(kEmpty);
  report.unused_rate = estimate(kUnusedRate);
  report.drift = estimate(kDrift);
  if (system.stable()) {
    report.e_u_term = scaled(estimate(kUnusedDelta), 1.0 / (system.mu - system.lambda));
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.e_u_term = {nan, nan, config.num_batches};
  }
  for (std::size_t i = 0; i < na; ++i) report.p_joint_empty.push_back(estimate(kFirstJoint + i));
  report.counts = counts;
  return report;
}

std::vector<SimEstimate> estimate_empty_conditional(const MamsSystem& system, const SimReport& report) {
  const SimEstimate& empty = report.p_empty;
  if (!(empty.mean > 0.0))
    throw DomainError("estimated P(Q = 0) is zero; the run is too short to condition on an empty queue");
  if (report.p_joint_empty.size() != system.arrival.chain.size())
    throw DomainError("report does not match the system's arrival chain");
  const double rel_empty = empty.ci_half_width / empty.mean;
  std::vector<SimEstimate> out;
  out.reserve(report.p_joint_empty.size());
  for (const auto& joint : report.p_joint_empty) {
    SimEstimate e;
    e.mean = joint.mean / empty.mean;
    e.ci_half_width = joint.mean > 0.0 ? e.mean * (joint.ci_half_width / joint.mean + rel_empty) : 0.0;
    e.batches_used = joint.batches_used;
    out.push_back(e);
  }
  return out;
}

}  // namespace mams
