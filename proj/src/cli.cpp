#include "mams/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mams/bounds.hpp"
#include "mams/errors.hpp"
#include "mams/presets.hpp"
#include "mams/relative.hpp"
#include "mams/two_level.hpp"

namespace mams {

namespace {

constexpr double kVerdictWidths = 3.0;

std::string num(double v) { return format_number(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + "\"";
}

MamsSystem system_of(const SystemSpec& spec, Stability stability) {
  auto [arrival, completion] = chains_of(spec);
  return build_system(arrival, completion, stability);
}

void fill_bounds(const SystemSpec& spec, const MamsSystem& system, PointResult& r) {
  const QueueLengthBounds b = bounds(system);
  r.explicit_term = b.explicit_term;
  r.heavy_traffic_const = b.heavy_traffic_constant;
  if (const auto* p = std::get_if<TwoLevelParams>(&spec.model)) {
    const TwoLevelParams params = TwoLevelParams::make(p->lambda_h, p->lambda_l, p->alpha_h, p->alpha_l, p->mu);
    const TwoLevelAnalysis a = analyze_two_level(params);
    const TwoLevelQueueBounds tb = e_q_bounds(params, a);
    r.lower = tb.lower;
    r.upper_fast = tb.upper_fast;
    r.upper_slow = tb.upper_slow;
    r.upper = tb.upper;
    r.heavy_traffic_const = a.heavy_traffic_constant;
  } else {
    r.lower = b.lower;
    r.upper = b.upper;
  }
}

bool inside(const PointResult& r) {
  const double ci = r.sim->e_q.ci_half_width;
  return r.sim->e_q.mean >= *r.lower - kVerdictWidths * ci && r.sim->e_q.mean <= *r.upper + kVerdictWidths * ci;
}

// ---- command-line plumbing -------------------------------------------------

struct CommonOptions {
  std::string spec_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> events;
  std::optional<double> warmup;
  std::optional<std::size_t> batches;
  std::string out_path;
  bool json = false;
  std::size_t jobs = 0;
  std::string sweep_param;
  std::vector<double> sweep_values;
  bool analytic_only = false;
};

SystemSpec load(const CommonOptions& o) {
  if (!o.spec_path.empty() && !o.preset.empty()) throw ParseError("give either a spec file or --preset, not both");
  if (!o.preset.empty()) return load_preset(o.preset);
  if (o.spec_path.empty()) throw ParseError("a spec file or --preset is required");
  return load_spec_file(o.spec_path);
}

SimConfig sim_config(const SystemSpec& spec, const CommonOptions& o) {
  SimConfig c = spec.simulation.value_or(SimConfig{});
  if (o.seed) c.seed = *o.seed;
  if (o.events) c.num_events = *o.events;
  if (o.warmup) c.warmup_fraction = *o.warmup;
  if (o.batches) c.num_batches = *o.batches;
  return c;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << content;
  if (!f) throw ParseError("cannot write '" + path + "'");
}

void print_chain(std::ostream& out, const char* name, const char* delta_name, const ChainModel& m) {
  out << name << " chain (" << m.chain.size() << " states, event rate " << num(m.analysis.event_rate) << ")\n";
  for (StateIndex i = 0; i < m.chain.size(); ++i) {
    const std::string& s = m.chain.label(i);
    out << "  pi(" << s << ") = " << num(m.analysis.pi(static_cast<Eigen::Index>(i))) << "  " << delta_name << "(" << s
        << ") = " << num(m.relative.delta(static_cast<Eigen::Index>(i))) << "\n";
  }
}

nlohmann::json chain_json(const ChainModel& m) {
  nlohmann::json states = nlohmann::json::array();
  for (StateIndex i = 0; i < m.chain.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    states.push_back({{"state", m.chain.label(i)},
                      {"pi", m.analysis.pi(k)},
                      {"delta", m.relative.delta(k)},
                      {"event_weight", m.analysis.event_weighted_dist(k)}});
  }
  return {{"event_rate", m.analysis.event_rate}, {"states", states}};
}

int cmd_analyze(const CommonOptions& o, std::ostream& out) {
  const SystemSpec spec = load(o);
  const MamsSystem system = system_of(spec, Stability::AllowUnstable);
  if (!system.stable()) {
    throw DomainError("unstable system: lambda = " + num(system.lambda) + " >= mu = " + num(system.mu) +
                      " (rho = " + num(system.rho) + ")");
  }
  PointResult r;
  fill_bounds(spec, system, r);
  const QueueLengthBounds b = bounds(system);

  std::optional<TwoLevelAnalysis> two;
  std::optional<EmptyProbBounds> empty;
  if (const auto* p = std::get_if<TwoLevelParams>(&spec.model)) {
    const TwoLevelParams params = TwoLevelParams::make(p->lambda_h, p->lambda_l, p->alpha_h, p->alpha_l, p->mu);
    two = analyze_two_level(params);
    empty = empty_prob_bounds(params, *two);
  }

  if (o.json) {
    nlohmann::json doc = {{"lambda", system.lambda},
                          {"mu", system.mu},
                          {"rho", system.rho},
                          {"arrival", chain_json(system.arrival)},
                          {"completion", chain_json(system.completion)},
                          {"e_delta_arrival_weighted", b.e_delta_arrival_weighted},
                          {"e_delta_comp_weighted", b.e_delta_comp_weighted},
                          {"explicit_term", b.explicit_term},
                          {"lower", *r.lower},
                          {"upper", *r.upper},
                          {"heavy_traffic_const", *r.heavy_traffic_const}};
    if (two) {
      doc["two_level"] = {{"delta_h", two->delta_h},
                          {"delta_l", two->delta_l},
                          {"e_delta_arrival", two->e_delta_arrival},
                          {"upper_fast", *r.upper_fast},
                          {"p_h_given_empty_upper_fast", empty->upper_fast}};
      if (r.upper_slow) {
        doc["two_level"]["upper_slow"] = *r.upper_slow;
        doc["two_level"]["p_h_given_empty_upper_slow"] = *empty->upper_slow;
      }
    }
    out << doc.dump(2) << "\n";
    return 0;
  }

  if (!spec.description.empty()) out << spec.description << "\n";
  out << "lambda = " << num(system.lambda) << "\n"
      << "mu = " << num(system.mu) << "\n"
      << "rho = " << num(system.rho) << "\n";
  print_chain(out, "arrival", "Delta_A", system.arrival);
  print_chain(out, "completion", "Delta_C", system.completion);
  out << "E[Delta_A(Y_A^arrival)] = " << num(b.e_delta_arrival_weighted) << "\n"
      << "E[Delta_C(Y_C^comp)] = " << num(b.e_delta_comp_weighted) << "\n"
      << "explicit term = " << num(b.explicit_term) << "\n";
  if (two) {
    out << "two-level arrivals:\n"
        << "  Delta(H) = " << num(two->delta_h) << "\n"
        << "  Delta(L) = " << num(two->delta_l) << "\n"
        << "  P(Y = H | Q = 0) <= " << num(empty->upper_fast) << " (fast switching)";
    if (empty->upper_slow) out << ", <= " << num(*empty->upper_slow) << " (slow switching)";
    out << "\n  upper bound (fast switching) = " << num(*r.upper_fast) << "\n";
    if (r.upper_slow) out << "  upper bound (slow switching) = " << num(*r.upper_slow) << "\n";
  }
  out << "lower bound = " << num(*r.lower) << "\n"
      << "upper bound = " << num(*r.upper) << "\n"
      << "heavy-traffic constant = " << num(*r.heavy_traffic_const) << "\n";
  return 0;
}

void print_estimate(std::ostream& out, const std::string& name, const SimEstimate& e) {
  out << name << " = " << num(e.mean) << " +/- " << num(e.ci_half_width) << "\n";
}

int cmd_simulate(const CommonOptions& o, std::ostream& out) {
  const SystemSpec spec = load(o);
  const SimConfig config = sim_config(spec, o);
  const MamsSystem system = system_of(spec, Stability::AllowUnstable);
  if (!system.stable()) {
    throw DomainError("unstable system: lambda = " + num(system.lambda) + " >= mu = " + num(system.mu) +
                      " (rho = " + num(system.rho) + ")");
  }
  PointResult r;
  r.lambda = system.lambda;
  r.mu = system.mu;
  r.rho = system.rho;
  fill_bounds(spec, system, r);
  r.sim = simulate(system, config);
  const SimReport& rep = *r.sim;

  out << "events = " << rep.counts.events << " (seed " << config.seed << ", stream " << config.stream << ")\n"
      << "simulated time = " << num(rep.counts.simulated_time) << ", observed = " << num(rep.counts.observed_time)
      << " in " << rep.e_q.batches_used << " batches\n";
  print_estimate(out, "E[Q]", rep.e_q);
  print_estimate(out, "P(Q = 0)", rep.p_empty);
  for (StateIndex i = 0; i < rep.p_joint_empty.size(); ++i)
    print_estimate(out, "P(Y_A = " + system.arrival.chain.label(i) + ", Q = 0)", rep.p_joint_empty[i]);
  print_estimate(out, "unused service rate", rep.unused_rate);
  out << "  (mu - lambda = " << num(system.mu - system.lambda) << ")\n";
  print_estimate(out, "E_U term", rep.e_u_term);
  out << "  (explicit term + E_U term = " << num(*r.explicit_term + rep.e_u_term.mean) << ")\n";
  print_estimate(out, "mean drift of f", rep.drift);
  out << "lower bound = " << num(*r.lower) << "\n"
      << "upper bound = " << num(*r.upper) << "\n"
      << "verdict: " << (inside(r) ? "inside" : "outside") << " [lower, upper]\n";

  if (!o.out_path.empty()) write_file(o.out_path, csv_header() + "\n" + csv_row(r) + "\n");
  return 0;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out) {
  const SystemSpec spec = load(o);
  SweepSpec sweep;
  if (!o.sweep_param.empty()) {
    if (o.sweep_values.empty()) throw ParseError("--param needs --values");
    sweep.parameter = o.sweep_param;
    sweep.values = o.sweep_values;
    if (spec.sweep && spec.sweep->parameter == o.sweep_param) sweep.linked = spec.sweep->linked;
  } else if (spec.sweep) {
    sweep = *spec.sweep;
    if (!o.sweep_values.empty()) sweep.values = o.sweep_values;
  } else {
    throw ParseError("spec has no sweep block; use --param and --values");
  }
  std::optional<SimConfig> config;
  if (!o.analytic_only) config = sim_config(spec, o);
  const std::size_t jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  const auto results = run_sweep(spec, sweep, config, jobs);

  std::string csv = csv_header() + "\n";
  for (const auto& r : results) csv += csv_row(r) + "\n";
  if (o.out_path.empty()) {
    out << csv;
  } else {
    write_file(o.out_path, csv);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.ok() ? 0 : 1;
    out << results.size() << " points written to " << o.out_path;
    if (failed) out << " (" << failed << " failed)";
    out << "\n";
  }
  return 0;
}

int cmd_validate(const CommonOptions& o, std::ostream& out) {
  const SystemSpec spec = load(o);
  int code = 0;
  for (const auto& c : validate_spec(spec)) {
    out << (c.skipped ? "SKIP " : c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
    if (!c.passed && !c.skipped) code = code == 0 ? c.severity : std::min(code, c.severity);
  }
  return code;
}

}  // namespace

std::string format_number(std::optional<double> value) {
  if (!value) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", *value);
  return buf;
}

PointResult evaluate_point(const SystemSpec& spec, const std::optional<SimConfig>& sim) {
  PointResult r;
  try {
    const MamsSystem system = system_of(spec, Stability::AllowUnstable);
    r.lambda = system.lambda;
    r.mu = system.mu;
    r.rho = system.rho;
    if (!system.stable()) {
      throw DomainError("unstable system: lambda = " + num(system.lambda) + " >= mu = " + num(system.mu));
    }
    fill_bounds(spec, system, r);
    if (sim) r.sim = simulate(system, *sim);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<PointResult> run_sweep(const SystemSpec& spec, const SweepSpec& sweep,
                                   const std::optional<SimConfig>& sim, std::size_t jobs) {
  std::vector<PointResult> results(sweep.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < results.size(); k = next++) {
      PointResult r;
      try {
        const SystemSpec point = at_sweep_point(spec, sweep, sweep.values[k]);
        std::optional<SimConfig> config = sim;
        if (config) config->stream = k;
        r = evaluate_point(point, config);
      } catch (const Error& e) {
        r.error = e.what();
      }
      r.param = sweep.values[k];
      results[k] = std::move(r);
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, results.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return results;
}

std::string csv_header() {
  return "param,lambda,mu,rho,lower,upper_fast,upper_slow,upper,heavy_traffic_const,sim_mean,sim_ci,error";
}

std::string csv_row(const PointResult& r) {
  std::optional<double> sim_mean, sim_ci;
  if (r.sim) {
    sim_mean = r.sim->e_q.mean;
    sim_ci = r.sim->e_q.ci_half_width;
  }
  const std::optional<double> fields[] = {r.param,      r.lambda, r.mu,    r.rho,
                                          r.lower,      r.upper_fast, r.upper_slow, r.upper,
                                          r.heavy_traffic_const, sim_mean, sim_ci};
  std::string row;
  for (const auto& f : fields) row += format_number(f) + ",";
  return row + csv_field(r.error);
}

std::vector<CheckResult> validate_spec(const SystemSpec& spec) {
  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool passed, std::string detail, int severity = 3) {
    checks.push_back({std::move(name), passed, false, std::move(detail), severity});
  };

  MarkedChain arrival({"_"}, {}), completion({"_"}, {});
  try {
    std::tie(arrival, completion) = chains_of(spec);
  } catch (const Error& e) {
    add("model parameters", false, e.what(), 2);
    return checks;
  }

  bool structural_ok = true;
  for (const auto& [name, chain] : {std::pair{"arrival", &arrival}, std::pair{"completion", &completion}}) {
    const ValidationReport v = validate(*chain);
    std::string detail;
    for (const auto& s : v.violations) detail += (detail.empty() ? "" : "; ") + s;
    add(std::string(name) + " chain structure", v.ok(), detail, 2);
    structural_ok = structural_ok && v.ok();
  }
  if (!structural_ok) return checks;

  MamsSystem system;
  try {
    system = build_system(arrival, completion, Stability::AllowUnstable);
  } catch (const NumericalError& e) {
    add("chain solves", false, e.what(), 3);
    return checks;
  } catch (const Error& e) {
    add("event rates", false, e.what(), 2);
    return checks;
  }

  for (const auto& [name, m] : {std::pair{"arrival", &system.arrival}, std::pair{"completion", &system.completion}}) {
    const std::string prefix = std::string(name) + " ";
    const double scale = m->chain.max_rate();
    add(prefix + "stationary balance", m->analysis.balance_residual <= 1e-12 * std::max(scale, 1e-300),
        "residual " + num(m->analysis.balance_residual));

    const double mass = m->analysis.event_weighted_dist.sum();
    add(prefix + "event-weighted distribution", std::abs(mass - 1.0) <= 1e-12 &&
                                                    m->analysis.event_weighted_dist.minCoeff() >= 0.0,
        "total mass " + num(mass));

    const double poisson = drift_residuals(m->chain, m->analysis, m->relative).lpNorm<Eigen::Infinity>();
    add(prefix + "Poisson residual", poisson <= 1e-10 * scale, "max residual " + num(poisson));

    const double delta_norm = m->relative.delta.lpNorm<Eigen::Infinity>();
    const double mean = std::abs(m->analysis.pi.dot(m->relative.delta));
    add(prefix + "zero stationary mean", mean <= 1e-12 * std::max(1.0, delta_norm), "|pi . delta| = " + num(mean));

    try {
      const Eigen::VectorXd oracle =
          transient_oracle_all(m->chain, default_oracle_horizon(m->chain), 20'000'000);
      const double gap = (oracle - m->relative.delta).lpNorm<Eigen::Infinity>();
      add(prefix + "transient oracle agreement", gap <= 1e-6 * std::max(1.0, delta_norm), "max gap " + num(gap));
    } catch (const OracleBudgetError& e) {
      checks.push_back({prefix + "transient oracle agreement", false, true, "step budget exhausted", 3});
    }
  }

  add("stability", system.stable(),
      "lambda = " + num(system.lambda) + ", mu = " + num(system.mu) + ", rho = " + num(system.rho), 2);

  double worst = 0.0, worst_slope = 0.0;
  const double rate_scale = system.arrival.chain.max_rate() + system.completion.chain.max_rate();
  const double delta_scale = 1.0 + system.arrival.relative.delta.lpNorm<Eigen::Infinity>() +
                             system.completion.relative.delta.lpNorm<Eigen::Infinity>();
  for (StateIndex a = 0; a < system.arrival.chain.size(); ++a) {
    for (StateIndex c = 0; c < system.completion.chain.size(); ++c) {
      for (std::uint64_t q : {0, 1, 2, 7}) {
        const double d = drift_self_check(system, {q, a, c}).discrepancy();
        worst = std::max(worst, d / (rate_scale * (delta_scale + static_cast<double>(q))));
      }
      const double slope =
          drift_closed_form(system, {2, a, c}).total() - drift_closed_form(system, {1, a, c}).total();
      worst_slope = std::max(worst_slope, std::abs(slope - 2.0 * (system.lambda - system.mu)) / rate_scale);
    }
  }
  add("drift closed forms", worst <= 1e-12, "max relative discrepancy " + num(worst));
  add("drift slope 2(lambda - mu)", worst_slope <= 1e-12, "max relative deviation " + num(worst_slope));

  if (system.stable()) {
    const QueueLengthBounds b = bounds(system);
    add("bound ordering", b.lower <= b.explicit_term && b.explicit_term <= b.upper,
        "lower " + num(b.lower) + ", upper " + num(b.upper));

    if (const auto* p = std::get_if<TwoLevelParams>(&spec.model)) {
      const TwoLevelParams params = TwoLevelParams::make(p->lambda_h, p->lambda_l, p->alpha_h, p->alpha_l, p->mu);
      const TwoLevelAnalysis a = analyze_two_level(params);
      const double gap = std::max({std::abs(a.delta_h - system.arrival.relative.delta(0)),
                                   std::abs(a.delta_l - system.arrival.relative.delta(1)),
                                   std::abs(a.e_delta_arrival - b.e_delta_arrival_weighted),
                                   std::abs(a.heavy_traffic_constant - b.heavy_traffic_constant)});
      const double scale = std::max({1.0, std::abs(a.delta_h), std::abs(a.delta_l), a.heavy_traffic_constant});
      add("two-level closed forms", gap <= 1e-10 * scale, "max gap " + num(gap));
      const TwoLevelQueueBounds tb = e_q_bounds(params, a);
      add("two-level bound ordering", tb.lower <= tb.upper && tb.upper <= tb.upper_fast,
          "lower " + num(tb.lower) + ", upper " + num(tb.upper));
    }
  }
  return checks;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean queue length analysis for Markov-modulated arrival and service processes", "mams"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("spec", o.spec_path, "System spec file");
    sub->add_option("--preset", o.preset, "Built-in figure preset (fig4, fig5, fig5_a, fig5_b, fig5_c, fig6, fig6_slow)");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--events", o.events, "Number of simulated events")->check(CLI::PositiveNumber);
    sub->add_option("--warmup", o.warmup, "Warmup fraction of simulated time");
    sub->add_option("--batches", o.batches, "Number of batches");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "Print exact quantities and bounds");
  add_source(analyze_cmd);
  analyze_cmd->add_flag("--json", o.json, "Print a JSON report");

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate and compare with the bounds");
  add_source(simulate_cmd);
  add_sim(simulate_cmd);
  simulate_cmd->add_option("--out", o.out_path, "Write a CSV row to this path");

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a parameter sweep as CSV");
  add_source(sweep_cmd);
  add_sim(sweep_cmd);
  sweep_cmd->add_option("--out", o.out_path, "CSV output path (default stdout)");
  sweep_cmd->add_option("--param", o.sweep_param, "Dotted parameter path, e.g. two_level.alpha_l");
  sweep_cmd->add_option("--values", o.sweep_values, "Sweep values")->delimiter(',');
  sweep_cmd->add_option("--jobs", o.jobs, "Worker threads (default: all cores)");
  sweep_cmd->add_flag("--analytic-only", o.analytic_only, "Skip simulation");

  auto* validate_cmd = app.add_subcommand("validate", "Run the invariant suite on a spec");
  add_source(validate_cmd);

  try {
    std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rev.begin(), rev.end());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(o, out);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    return cmd_validate(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace mams
