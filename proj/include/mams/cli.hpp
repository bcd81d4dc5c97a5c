#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mams/simulator.hpp"
#include "mams/spec_io.hpp"

namespace mams {

/// Analytic and (optionally) simulated results for one system.
struct PointResult {
  std::optional<double> param;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<double> rho;
  std::optional<double> lower;
  std::optional<double> upper_fast;
  std::optional<double> upper_slow;
  std::optional<double> upper;
  std::optional<double> heavy_traffic_const;
  std::optional<double> explicit_term;
  std::optional<SimReport> sim;
  /// Empty unless the point failed.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
};

/// Two-level specs use the two-level bounds (upper_fast, upper_slow);
/// chain-pair specs use the max/min sandwich and leave those two empty.
/// Library errors are caught and stored in `error`.
PointResult evaluate_point(const SystemSpec& spec, const std::optional<SimConfig>& sim);

/// Runs every sweep value on up to `jobs` threads. Point k simulates on
/// stream k. Results are in sweep order.
std::vector<PointResult> run_sweep(const SystemSpec& spec, const SweepSpec& sweep,
                                   const std::optional<SimConfig>& sim, std::size_t jobs);

/// param,lambda,mu,rho,lower,upper_fast,upper_slow,upper,heavy_traffic_const,sim_mean,sim_ci,error
std::string csv_header();
std::string csv_row(const PointResult& result);

/// "%.12g"; empty for nullopt.
std::string format_number(std::optional<double> value);

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  /// Exit code this failure maps to (2 domain, 3 numerical).
  int severity = 3;
};

/// Invariant suite run by `mams validate`.
std::vector<CheckResult> validate_spec(const SystemSpec& spec);

/// Entry point of the `mams` executable. args[0] is the program name.
/// Returns 0 success, 1 usage or parse error, 2 domain error, 3 numerical error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mams
