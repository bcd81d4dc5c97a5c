#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mams/chain.hpp"
#include "mams/simulator.hpp"
#include "mams/two_level.hpp"

namespace mams {

struct ChainPair {
  MarkedChain arrival;
  MarkedChain completion;

  friend bool operator==(const ChainPair&, const ChainPair&) = default;
};

/// A linked sweep parameter takes `ratio * value` at every sweep point.
struct LinkedParameter {
  std::string parameter;
  double ratio = 1.0;

  friend bool operator==(const LinkedParameter&, const LinkedParameter&) = default;
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  std::vector<LinkedParameter> linked;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// One system description: either an explicit chain pair or a two-level
/// block, plus optional simulation settings and sweep.
struct SystemSpec {
  std::string description;
  std::variant<ChainPair, TwoLevelParams> model;
  std::optional<SimConfig> simulation;
  std::optional<SweepSpec> sweep;

  bool is_two_level() const noexcept { return std::holds_alternative<TwoLevelParams>(model); }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Parses the JSON spec document. Throws ParseError naming the offending
/// line or field. Chain semantics (rates, connectivity) are not checked here.
SystemSpec parse_spec(std::string_view text);

SystemSpec load_spec_file(const std::string& path);

/// Serializes a spec; parse_spec(write_spec(s)) == s.
std::string write_spec(const SystemSpec& spec);

/// Arrival and completion chains of `spec`.
std::pair<MarkedChain, MarkedChain> chains_of(const SystemSpec& spec);

/// Copy of `spec` with one parameter set. Supported paths:
///   two_level.{lambda_h, lambda_l, alpha_h, alpha_l, mu}
///   {arrival, completion}.{event_scale, switch_scale}  (multiply mark-1 or
///   mark-0 rates; for a two-level model, completion.event_scale scales mu)
/// Throws ParseError for an unknown or inapplicable path.
SystemSpec with_parameter(const SystemSpec& spec, const std::string& path, double value);

/// Applies a sweep value and its linked parameters.
SystemSpec at_sweep_point(const SystemSpec& spec, const SweepSpec& sweep, double value);

}  // namespace mams
