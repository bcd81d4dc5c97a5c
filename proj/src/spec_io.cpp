#include "mams/spec_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mams/errors.hpp"

namespace mams {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!known) throw ParseError(where + ": unknown field '" + it.key() + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number()) {
    const double d = v.get<double>();
    if (d >= 0.0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ParseError(where + ": expected a nonnegative integer");
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

MarkedChain parse_chain(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  reject_unknown(obj, where, {"states", "transitions"});
  const json& states_json = require(obj, "states", where);
  if (!states_json.is_array() || states_json.empty())
    throw ParseError(where + ".states: expected a non-empty array of labels");
  std::vector<std::string> states;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < states_json.size(); ++i) {
    const std::string at = where + ".states[" + std::to_string(i) + "]";
    std::string label = get_string(states_json[i], at);
    if (!seen.insert(label).second) throw ParseError(at + ": duplicate state label '" + label + "'");
    states.push_back(std::move(label));
  }

  const json& trans_json = require(obj, "transitions", where);
  if (!trans_json.is_array()) throw ParseError(where + ".transitions: expected an array");
  MarkedChain lookup(states, {});
  std::vector<Transition> transitions;
  for (std::size_t k = 0; k < trans_json.size(); ++k) {
    const std::string at = where + ".transitions[" + std::to_string(k) + "]";
    const json& t = trans_json[k];
    if (!t.is_object()) throw ParseError(at + ": expected an object");
    reject_unknown(t, at, {"from", "to", "mark", "rate"});
    auto state = [&](const char* key) {
      const std::string label = get_string(require(t, key, at), at + "." + key);
      auto idx = lookup.index_of(label);
      if (!idx) throw ParseError(at + "." + key + ": unknown state '" + label + "'");
      return *idx;
    };
    Transition tr;
    tr.from = state("from");
    tr.to = state("to");
    const std::uint64_t mark = get_count(require(t, "mark", at), at + ".mark");
    if (mark > 1) throw ParseError(at + ".mark: must be 0 or 1");
    tr.mark = mark == 1 ? Mark::Event : Mark::Silent;
    tr.rate = get_number(require(t, "rate", at), at + ".rate");
    transitions.push_back(tr);
  }
  return MarkedChain(std::move(states), std::move(transitions));
}

json chain_to_json(const MarkedChain& chain) {
  json transitions = json::array();
  for (const auto& t : chain.transitions()) {
    transitions.push_back(
        {{"from", chain.label(t.from)}, {"to", chain.label(t.to)}, {"mark", mark_value(t.mark)}, {"rate", t.rate}});
  }
  return {{"states", chain.states()}, {"transitions", transitions}};
}

StateIndex parse_state_ref(const json& v, const std::optional<MarkedChain>& chain, const std::string& where) {
  if (v.is_string()) {
    if (!chain) throw ParseError(where + ": state labels need an explicit chain; use an index");
    auto idx = chain->index_of(v.get<std::string>());
    if (!idx) throw ParseError(where + ": unknown state '" + v.get<std::string>() + "'");
    return *idx;
  }
  return static_cast<StateIndex>(get_count(v, where));
}

SimConfig parse_simulation(const json& obj, const std::optional<ChainPair>& chains) {
  const std::string where = "simulation";
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  reject_unknown(obj, where, {"seed", "stream", "num_events", "warmup_fraction", "num_batches", "initial_state"});
  SimConfig c;
  if (obj.contains("seed")) c.seed = get_count(obj["seed"], where + ".seed");
  if (obj.contains("stream")) c.stream = get_count(obj["stream"], where + ".stream");
  if (obj.contains("num_events")) c.num_events = get_count(obj["num_events"], where + ".num_events");
  if (obj.contains("warmup_fraction")) c.warmup_fraction = get_number(obj["warmup_fraction"], where + ".warmup_fraction");
  if (obj.contains("num_batches")) c.num_batches = get_count(obj["num_batches"], where + ".num_batches");
  if (obj.contains("initial_state")) {
    const json& s = obj["initial_state"];
    const std::string at = where + ".initial_state";
    if (!s.is_object()) throw ParseError(at + ": expected an object");
    reject_unknown(s, at, {"q", "arrival", "completion"});
    std::optional<MarkedChain> arr, comp;
    if (chains) {
      arr = chains->arrival;
      comp = chains->completion;
    }
    if (s.contains("q")) c.initial_state.q = get_count(s["q"], at + ".q");
    if (s.contains("arrival")) c.initial_state.arrival = parse_state_ref(s["arrival"], arr, at + ".arrival");
    if (s.contains("completion"))
      c.initial_state.completion = parse_state_ref(s["completion"], comp, at + ".completion");
  }
  return c;
}

SweepSpec parse_sweep(const json& obj) {
  const std::string where = "sweep";
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  reject_unknown(obj, where, {"parameter", "values", "linked"});
  SweepSpec s;
  s.parameter = get_string(require(obj, "parameter", where), where + ".parameter");
  const json& values = require(obj, "values", where);
  if (!values.is_array() || values.empty()) throw ParseError(where + ".values: expected a non-empty array");
  for (std::size_t i = 0; i < values.size(); ++i)
    s.values.push_back(get_number(values[i], where + ".values[" + std::to_string(i) + "]"));
  if (obj.contains("linked")) {
    const json& linked = obj["linked"];
    if (!linked.is_array()) throw ParseError(where + ".linked: expected an array");
    for (std::size_t i = 0; i < linked.size(); ++i) {
      const std::string at = where + ".linked[" + std::to_string(i) + "]";
      if (!linked[i].is_object()) throw ParseError(at + ": expected an object");
      reject_unknown(linked[i], at, {"parameter", "ratio"});
      s.linked.push_back({get_string(require(linked[i], "parameter", at), at + ".parameter"),
                          get_number(require(linked[i], "ratio", at), at + ".ratio")});
    }
  }
  return s;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

SystemSpec parse_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte)) + ": malformed spec (" + e.what() + ")");
  }
  if (!doc.is_object()) throw ParseError("spec: top level must be an object");
  reject_unknown(doc, "spec",
                 {"description", "arrival_chain", "completion_chain", "two_level", "simulation", "sweep"});

  SystemSpec spec;
  if (doc.contains("description")) spec.description = get_string(doc["description"], "description");

  const bool has_chains = doc.contains("arrival_chain") || doc.contains("completion_chain");
  const bool has_two_level = doc.contains("two_level");
  if (has_chains == has_two_level)
    throw ParseError("spec: exactly one of (arrival_chain + completion_chain) or two_level must be present");

  std::optional<ChainPair> chains;
  if (has_chains) {
    ChainPair pair{parse_chain(require(doc, "arrival_chain", "spec"), "arrival_chain"),
                   parse_chain(require(doc, "completion_chain", "spec"), "completion_chain")};
    chains = pair;
    spec.model = std::move(pair);
  } else {
    const json& t = doc["two_level"];
    if (!t.is_object()) throw ParseError("two_level: expected an object");
    reject_unknown(t, "two_level", {"lambda_h", "lambda_l", "alpha_h", "alpha_l", "mu"});
    auto field = [&](const char* key) { return get_number(require(t, key, "two_level"), std::string("two_level.") + key); };
    spec.model = TwoLevelParams{field("lambda_h"), field("lambda_l"), field("alpha_h"), field("alpha_l"), field("mu")};
  }
  if (doc.contains("simulation")) spec.simulation = parse_simulation(doc["simulation"], chains);
  if (doc.contains("sweep")) spec.sweep = parse_sweep(doc["sweep"]);
  return spec;
}

SystemSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_spec(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_spec(const SystemSpec& spec) {
  json doc = json::object();
  if (!spec.description.empty()) doc["description"] = spec.description;
  if (const auto* pair = std::get_if<ChainPair>(&spec.model)) {
    doc["arrival_chain"] = chain_to_json(pair->arrival);
    doc["completion_chain"] = chain_to_json(pair->completion);
  } else {
    const auto& p = std::get<TwoLevelParams>(spec.model);
    doc["two_level"] = {
        {"lambda_h", p.lambda_h}, {"lambda_l", p.lambda_l}, {"alpha_h", p.alpha_h}, {"alpha_l", p.alpha_l}, {"mu", p.mu}};
  }
  if (spec.simulation) {
    const auto& c = *spec.simulation;
    doc["simulation"] = {{"seed", c.seed},
                         {"stream", c.stream},
                         {"num_events", c.num_events},
                         {"warmup_fraction", c.warmup_fraction},
                         {"num_batches", c.num_batches},
                         {"initial_state",
                          {{"q", c.initial_state.q},
                           {"arrival", c.initial_state.arrival},
                           {"completion", c.initial_state.completion}}}};
  }
  if (spec.sweep) {
    json linked = json::array();
    for (const auto& l : spec.sweep->linked) linked.push_back({{"parameter", l.parameter}, {"ratio", l.ratio}});
    doc["sweep"] = {{"parameter", spec.sweep->parameter}, {"values", spec.sweep->values}, {"linked", linked}};
  }
  return doc.dump(2) + "\n";
}

std::pair<MarkedChain, MarkedChain> chains_of(const SystemSpec& spec) {
  if (const auto* pair = std::get_if<ChainPair>(&spec.model)) return {pair->arrival, pair->completion};
  const auto& p = std::get<TwoLevelParams>(spec.model);
  return to_mams(TwoLevelParams::make(p.lambda_h, p.lambda_l, p.alpha_h, p.alpha_l, p.mu));
}

SystemSpec with_parameter(const SystemSpec& spec, const std::string& path, double value) {
  SystemSpec out = spec;
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ParseError("sweep parameter '" + path + "': expected a dotted path");
  const std::string head = path.substr(0, dot);
  const std::string field = path.substr(dot + 1);

  if (head == "two_level") {
    auto* p = std::get_if<TwoLevelParams>(&out.model);
    if (!p) throw ParseError("sweep parameter '" + path + "': spec has no two_level block");
    if (field == "lambda_h") p->lambda_h = value;
    else if (field == "lambda_l") p->lambda_l = value;
    else if (field == "alpha_h") p->alpha_h = value;
    else if (field == "alpha_l") p->alpha_l = value;
    else if (field == "mu") p->mu = value;
    else throw ParseError("sweep parameter '" + path + "': unknown two_level field");
    return out;
  }

  if (head != "arrival" && head != "completion")
    throw ParseError("sweep parameter '" + path + "': unknown path");
  if (field != "event_scale" && field != "switch_scale")
    throw ParseError("sweep parameter '" + path + "': expected event_scale or switch_scale");
  const Mark mark = field == "event_scale" ? Mark::Event : Mark::Silent;

  if (auto* pair = std::get_if<ChainPair>(&out.model)) {
    MarkedChain& chain = head == "arrival" ? pair->arrival : pair->completion;
    chain = chain.scaled(mark, value);
    return out;
  }
  auto& p = std::get<TwoLevelParams>(out.model);
  if (head == "arrival" && mark == Mark::Event) {
    p.lambda_h *= value;
    p.lambda_l *= value;
  } else if (head == "arrival") {
    p.alpha_h *= value;
    p.alpha_l *= value;
  } else if (mark == Mark::Event) {
    p.mu *= value;
  } else {
    throw ParseError("sweep parameter '" + path + "': a two-level completion process has no switching");
  }
  return out;
}

SystemSpec at_sweep_point(const SystemSpec& spec, const SweepSpec& sweep, double value) {
  SystemSpec out = with_parameter(spec, sweep.parameter, value);
  for (const auto& l : sweep.linked) out = with_parameter(out, l.parameter, l.ratio * value);
  return out;
}

}  // namespace mams
