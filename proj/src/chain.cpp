#include "mams/chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "mams/errors.hpp"

namespace mams {

MarkedChain::MarkedChain(std::vector<std::string> states, std::vector<Transition> transitions)
    : states_(std::move(states)), transitions_(std::move(transitions)) {}

std::optional<StateIndex> MarkedChain::index_of(const std::string& label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) return std::nullopt;
  return static_cast<StateIndex>(it - states_.begin());
}

double MarkedChain::max_rate() const noexcept {
  double m = 0.0;
  for (const auto& t : transitions_) m = std::max(m, t.rate);
  return m;
}

double MarkedChain::total_outflow(StateIndex i) const {
  double sum = 0.0;
  for (const auto& t : transitions_)
    if (t.from == i) sum += t.rate;
  return sum;
}

double MarkedChain::event_rate_from(StateIndex i) const {
  double sum = 0.0;
  for (const auto& t : transitions_)
    if (t.from == i && t.mark == Mark::Event) sum += t.rate;
  return sum;
}

MarkedChain MarkedChain::scaled(Mark mark, double factor) const {
  auto transitions = transitions_;
  for (auto& t : transitions)
    if (t.mark == mark) t.rate *= factor;
  return MarkedChain(states_, std::move(transitions));
}

MarkedChain MarkedChain::scaled(double factor) const {
  auto transitions = transitions_;
  for (auto& t : transitions) t.rate *= factor;
  return MarkedChain(states_, std::move(transitions));
}

namespace {

std::vector<bool> reachable(std::size_t n, const std::vector<std::vector<StateIndex>>& adj) {
  std::vector<bool> seen(n, false);
  std::vector<StateIndex> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    StateIndex v = stack.back();
    stack.pop_back();
    for (StateIndex w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const MarkedChain& chain) {
  const std::size_t n = chain.size();
  if (n == 0) return false;
  std::vector<std::vector<StateIndex>> forward(n), backward(n);
  for (const auto& t : chain.transitions()) {
    if (t.from >= n || t.to >= n) continue;
    forward[t.from].push_back(t.to);
    backward[t.to].push_back(t.from);
  }
  auto f = reachable(n, forward);
  auto b = reachable(n, backward);
  return std::all_of(f.begin(), f.end(), [](bool x) { return x; }) &&
         std::all_of(b.begin(), b.end(), [](bool x) { return x; });
}

ValidationReport validate(const MarkedChain& chain) {
  ValidationReport report;
  const std::size_t n = chain.size();
  if (n == 0) {
    report.violations.emplace_back("chain has no states");
    return report;
  }
  {
    std::set<std::string> labels;
    for (const auto& s : chain.states())
      if (!labels.insert(s).second) report.violations.push_back("duplicate state label '" + s + "'");
  }

  std::set<std::tuple<StateIndex, StateIndex, int>> seen;
  for (std::size_t k = 0; k < chain.transitions().size(); ++k) {
    const auto& t = chain.transitions()[k];
    std::ostringstream where;
    where << "transition " << k << " (" << t.from << "->" << t.to << ", mark " << mark_value(t.mark) << ")";
    if (t.from >= n || t.to >= n) {
      report.violations.push_back(where.str() + ": state index out of range");
      continue;
    }
    if (!(t.rate > 0.0) || !std::isfinite(t.rate))
      report.violations.push_back(where.str() + ": rate must be positive and finite");
    if (t.from == t.to && t.mark == Mark::Silent)
      report.violations.push_back(where.str() + ": mark-0 self-loop");
    if (!seen.emplace(t.from, t.to, mark_value(t.mark)).second)
      report.violations.push_back(where.str() + ": duplicate (from, to, mark)");
  }

  if (!is_strongly_connected(chain)) {
    report.reducible = true;
    report.violations.emplace_back("chain is reducible (transition graph not strongly connected)");
  }
  return report;
}

Eigen::MatrixXd generator(const MarkedChain& chain) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : chain.transitions()) {
    if (t.from == t.to) continue;
    q(t.from, t.to) += t.rate;
    q(t.from, t.from) -= t.rate;
  }
  return q;
}

namespace {

void require_valid(const MarkedChain& chain) {
  auto report = validate(chain);
  if (report.ok()) return;
  std::string msg = "invalid chain:";
  for (const auto& v : report.violations) msg += "\n  " + v;
  if (report.reducible) throw StructuralError(msg);
  throw DomainError(msg);
}

}  // namespace

ChainAnalysis analyze(const MarkedChain& chain) {
  require_valid(chain);
  const auto n = static_cast<Eigen::Index>(chain.size());
  const Eigen::MatrixXd q = generator(chain);
  const double scale = std::max(chain.max_rate(), 1e-300);

  // pi Q = 0 with the last balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = q.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "stationary balance system is singular or ill-conditioned (condition estimate " << 1.0 / rcond << ")";
    throw NumericalError(msg.str(), 1.0 / rcond);
  }
  Eigen::VectorXd pi = lu.solve(rhs);
  // One step of iterative refinement.
  pi += lu.solve(rhs - a * pi);

  ChainAnalysis out;
  out.balance_residual = (pi.transpose() * q).cwiseAbs().maxCoeff();
  if (out.balance_residual > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "stationary solve residual " << out.balance_residual << " exceeds tolerance (condition estimate "
        << 1.0 / rcond << ")";
    throw NumericalError(msg.str(), 1.0 / rcond);
  }
  out.pi = pi;

  out.per_state_event_rate = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(n);
  for (const auto& t : chain.transitions()) {
    if (t.mark != Mark::Event) continue;
    out.per_state_event_rate(t.from) += t.rate;
    weighted(t.to) += pi(t.from) * t.rate;
  }
  out.event_rate = pi.dot(out.per_state_event_rate);
  out.event_weighted_dist = out.event_rate > 0.0 ? Eigen::VectorXd(weighted / out.event_rate) : weighted;
  return out;
}

}  // namespace mams
