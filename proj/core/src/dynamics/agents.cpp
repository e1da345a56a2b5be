#include "gridt/dynamics/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gridt/analytics/beta.hpp"
#include "gridt/csv.hpp"
#include "gridt/dynamics/parallel.hpp"
#include "gridt/rng.hpp"

namespace gridt::dynamics {
namespace {

// Fisher-Yates over Rng::below, so traces do not depend on the standard
// library's shuffle.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::string to_string(const AgentPolicy& policy) {
  struct Visitor {
    std::string operator()(const Committed&) const { return "committed"; }
    std::string operator()(const Threshold& t) const { return "threshold" + std::to_string(t.theta); }
    std::string operator()(const Bayesian& b) const { return "bayesian" + format_double(b.cutoff); }
  };
  return std::visit(Visitor{}, policy);
}

bool decide(const AgentPolicy& policy, const ViewSnapshot& view) {
  const auto active = static_cast<int>(
      std::count_if(view.inputs.begin(), view.inputs.end(), [](const InputCard& c) { return c.active; }));
  struct Visitor {
    const ViewSnapshot& view;
    int active;
    bool operator()(const Committed&) const { return true; }
    bool operator()(const Threshold& t) const { return active >= t.theta; }
    bool operator()(const Bayesian& b) const {
      const int observed = static_cast<int>(view.inputs.size());
      if (observed == 0) return 0.5 >= b.cutoff;
      return analytics::posterior_q(observed, active).mean() >= b.cutoff;
    }
  };
  return std::visit(Visitor{view, active}, policy);
}

void validate(const RunConfig& config) {
  if (config.k < 1 || config.k > kMaxK) throw std::invalid_argument("run config: K out of range");
  if (config.n < static_cast<std::size_t>(config.k) + 1) {
    throw std::invalid_argument("run config: N must be >= K + 1");
  }
  if (config.ticks < 1) throw std::invalid_argument("run config: ticks must be >= 1");
  if (config.runs < 1) throw std::invalid_argument("run config: runs must be >= 1");
  if (config.mix.empty()) throw std::invalid_argument("run config: empty policy mix");
  double total = 0.0;
  for (const auto& share : config.mix) {
    if (!(share.fraction >= 0.0 && share.fraction <= 1.0)) {
      throw std::invalid_argument("run config: policy fraction outside [0, 1]");
    }
    total += share.fraction;
    if (const auto* t = std::get_if<Threshold>(&share.policy); t && (t->theta < 0 || t->theta > config.k)) {
      throw std::invalid_argument("run config: threshold must be in [0, K]");
    }
    if (const auto* b = std::get_if<Bayesian>(&share.policy); b && !(b->cutoff >= 0.0 && b->cutoff <= 1.0)) {
      throw std::invalid_argument("run config: bayesian cutoff must be in [0, 1]");
    }
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("run config: policy fractions must sum to 1");
  if (const auto* f = std::get_if<FractionThreshold>(&config.reset); f && !(f->q_reset > 0.0 && f->q_reset <= 1.0)) {
    throw std::invalid_argument("run config: q_reset must be in (0, 1]");
  }
  if (const auto* d = std::get_if<Deadline>(&config.reset); d && d->ticks < 1) {
    throw std::invalid_argument("run config: deadline must be >= 1 tick");
  }
}

std::vector<std::size_t> allocate(const std::vector<PolicyShare>& mix, std::size_t n) {
  std::vector<std::size_t> counts(mix.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double exact = mix[i].fraction * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  // Ties go to the earlier entry.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < n && j < remainders.size(); ++j, ++assigned) {
    ++counts[remainders[j].second];
  }
  return counts;
}

std::vector<PolicyShare> parse_policy_mix(std::string_view text, int k) {
  std::vector<PolicyShare> mix;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("policy entry needs name:fraction");
    const auto name = item.substr(0, colon);
    PolicyShare share;
    share.fraction = parse_double(item.substr(colon + 1));
    if (name == "committed") {
      share.policy = Committed{};
    } else if (name.starts_with("threshold")) {
      const auto arg = name.substr(9);
      if (arg == "K" || arg == "k") {
        share.policy = Threshold{k};
      } else {
        const double theta = parse_double(arg);
        if (theta != std::floor(theta)) throw std::invalid_argument("threshold must be an integer");
        share.policy = Threshold{static_cast<int>(theta)};
      }
    } else if (name.starts_with("bayesian")) {
      const auto arg = name.substr(8);
      share.policy = Bayesian{arg.empty() ? 0.5 : parse_double(arg)};
    } else {
      throw std::invalid_argument("unknown policy: " + std::string(name));
    }
    mix.push_back(share);
  }
  if (mix.empty()) throw std::invalid_argument("empty policy mix");
  return mix;
}

std::string format_policy_mix(const std::vector<PolicyShare>& mix) {
  std::string out;
  for (const auto& share : mix) {
    if (!out.empty()) out += ',';
    out += to_string(share.policy) + ":" + format_double(share.fraction);
  }
  return out;
}

ResetRule parse_reset_rule(std::string_view text) {
  if (text == "manual") return Manual{};
  if (text.starts_with("frac:")) return FractionThreshold{parse_double(text.substr(5))};
  if (text.starts_with("deadline:")) {
    const double ticks = parse_double(text.substr(9));
    if (ticks < 1 || ticks != std::floor(ticks)) throw std::invalid_argument("deadline must be a positive integer");
    return Deadline{static_cast<std::uint64_t>(ticks)};
  }
  throw std::invalid_argument("reset rule must be frac:<q>, deadline:<ticks> or manual");
}

std::string format_reset_rule(const ResetRule& rule) {
  if (const auto* f = std::get_if<FractionThreshold>(&rule)) return "frac:" + format_double(f->q_reset);
  if (const auto* d = std::get_if<Deadline>(&rule)) return "deadline:" + std::to_string(d->ticks);
  return "manual";
}

AgentRun run_agent_once(const RunConfig& config, std::size_t run, bool keep_initial) {
  validate(config);
  AgentRun out;
  out.run = run;
  out.seed = Rng::derive(config.seed, run);

  NetworkConfig net_config;
  net_config.seed = Rng::derive(out.seed, 0);
  net_config.forbid_mutual_pairs = config.forbid_mutual_pairs;
  GameSpec spec{"signal", "collective reset", config.reset};
  auto net = Network::create(config.k, spec, net_config);

  std::vector<UserId> agents;
  agents.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    agents.push_back(net.join(Profile{"agent-" + std::to_string(i), ""}).user_id);
  }

  Rng rng(Rng::derive(out.seed, 1));
  std::vector<std::size_t> role(config.n);
  {
    const auto counts = allocate(config.mix, config.n);
    std::size_t at = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      for (std::size_t c = 0; c < counts[p]; ++c) role[at++] = p;
    }
    shuffle(role, rng);
  }
  for (std::size_t i = 0; i < config.n; ++i) out.roles.emplace_back(agents[i], role[i]);
  std::sort(out.roles.begin(), out.roles.end());
  if (keep_initial) out.initial = net.state();

  std::vector<std::size_t> order(config.n);
  std::iota(order.begin(), order.end(), 0);
  for (std::uint64_t t = 0; t < config.ticks; ++t) {
    shuffle(order, rng);
    for (auto i : order) {
      const auto view = net.view(agents[i]);
      if (!view.own.active && decide(config.mix[role[i]].policy, view)) net.activate_signal(agents[i]);
    }
    TickRecord rec;
    rec.tick = net.state().tick;
    rec.q = static_cast<double>(net.state().active_count()) / static_cast<double>(config.n);
    for (const auto& outcome : {net.check_reset(), net.tick()}) {
      if (!outcome) continue;
      if (!rec.reset) rec.reset = outcome.reason;
      ++out.resets;
      if (outcome.reason == ResetReason::Threshold && !out.first_threshold_reset) {
        out.first_threshold_reset = rec.tick;
      }
    }
    out.trace.push_back(rec);
  }
  return out;
}

double AgentReport::success_rate() const {
  if (runs.empty()) return 0.0;
  auto ok = std::count_if(runs.begin(), runs.end(), [](const AgentRun& r) { return r.coordinated(); });
  return static_cast<double>(ok) / static_cast<double>(runs.size());
}

AgentReport run_agents(const RunConfig& config, unsigned threads) {
  validate(config);
  AgentReport report;
  report.config = config;
  report.runs.resize(config.runs);
  parallel_for(config.runs, threads, [&](std::size_t run) { report.runs[run] = run_agent_once(config, run); });
  return report;
}

}  // namespace gridt::dynamics
