#include "temg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "temg/common.hpp"
#include "temg/rng.hpp"

namespace temg {

void validate(const SynthConfig& cfg) {
  if (cfg.n_nodes < 8) throw ConfigError("generator needs at least 8 nodes");
  if (cfg.n_background_tx < 1) throw ConfigError("need at least one background tx");
  if (cfg.anomaly_fraction < 0.0 || cfg.anomaly_fraction > 0.5)
    throw ConfigError("anomaly fraction must be in [0, 0.5]");
  if (cfg.fanout_mix < 0.0 || cfg.fanout_mix > 1.0)
    throw ConfigError("pattern mix must be in [0,1]");
  if (cfg.shift_strength < 0.0) throw ConfigError("shift must be >= 0");
  if (cfg.base_gap <= 0.0 || cfg.burst_window <= 0.0)
    throw ConfigError("timing parameters must be positive");
  double planted = std::round(cfg.anomaly_fraction * cfg.n_nodes);
  if (planted > cfg.n_nodes / 2.0)
    throw ConfigError("infeasible anomaly count for node budget");
}

namespace {

struct RawEdge {
  uint32_t src, dst;
  int64_t time;
  double amount;
};

std::string addr(uint32_t v) { return "n" + std::to_string(v); }

}  // namespace

SynthResult generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(mix64(cfg.seed, 0x5E17ULL));
  const double scale = 1.0 + cfg.shift_strength;  // amounts and timing drift
  const int n = cfg.n_nodes;

  // heavy-tailed connection propensity per node
  std::vector<double> weight(static_cast<size_t>(n));
  double wsum = 0.0;
  for (auto& w : weight) {
    w = rng.pareto(1.0, 1.6);
    wsum += w;
  }
  std::vector<double> cum(weight.size());
  double acc = 0.0;
  for (size_t i = 0; i < weight.size(); ++i) {
    acc += weight[i] / wsum;
    cum[i] = acc;
  }
  auto weighted_node = [&]() -> uint32_t {
    double u = rng.uniform();
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    size_t i = static_cast<size_t>(it - cum.begin());
    return static_cast<uint32_t>(std::min(i, cum.size() - 1));
  };
  auto amount_sample = [&]() { return rng.lognormal(3.0, 1.0) * scale; };

  std::vector<RawEdge> raw;
  raw.reserve(static_cast<size_t>(cfg.n_background_tx) + 64);

  // background stream: exponential inter-arrivals over weighted pairs
  double t = 0.0;
  const double gap = cfg.base_gap * scale;
  for (int i = 0; i < cfg.n_background_tx; ++i) {
    t += rng.exponential(gap);
    uint32_t src = weighted_node();
    uint32_t dst = weighted_node();
    while (dst == src) dst = weighted_node();
    raw.push_back({src, dst, static_cast<int64_t>(t), amount_sample()});
  }
  const double horizon = t;

  // planted patterns on randomly drawn hub nodes
  const size_t n_anom =
      static_cast<size_t>(std::llround(cfg.anomaly_fraction * n));
  std::vector<uint32_t> ids(static_cast<size_t>(n));
  for (uint32_t v = 0; v < static_cast<uint32_t>(n); ++v) ids[v] = v;
  rng.shuffle(ids);
  std::vector<uint32_t> hubs(ids.begin(), ids.begin() + static_cast<long>(n_anom));
  std::vector<bool> is_hub(static_cast<size_t>(n), false);
  for (uint32_t h : hubs) is_hub[h] = true;
  auto benign_node = [&](uint32_t avoid0, uint32_t avoid1) -> uint32_t {
    while (true) {
      uint32_t v = static_cast<uint32_t>(rng.uniform_int(0, n - 1));
      if (!is_hub[v] && v != avoid0 && v != avoid1) return v;
    }
  };

  std::vector<PatternInstance> patterns;
  const double w = cfg.burst_window * scale;
  for (uint32_t hub : hubs) {
    PatternInstance inst;
    inst.node = addr(hub);
    double t0 = rng.uniform(0.05, 0.95) * std::max(horizon, 1.0);
    bool fanout = rng.uniform() < cfg.fanout_mix;
    size_t before = raw.size();
    if (fanout) {
      inst.kind = "fanout";
      // funding leg, then the hub cycles a short burst over few receivers;
      // repeated receivers keep the burst inside three-node neighborhoods
      size_t f = static_cast<size_t>(rng.uniform_int(2, 4));
      std::vector<uint32_t> recv(f);
      recv[0] = benign_node(hub, hub);
      for (size_t i = 1; i < f; ++i) recv[i] = benign_node(hub, recv[i - 1]);
      size_t burst_edges = f + 2;
      std::vector<double> outs(burst_edges);
      double total = 0.0;
      for (auto& a : outs) {
        a = amount_sample();
        total += a;
      }
      uint32_t funder = benign_node(hub, recv[0]);
      raw.push_back({funder, hub, static_cast<int64_t>(t0), total * 1.02});
      for (size_t e = 0; e < burst_edges; ++e) {
        double te = t0 + w * static_cast<double>(e + 1) / static_cast<double>(burst_edges + 1);
        raw.push_back({hub, recv[e % f], static_cast<int64_t>(te), outs[e]});
      }
    } else {
      inst.kind = "aggregation";
      // several senders feed the hub (the first one twice), then the hub
      // forwards the pot onward inside the same window
      size_t a = static_cast<size_t>(rng.uniform_int(2, 4));
      std::vector<uint32_t> senders(a);
      senders[0] = benign_node(hub, hub);
      for (size_t i = 1; i < a; ++i) senders[i] = benign_node(hub, senders[i - 1]);
      uint32_t target = benign_node(hub, senders[0]);
      double total = 0.0;
      size_t legs = a + 1;
      for (size_t e = 0; e < legs; ++e) {
        double te = t0 + w * static_cast<double>(e + 1) / static_cast<double>(legs + 2);
        uint32_t s = senders[e % a];
        double amt = amount_sample();
        total += amt;
        raw.push_back({s, hub, static_cast<int64_t>(te), amt});
      }
      raw.push_back(
          {hub, target, static_cast<int64_t>(t0 + w * 0.95), total * 0.98});
    }
    inst.n_edges = raw.size() - before;
    inst.t_start = static_cast<int64_t>(t0);
    inst.t_end = static_cast<int64_t>(t0 + w);
    patterns.push_back(std::move(inst));
  }

  SynthResult out;
  for (const RawEdge& e : raw) {
    Transaction tx;
    tx.src = out.graph.intern(addr(e.src));
    tx.dst = out.graph.intern(addr(e.dst));
    tx.time = e.time;
    tx.amount = e.amount;
    out.graph.edges.push_back(tx);
  }
  out.graph.finalize_edges();
  for (size_t v = 0; v < out.graph.num_nodes(); ++v) out.graph.labels[v] = 0;
  for (uint32_t h : hubs) {
    auto it = out.graph.id_of.find(addr(h));
    if (it != out.graph.id_of.end()) out.graph.labels[it->second] = 1;
  }
  out.patterns = std::move(patterns);
  return out;
}

std::pair<SynthResult, SynthResult> shift_pair(const SynthConfig& cfg) {
  SynthConfig train_cfg = cfg;
  train_cfg.shift_strength = 0.0;
  SynthConfig test_cfg = cfg;
  test_cfg.seed = mix64(cfg.seed, 0x7E57ULL);
  return {generate(train_cfg), generate(test_cfg)};
}

std::string patterns_to_json(const std::vector<PatternInstance>& patterns) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    if (i) os << ",";
    os << "{\"node\":\"" << p.node << "\",\"kind\":\"" << p.kind
       << "\",\"t_start\":" << p.t_start << ",\"t_end\":" << p.t_end
       << ",\"n_edges\":" << p.n_edges << "}";
  }
  os << "]";
  return os.str();
}

TemporalGraph burst_stress_graph(size_t edges, size_t pairs, size_t block,
                                 uint64_t seed) {
  if (pairs == 0 || block == 0) throw ConfigError("burst workload needs pairs and block >= 1");
  Rng rng(mix64(seed, 0xB57ULL));
  TemporalGraph g;
  for (size_t e = 0; e < edges; ++e) {
    size_t p = (e / block) % pairs;
    Transaction tx;
    tx.src = g.intern("s" + std::to_string(p));
    tx.dst = g.intern("d" + std::to_string(p));
    tx.time = static_cast<int64_t>(e);
    tx.amount = 1.0 + rng.uniform();
    g.edges.push_back(tx);
  }
  g.finalize_edges();
  return g;
}

}  // namespace temg
