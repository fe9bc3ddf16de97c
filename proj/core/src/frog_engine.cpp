#include "froglab/frog_engine.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <tuple>
#include <utility>

#include "froglab/errors.hpp"
#include "json.hpp"

namespace froglab {
namespace {

// Rejection-exact uniform draw from a raw splitmix64 stream (the per-frog
// streams are bare counters, not generator objects).
std::uint32_t stream_below(std::uint64_t& state, std::uint32_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = splitmix64_next(state);
  } while (r >= limit);
  return static_cast<std::uint32_t>(r % bound);
}

constexpr std::uint64_t kRootKey = 0x243F6A8885A308D3ULL;

struct Node {
  std::int32_t parent = -1;
  std::int32_t children = -1;  // base of the contiguous d-child block
  std::int32_t level = 0;
  std::int32_t first_visit = -1;
  std::int32_t race_idx = -1;  // provisional survivor while first_visit == t
  std::uint64_t key = 0;       // path hash: drives the coupled lazy draws
};

struct FrogState {
  std::uint64_t stream = 0;
  std::int32_t pos = 0;
  std::int32_t prev = -1;  // node index; -1 before the first move
  std::uint32_t id = 0;
  bool dead = false;
};

class Engine {
 public:
  explicit Engine(const SimConfig& config) : cfg_(config) {
    validate(cfg_.tree);
    if (cfg_.tree.variant == TreeVariant::Homogeneous)
      throw ConfigError("frog engine: runs on the rooted trees only");
    if (cfg_.horizon < 1) throw ConfigError("frog engine: horizon must be >= 1");
    if (cfg_.frog_cap <= 0) throw ConfigError("frog engine: frog_cap must be > 0");
    if (cfg_.init.kind == InitLaw::Kind::PoissonPerSite && !(cfg_.init.mu > 0.0))
      throw ConfigError("frog engine: Poisson init needs mu > 0");
    if (cfg_.init.kind == InitLaw::Kind::Fixed && cfg_.init.count < 0)
      throw ConfigError("frog engine: fixed sleeper count must be >= 0");
    if (cfg_.root_reflect && cfg_.variant != FrogVariant::SelfSimilar)
      throw ConfigError("frog engine: root_reflect is a self-similar option");
    if (cfg_.variant == FrogVariant::SelfSimilar &&
        cfg_.tree.variant != TreeVariant::RootedInfinite)
      throw ConfigError("frog engine: self-similar model lives on the infinite tree");

    d_ = cfg_.tree.d;
    leaf_level_ = cfg_.tree.variant == TreeVariant::RootedFinite
                      ? cfg_.tree.height
                      : std::numeric_limits<std::int32_t>::max();
    depth_cap_ = cfg_.depth_cap >= 0 ? cfg_.depth_cap : cfg_.horizon + 2;
    if (depth_cap_ < 1) throw ConfigError("frog engine: depth_cap must be >= 1");
    self_similar_ = cfg_.variant == FrogVariant::SelfSimilar;

    max_level_ = std::min<std::int64_t>(depth_cap_, cfg_.horizon);
    if (cfg_.tree.variant == TreeVariant::RootedFinite)
      max_level_ = std::min<std::int64_t>(max_level_, cfg_.tree.height);
    if (cfg_.prune_depth >= 0)
      max_level_ = std::min<std::int64_t>(max_level_, cfg_.prune_depth);
    level_visited_.assign(static_cast<std::size_t>(max_level_) + 1, 0);
    level_full_.assign(level_visited_.size(), 0);
    level_full_[0] = 1;
    for (std::size_t l = 1; l < level_full_.size(); ++l) {
      const std::int64_t prev = level_full_[l - 1];
      level_full_[l] = prev > std::numeric_limits<std::int64_t>::max() / d_
                           ? std::numeric_limits<std::int64_t>::max()
                           : prev * d_;
    }

    nodes_.push_back(Node{-1, -1, 0, 0, -1, kRootKey});
    level_visited_[0] = 1;
    if (cfg_.record_first_visits) visit_log_.emplace_back(0, 0);
    live_.push_back(FrogState{
        mix_u64(mix_u64(cfg_.seed, kRootKey), 1), 0, -1, frog_counter_++,
        false});
    frogs_created_ = 1;
    v_series_.push_back(0);
    d_series_.push_back(0);
  }

  Trace run() {
    for (int t = 1; t <= cfg_.horizon; ++t) {
      step(t);
      v_series_.push_back(return_count_);
      while (current_d_ + 1 < static_cast<std::int64_t>(level_full_.size()) &&
             level_visited_[static_cast<std::size_t>(current_d_) + 1] ==
                 level_full_[static_cast<std::size_t>(current_d_) + 1])
        ++current_d_;
      d_series_.push_back(current_d_);
    }
    return assemble();
  }

 private:
  static constexpr std::int32_t kFrogEnds = -2;

  void step(int t) {
    const std::size_t movers = live_.size();
    for (std::size_t i = 0; i < movers; ++i) {
      if (live_[i].dead) continue;
      const std::int32_t from = live_[i].pos;
      const std::int32_t to = draw_target(i, t);
      if (to == kFrogEnds) {
        live_[i].dead = true;
        continue;
      }
      arrive(i, from, to, t);
    }
    live_.erase(
        std::remove_if(live_.begin(), live_.end(),
                       [](const FrogState& f) { return f.dead; }),
        live_.end());
  }

  // Picks the frog's next node per its variant, expanding the child block
  // on demand.  Returns kFrogEnds when the frog is pruned away or (reflect
  // mode) halts at the root facing only previously visited children.
  std::int32_t draw_target(std::size_t i, int t) {
    const std::int32_t v = live_[i].pos;
    const std::int32_t prev = live_[i].prev;
    const std::int32_t level = nodes_[v].level;
    const bool has_parent = level > 0;
    const bool leaf = level >= leaf_level_;
    const int nchild = leaf ? 0 : d_;
    const int degree = (has_parent ? 1 : 0) + nchild;

    int slot;
    if (prev < 0 || cfg_.variant == FrogVariant::Standard) {
      // First moves are uniform over all neighbors in every variant.
      slot = static_cast<int>(
          stream_below(live_[i].stream, static_cast<std::uint32_t>(degree)));
    } else if (leaf) {
      slot = 0;  // single neighbor
    } else if (!has_parent) {
      // At the root with a remembered child.
      const std::int32_t prev_child = prev - nodes_[v].children;
      if (cfg_.variant == FrogVariant::Nonbacktracking || cfg_.root_reflect) {
        // Root-biased law: backtrack w.p. 1/d^2, the d-1 other children
        // with (d+1)/d^2 each; d^2-1 = (d-1)(d+1) residues split evenly.
        const std::uint32_t y = stream_below(
            live_[i].stream, static_cast<std::uint32_t>(d_) * d_);
        if (y == 0) {
          slot = static_cast<int>(prev_child);
        } else {
          int j = static_cast<int>((y - 1) % static_cast<std::uint32_t>(d_ - 1));
          if (j >= prev_child) ++j;
          slot = j;
        }
      } else {
        // Uniform nonbacktracking (self-similar frogs die on root arrival,
        // so this is only reachable through contrived configs).
        int j = static_cast<int>(
            stream_below(live_[i].stream, static_cast<std::uint32_t>(d_ - 1)));
        if (j >= prev_child) ++j;
        slot = j;
      }
    } else {
      const std::int32_t prev_slot =
          prev == nodes_[v].parent ? 0 : 1 + (prev - nodes_[v].children);
      slot = static_cast<int>(
          stream_below(live_[i].stream, static_cast<std::uint32_t>(degree - 1)));
      if (slot >= prev_slot) ++slot;
    }

    if (has_parent && slot == 0) return nodes_[v].parent;
    const int child = slot - (has_parent ? 1 : 0);
    if (cfg_.prune_depth >= 0 && level >= cfg_.prune_depth) return kFrogEnds;
    if (level + 1 > depth_cap_)
      throw_truncation("depth_cap exceeded at level " +
                       std::to_string(level + 1));
    if (nodes_[v].children < 0) expand(v);
    const std::int32_t target = nodes_[v].children + child;
    if (cfg_.root_reflect && !has_parent && nodes_[target].first_visit >= 0 &&
        nodes_[target].first_visit < t)
      return kFrogEnds;  // stopped: only previously visited subtrees ahead
    return target;
  }

  void arrive(std::size_t i, std::int32_t from, std::int32_t to, int t) {
    if (to == 0) {
      ++return_count_;
      trace_.return_process.deposit(t);
      if (self_similar_ && !cfg_.root_reflect) {
        live_[i].dead = true;
        return;
      }
      live_[i].prev = from;
      live_[i].pos = 0;
      return;
    }
    const bool downward = nodes_[to].parent == from;
    if (nodes_[to].first_visit < 0) {
      if (!downward)
        throw std::logic_error("frog engine: fresh vertex entered from below");
      nodes_[to].first_visit = t;
      ++level_visited_[static_cast<std::size_t>(nodes_[to].level)];
      if (cfg_.record_first_visits) visit_log_.emplace_back(to, t);
      wake(to);
      if (self_similar_) nodes_[to].race_idx = static_cast<std::int32_t>(i);
      live_[i].prev = from;
      live_[i].pos = to;
      return;
    }
    if (self_similar_ && downward) {
      if (nodes_[to].first_visit == t) {
        // Simultaneous first arrivals: lowest id survives.
        FrogState& champ = live_[static_cast<std::size_t>(nodes_[to].race_idx)];
        if (live_[i].id < champ.id) {
          champ.dead = true;
          nodes_[to].race_idx = static_cast<std::int32_t>(i);
          live_[i].prev = from;
          live_[i].pos = to;
        } else {
          live_[i].dead = true;
        }
        return;
      }
      live_[i].dead = true;  // the subtree already has its entrant
      return;
    }
    live_[i].prev = from;
    live_[i].pos = to;
  }

  void expand(std::int32_t v) {
    const auto base = static_cast<std::int32_t>(nodes_.size());
    const std::uint64_t key = nodes_[v].key;
    const std::int32_t level = nodes_[v].level;
    for (int j = 0; j < d_; ++j)
      nodes_.push_back(
          Node{v, -1, level + 1, -1, -1, mix_u64(key, static_cast<std::uint64_t>(j) + 1)});
    nodes_[v].children = base;
  }

  void wake(std::int32_t v) {
    const std::uint64_t h = mix_u64(cfg_.seed, nodes_[v].key);
    std::int64_t count = 0;
    switch (cfg_.init.kind) {
      case InitLaw::Kind::PoissonPerSite:
        count = poisson_inverse_cdf(cfg_.init.mu,
                                    static_cast<double>(h >> 11) * 0x1.0p-53);
        break;
      case InitLaw::Kind::OnePerSite:
        count = 1;
        break;
      case InitLaw::Kind::Fixed:
        count = cfg_.init.count;
        break;
    }
    if (count <= 0) return;
    frogs_created_ += count;
    if (frogs_created_ > cfg_.frog_cap)
      throw_truncation("frog_cap exceeded: " + std::to_string(frogs_created_) +
                       " frogs created");
    for (std::int64_t s = 1; s <= count; ++s)
      live_.push_back(FrogState{mix_u64(h, static_cast<std::uint64_t>(s)), v,
                                -1, frog_counter_++, false});
  }

  [[noreturn]] void throw_truncation(const std::string& reason) {
    Trace partial = assemble();
    partial.truncation_events = 1;
    throw TruncationError("frog engine: " + reason, std::move(partial));
  }

  Trace assemble() {
    Trace out = std::move(trace_);
    trace_ = Trace{};
    out.V_series = v_series_;
    out.D_series = d_series_;
    out.frogs_created = frogs_created_;
    if (cfg_.record_first_visits) {
      out.first_visit_time.reserve(visit_log_.size());
      std::vector<std::uint8_t> digits;
      for (const auto& [node, time] : visit_log_) {
        digits.clear();
        for (std::int32_t c = node; c != 0; c = nodes_[c].parent)
          digits.push_back(
              static_cast<std::uint8_t>(c - nodes_[nodes_[c].parent].children));
        VertexRef ref;
        ref.path.assign(digits.rbegin(), digits.rend());
        out.first_visit_time.emplace(to_string(ref), time);
      }
    }
    return out;
  }

  SimConfig cfg_;
  int d_ = 2;
  std::int32_t leaf_level_ = 0;
  std::int32_t depth_cap_ = 0;
  std::int64_t max_level_ = 0;
  bool self_similar_ = false;

  std::vector<Node> nodes_;
  std::vector<FrogState> live_;
  std::vector<std::int64_t> level_visited_;
  std::vector<std::int64_t> level_full_;
  std::vector<std::pair<std::int32_t, std::int32_t>> visit_log_;
  std::vector<std::int64_t> v_series_;
  std::vector<std::int64_t> d_series_;
  Trace trace_;
  std::int64_t return_count_ = 0;
  std::int64_t current_d_ = 0;
  std::int64_t frogs_created_ = 0;
  std::uint32_t frog_counter_ = 0;
};

void require_even_atoms(const PointPattern& pattern) {
  for (const auto& atom : pattern.atoms)
    if (atom.time < 2 || atom.time % 2 != 0)
      throw ConfigError("xi atoms must sit on even times >= 2");
}

}  // namespace

Trace run(const SimConfig& config) {
  if (config.variant == FrogVariant::SelfSimilar)
    throw ConfigError("frog engine: use run_self_similar for that variant");
  return Engine(config).run();
}

Trace run_self_similar(const SimConfig& config) {
  if (config.variant != FrogVariant::SelfSimilar)
    throw ConfigError("frog engine: run_self_similar needs the self-similar variant");
  return Engine(config).run();
}

PointPattern run_star_A(const PatternSampler& xi_sampler, int d, double mu,
                        Rng& rng) {
  if (d < 2) throw ConfigError("star system: d must be >= 2");
  if (!(mu >= 0.0)) throw ConfigError("star system: mu must be >= 0");
  if (!xi_sampler) throw ConfigError("star system: xi sampler required");

  // Arrival events at the non-return leaves, ordered by (time, creation).
  using Event = std::tuple<std::int64_t, std::int64_t, int>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> pending;
  std::int64_t seq = 0;
  std::vector<std::int64_t> visits;

  pending.emplace(2, seq++, 0);  // the initial particle halts on leaf 0
  const int hub_sleepers = poisson(rng, mu);
  for (int s = 0; s < hub_sleepers; ++s) {
    // Woken at time 1, scattered uniformly over the d+1 leaves at time 2.
    const auto r = uniform_below(rng, static_cast<std::uint32_t>(d + 1));
    if (r == 0)
      visits.push_back(2);
    else
      pending.emplace(2, seq++, static_cast<int>(r) - 1);
  }

  std::vector<char> activated(static_cast<std::size_t>(d), 0);
  while (!pending.empty()) {
    const auto [time, order, leaf] = pending.top();
    (void)order;
    pending.pop();
    if (activated[static_cast<std::size_t>(leaf)]) continue;
    activated[static_cast<std::size_t>(leaf)] = 1;
    const PointPattern xi = xi_sampler(rng);
    require_even_atoms(xi);
    for (const auto& atom : xi.atoms) {
      for (std::int64_t c = 0; c < atom.count; ++c) {
        // Through the hub, then uniform over its neighbors minus this leaf.
        const auto r = uniform_below(rng, static_cast<std::uint32_t>(d));
        if (r == 0) {
          visits.push_back(time + atom.time);
        } else {
          int j = static_cast<int>(r) - 1;
          if (j >= leaf) ++j;
          pending.emplace(time + atom.time, seq++, j);
        }
      }
    }
  }

  std::sort(visits.begin(), visits.end());
  PointPattern out;
  for (const auto t : visits) out.deposit(t);
  return out;
}

PointPattern sample_rhs_dominated(const PatternSampler& xi_sampler,
                                  const std::vector<double>& lambda_seq,
                                  int d, double mu, Rng& rng) {
  if (d < 2) throw ConfigError("dominated sampler: d must be >= 2");
  if (!(mu > 0.0)) throw ConfigError("dominated sampler: mu must be > 0");
  if (!xi_sampler) throw ConfigError("dominated sampler: xi sampler required");
  for (const auto l : lambda_seq)
    if (!(l >= 0.0)) throw ConfigError("dominated sampler: lambda_k must be >= 0");

  std::vector<PointPattern> parts;
  parts.reserve(static_cast<std::size_t>(d) + 1);
  PointPattern z;
  const int count = poisson(rng, mu / (d + 1));
  if (count > 0) z.deposit(2, count);
  parts.push_back(std::move(z));

  PointPattern first = xi_sampler(rng);
  require_even_atoms(first);
  parts.push_back(shift(thin(first, 1.0 / d, rng), 2));

  for (int i = 2; i <= d; ++i) {
    const std::int64_t s = sample_S(mu, d, lambda_seq, rng);
    if (s == kInfiniteDelay) continue;
    PointPattern copy = xi_sampler(rng);
    require_even_atoms(copy);
    parts.push_back(shift(thin(copy, 1.0 / d, rng), 2 + 2 * s));
  }
  return superpose(parts);
}

TraceStats trace_stats(const Trace& trace, const std::vector<VertexRef>& ray) {
  if (ray.empty() || !ray.front().is_root())
    throw AddressingError("trace_stats: ray must start at the root");
  for (std::size_t i = 1; i < ray.size(); ++i) {
    const VertexRef& a = ray[i - 1];
    const VertexRef& b = ray[i];
    const bool child = !b.above_root && !a.above_root &&
                       b.path.size() == a.path.size() + 1 &&
                       std::equal(a.path.begin(), a.path.end(), b.path.begin());
    if (!child)
      throw AddressingError("trace_stats: ray must descend child by child");
  }
  TraceStats stats;
  stats.D = trace.D_series;
  stats.V = trace.V_series;
  stats.tau.reserve(ray.size() > 0 ? ray.size() - 1 : 0);
  for (std::size_t i = 1; i < ray.size(); ++i) {
    const auto a = trace.first_visit_time.find(to_string(ray[i - 1]));
    const auto b = trace.first_visit_time.find(to_string(ray[i]));
    if (a == trace.first_visit_time.end() || b == trace.first_visit_time.end())
      stats.tau.push_back(std::nullopt);
    else
      stats.tau.push_back(b->second - a->second);
  }
  return stats;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

const char* variant_name(FrogVariant v) {
  switch (v) {
    case FrogVariant::Standard: return "standard";
    case FrogVariant::Nonbacktracking: return "nonbacktracking";
    case FrogVariant::SelfSimilar: return "self_similar";
  }
  return "?";
}

const char* tree_name(TreeVariant v) {
  switch (v) {
    case TreeVariant::Homogeneous: return "homogeneous";
    case TreeVariant::RootedInfinite: return "rooted_infinite";
    case TreeVariant::RootedFinite: return "rooted_finite";
  }
  return "?";
}

}  // namespace

void write_series_csv(const Trace& trace, const std::string& path) {
  auto out = open_out(path);
  out << "t,V_t,D_t\n";
  for (std::size_t t = 0; t < trace.V_series.size(); ++t)
    out << t << ',' << trace.V_series[t] << ',' << trace.D_series[t] << '\n';
}

void write_first_visits_csv(const Trace& trace, const std::string& path) {
  auto out = open_out(path);
  std::vector<std::pair<std::int64_t, std::string>> rows;
  rows.reserve(trace.first_visit_time.size());
  for (const auto& [vertex, time] : trace.first_visit_time)
    rows.emplace_back(time, vertex);
  std::sort(rows.begin(), rows.end());
  out << "vertex,first_visit_time\n";
  for (const auto& [time, vertex] : rows) out << vertex << ',' << time << '\n';
}

void write_run_summary_json(const SimConfig& config, const Trace& trace,
                            const std::string& path) {
  nlohmann::json init;
  switch (config.init.kind) {
    case InitLaw::Kind::PoissonPerSite:
      init = {{"law", "poisson_per_site"}, {"mu", config.init.mu}};
      break;
    case InitLaw::Kind::OnePerSite:
      init = {{"law", "one_per_site"}};
      break;
    case InitLaw::Kind::Fixed:
      init = {{"law", "fixed"}, {"count", config.init.count}};
      break;
  }
  const nlohmann::json doc = {
      {"seed", config.seed},
      {"config",
       {{"tree",
         {{"family", tree_name(config.tree.variant)},
          {"d", config.tree.d},
          {"height", config.tree.height}}},
        {"variant", variant_name(config.variant)},
        {"init", init},
        {"horizon", config.horizon},
        {"depth_cap", config.depth_cap},
        {"frog_cap", config.frog_cap},
        {"root_reflect", config.root_reflect},
        {"prune_depth", config.prune_depth}}},
      {"counts",
       {{"frogs_created", trace.frogs_created},
        {"root_visits", trace.return_process.total_count()},
        {"first_visits_recorded", trace.first_visit_time.size()}}},
      {"truncation_events", trace.truncation_events}};
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace froglab
