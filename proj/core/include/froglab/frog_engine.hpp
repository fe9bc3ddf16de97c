// Discrete-time frog model on the rooted trees, in three variants:
//
//   Standard          -- frogs are simple random walks, immortal;
//   Nonbacktracking   -- frogs are root-biased nonbacktracking walks,
//                        immortal;
//   SelfSimilar       -- frogs are uniform nonbacktracking walks, killed on
//                        arrival at the root (times >= 1); of the frogs
//                        entering a subtree from its parent, only the first
//                        survives (lowest id on a simultaneous arrival) and
//                        every later parent-side arrival is killed.  With
//                        root_reflect the root kills are replaced by the
//                        stopped continuation: an arriving frog is counted,
//                        then moves on with the root-biased law unless its
//                        drawn target child was visited before the current
//                        step, in which case it halts for good.
//
// Dynamics are synchronous: every active frog moves each step; a frog's
// first move is uniform over all neighbors; sleepers wake the first time
// their vertex is occupied and move from the following step on.  Sleeping
// counts are drawn lazily at first visit from a per-vertex uniform keyed by
// (seed, vertex path), and each frog's moves come from its own stream keyed
// by (seed, wake vertex, slot), so runs with different mu but equal seed
// are coupled: the smaller-mu frog set is a prefix of the larger one,
// vertex by vertex, with identical paths.
//
// Only visited vertices are materialized.  Two hard caps guard the
// exponential growth of the infected set -- depth_cap (default horizon + 2)
// and frog_cap -- and breaching either raises TruncationError carrying the
// partial trace; nothing is ever truncated silently.  Independently,
// prune_depth (off by default) kills frogs the moment they step below that
// depth.  This is exact, not approximate, for root statistics: along any
// causal chain time + level never decreases, so a chain that dips below
// depth L cannot touch the root again before time 2(L+1).  With
// prune_depth = floor(horizon/2) the return process is unchanged on the
// whole horizon at a small fraction of the cost.
//
// The star-graph particle system that defines the operator A on point
// patterns, and the sampler for its dominating decomposition
// Z delta_2 + sigma_2 tau xi + sum_i sigma_{2+2S_i} tau xi_i, live here
// too, as does the trace post-processor computing passage times along a
// ray.

#ifndef FROGLAB_FROG_ENGINE_HPP
#define FROGLAB_FROG_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "froglab/pointproc.hpp"
#include "froglab/rng.hpp"
#include "froglab/tree.hpp"

namespace froglab {

enum class FrogVariant { Standard, Nonbacktracking, SelfSimilar };

struct InitLaw {
  enum class Kind { PoissonPerSite, OnePerSite, Fixed };
  Kind kind = Kind::PoissonPerSite;
  double mu = 1.0;          // PoissonPerSite only
  std::int64_t count = 0;   // Fixed only

  static InitLaw poisson(double mu) {
    return InitLaw{Kind::PoissonPerSite, mu, 0};
  }
  static InitLaw one_per_site() { return InitLaw{Kind::OnePerSite, 0.0, 0}; }
  static InitLaw fixed(std::int64_t k) {
    return InitLaw{Kind::Fixed, 0.0, k};
  }
};

struct SimConfig {
  TreeKind tree = TreeKind::rooted_infinite(2);
  FrogVariant variant = FrogVariant::Standard;
  InitLaw init = InitLaw::poisson(1.0);
  int horizon = 1;               // T, steps simulated
  int depth_cap = -1;            // < 0: resolved to horizon + 2 at run time
  std::int64_t frog_cap = 100'000'000;
  std::uint64_t seed = 0;
  bool root_reflect = false;     // SelfSimilar only
  int prune_depth = -1;          // < 0: off; see header comment
  bool record_first_visits = true;
};

struct Trace {
  // Keys are the slash-joined vertex addresses of to_string(); present only
  // when the config asked for the map.  The root maps to 0.
  std::unordered_map<std::string, std::int64_t> first_visit_time;
  PointPattern return_process;        // root arrivals at times >= 1
  std::vector<std::int64_t> V_series;  // V_series[t] = returns on [1, t]
  std::vector<std::int64_t> D_series;  // deepest fully visited level by t
  std::int64_t frogs_created = 0;
  std::int64_t truncation_events = 0;

  bool operator==(const Trace&) const = default;
};

// depth_cap or frog_cap breached.  what() names the cap; partial() is the
// trace accumulated up to the breach (truncation_events = 1).
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, Trace partial)
      : std::runtime_error(what),
        partial_(std::make_shared<Trace>(std::move(partial))) {}
  const Trace& partial() const { return *partial_; }

 private:
  std::shared_ptr<const Trace> partial_;
};

// Standard / Nonbacktracking variants.  Throws ConfigError on a bad config
// (including variant == SelfSimilar), TruncationError on cap breach.
Trace run(const SimConfig& config);

// SelfSimilar variant (tree must be RootedInfinite); honors root_reflect.
Trace run_self_similar(const SimConfig& config);

// Draws one point pattern per call; used for the xi copies below.  Patterns
// must be supported on even times >= 2 (ConfigError otherwise).
using PatternSampler = std::function<PointPattern(Rng&)>;

// One run of the star-graph particle system defining A xi: Poi(mu) sleepers
// at the hub wake at time 1 and scatter uniformly at time 2; the initial
// particle pins the first leaf at time 2; a first-visited leaf releases one
// particle per atom k of its own xi copy, which lands k steps after the
// visit on a uniform non-leaf-returning neighbor.  Returns the visit times
// of the designated return vertex.
PointPattern run_star_A(const PatternSampler& xi_sampler, int d, double mu,
                        Rng& rng);

// Z delta_2 + sigma_2 tau xi^(1) + sum_{i=2}^d sigma_{2+2 S^(i)} tau xi^(i)
// with Z ~ Poi(mu/(d+1)), S per the mixed-geometric law of sample_S on
// lambda_seq, tau the 1/d-thinning, all components independent.  An
// infinite S contributes nothing (its xi copy is not drawn).
PointPattern sample_rhs_dominated(const PatternSampler& xi_sampler,
                                  const std::vector<double>& lambda_seq,
                                  int d, double mu, Rng& rng);

struct TraceStats {
  // tau[i] = first_visit(ray[i+1]) - first_visit(ray[i]); absent when
  // either endpoint went unvisited (requires the recorded visit map).
  std::vector<std::optional<std::int64_t>> tau;
  std::vector<std::int64_t> D;  // copies of the trace series
  std::vector<std::int64_t> V;
};

// ray must descend from the root, each vertex a child of the previous
// (AddressingError otherwise).
TraceStats trace_stats(const Trace& trace, const std::vector<VertexRef>& ray);

// Exports: (t, V_t, D_t) rows; (vertex, first_visit_time) rows; a JSON
// summary {seed, config, counts, truncation_events}.  Throw
// std::runtime_error when the file cannot be written.
void write_series_csv(const Trace& trace, const std::string& path);
void write_first_visits_csv(const Trace& trace, const std::string& path);
void write_run_summary_json(const SimConfig& config, const Trace& trace,
                            const std::string& path);

}  // namespace froglab

#endif  // FROGLAB_FROG_ENGINE_HPP
