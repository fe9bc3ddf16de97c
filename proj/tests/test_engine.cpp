#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "froglab/errors.hpp"
#include "froglab/frog_engine.hpp"
#include "froglab/pointproc.hpp"
#include "froglab/rng.hpp"
#include "froglab/tree.hpp"

using namespace froglab;

namespace {

SimConfig base_config(FrogVariant variant, int horizon) {
  SimConfig cfg;
  cfg.tree = TreeKind::rooted_infinite(2);
  cfg.variant = variant;
  cfg.horizon = horizon;
  return cfg;
}

Trace run_any(const SimConfig& cfg) {
  return cfg.variant == FrogVariant::SelfSimilar ? run_self_similar(cfg)
                                                 : run(cfg);
}

// Atom mass at a given time, averaged over trials of `sample`.
template <class Sample>
double mean_count_at(std::int64_t time, int trials, Sample&& sample) {
  double total = 0.0;
  for (int i = 0; i < trials; ++i) total += static_cast<double>(sample(i).count_at(time));
  return total / trials;
}

}  // namespace

TEST_CASE("config validation rejects the unusable combinations") {
  SimConfig cfg = base_config(FrogVariant::Standard, 4);

  cfg.tree = TreeKind::homogeneous(2);
  CHECK_THROWS_AS(run(cfg), ConfigError);

  cfg = base_config(FrogVariant::SelfSimilar, 4);
  CHECK_THROWS_AS(run(cfg), ConfigError);  // wrong entry point
  cfg.variant = FrogVariant::Standard;
  CHECK_THROWS_AS(run_self_similar(cfg), ConfigError);

  cfg = base_config(FrogVariant::Standard, 0);
  CHECK_THROWS_AS(run(cfg), ConfigError);

  cfg = base_config(FrogVariant::Standard, 4);
  cfg.init = InitLaw::poisson(0.0);
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg.init = InitLaw::fixed(-1);
  CHECK_THROWS_AS(run(cfg), ConfigError);

  cfg = base_config(FrogVariant::Standard, 4);
  cfg.root_reflect = true;
  CHECK_THROWS_AS(run(cfg), ConfigError);

  cfg = base_config(FrogVariant::SelfSimilar, 4);
  cfg.tree = TreeKind::rooted_finite(2, 3);
  CHECK_THROWS_AS(run_self_similar(cfg), ConfigError);

  cfg = base_config(FrogVariant::Standard, 4);
  cfg.frog_cap = 0;
  CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("woken frogs sit out the step they wake on") {
  // Fixed(1) sleepers, d = 2: the initial frog wakes one frog at time 1;
  // both are at a root child, and each independently returns at time 2
  // with probability 1/3.  V_1 = 0 always; E[V_2] = 2/3.
  const int trials = 30000;
  SimConfig cfg = base_config(FrogVariant::Standard, 2);
  cfg.init = InitLaw::fixed(1);
  double total = 0.0;
  bool saw_double_return = false;
  for (int i = 0; i < trials; ++i) {
    cfg.seed = derive_seed(11, static_cast<std::uint64_t>(i));
    const Trace tr = run(cfg);
    REQUIRE(tr.V_series.size() == 3);
    CHECK(tr.V_series[0] == 0);
    CHECK(tr.V_series[1] == 0);
    total += static_cast<double>(tr.V_series[2]);
    if (tr.V_series[2] == 2) saw_double_return = true;
  }
  const double se = std::sqrt((4.0 / 9.0) / trials);
  CHECK(std::abs(total / trials - 2.0 / 3.0) < 4 * se);
  CHECK(saw_double_return);  // P = 1/9, so ~3300 of the trials
}

TEST_CASE("nonbacktracking initial frog cannot return at time 2") {
  // Same setup, nonbacktracking variant: the initial frog excludes the
  // root, so only the woken frog can return.  E[V_2] = 1/3.
  const int trials = 30000;
  SimConfig cfg = base_config(FrogVariant::Nonbacktracking, 2);
  cfg.init = InitLaw::fixed(1);
  double total = 0.0;
  for (int i = 0; i < trials; ++i) {
    cfg.seed = derive_seed(12, static_cast<std::uint64_t>(i));
    total += static_cast<double>(run(cfg).V_series[2]);
  }
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / trials);
  CHECK(std::abs(total / trials - 1.0 / 3.0) < 4 * se);
}

TEST_CASE("self-similar time-2 returns are Poisson(mu/(d+1))") {
  const double mu = 3.0;
  const int trials = 20000;
  SimConfig cfg = base_config(FrogVariant::SelfSimilar, 2);
  cfg.init = InitLaw::poisson(mu);
  double total = 0.0;
  for (int i = 0; i < trials; ++i) {
    cfg.seed = derive_seed(13, static_cast<std::uint64_t>(i));
    total += static_cast<double>(run_self_similar(cfg).return_process.count_at(2));
  }
  const double se = std::sqrt(1.0 / trials);  // Poisson(1) variance
  CHECK(std::abs(total / trials - 1.0) < 4 * se);
}

TEST_CASE("first passage beyond the entry vertex has the product law") {
  // d = 2, mu = 3/2: the entry vertex v0 is visited at time 1; a fixed
  // child v1 of v0 is missed at time 2 iff the entrant picks the other
  // child (1/2) and no woken frog lands on it ((2/3)^Poisson(mu) in
  // expectation e^{-mu/3}), so P = (1/2) e^{-1/2} = 0.30326532985632.
  const double miss = 0.3032653298563167;
  const int trials = 20000;
  SimConfig cfg = base_config(FrogVariant::SelfSimilar, 4);
  cfg.init = InitLaw::poisson(1.5);
  int hit_at_2 = 0;
  for (int i = 0; i < trials; ++i) {
    cfg.seed = derive_seed(14, static_cast<std::uint64_t>(i));
    const Trace tr = run_self_similar(cfg);
    const auto zero = tr.first_visit_time.find("0");
    const bool entry_is_zero =
        zero != tr.first_visit_time.end() && zero->second == 1;
    const std::string v1 = entry_is_zero ? "0/0" : "1/0";
    const auto it = tr.first_visit_time.find(v1);
    if (it != tr.first_visit_time.end() && it->second == 2) ++hit_at_2;
  }
  const double p = static_cast<double>(hit_at_2) / trials;
  const double se = std::sqrt(miss * (1 - miss) / trials);
  CHECK(std::abs(p - (1 - miss)) < 4 * se);
}

TEST_CASE("root visit times are even on the rooted tree") {
  for (const auto variant : {FrogVariant::Standard, FrogVariant::Nonbacktracking,
                             FrogVariant::SelfSimilar}) {
    SimConfig cfg = base_config(variant, 9);
    cfg.init = InitLaw::poisson(2.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
      cfg.seed = derive_seed(15, s);
      const Trace tr = run_any(cfg);
      for (const auto& atom : tr.return_process.atoms) {
        CHECK(atom.time % 2 == 0);
        CHECK(atom.time >= 2);
      }
    }
  }
}

TEST_CASE("V series accumulates the return process") {
  SimConfig cfg = base_config(FrogVariant::Standard, 8);
  cfg.init = InitLaw::poisson(1.5);
  for (std::uint64_t s = 0; s < 8; ++s) {
    cfg.seed = derive_seed(16, s);
    const Trace tr = run(cfg);
    REQUIRE(tr.V_series.size() == 9);
    REQUIRE(tr.D_series.size() == 9);
    CHECK(tr.D_series[0] == 0);
    for (int t = 0; t <= 8; ++t) {
      CHECK(tr.V_series[t] == tr.return_process.count_in(1, t));
      if (t > 0) {
        CHECK(tr.V_series[t] >= tr.V_series[t - 1]);
        CHECK(tr.D_series[t] >= tr.D_series[t - 1]);
      }
    }
  }
}

TEST_CASE("sleeper conservation ties frog count to visited vertices") {
  SimConfig cfg = base_config(FrogVariant::Standard, 7);
  cfg.init = InitLaw::fixed(3);
  cfg.seed = 99;
  const Trace tr = run(cfg);
  const auto visited = static_cast<std::int64_t>(tr.first_visit_time.size());
  CHECK(tr.frogs_created == 1 + 3 * (visited - 1));

  cfg.init = InitLaw::one_per_site();
  const Trace one = run(cfg);
  CHECK(one.frogs_created ==
        static_cast<std::int64_t>(one.first_visit_time.size()));

  SimConfig ss = base_config(FrogVariant::SelfSimilar, 8);
  ss.init = InitLaw::fixed(2);
  ss.seed = 7;
  const Trace tr2 = run_self_similar(ss);
  const auto visited2 = static_cast<std::int64_t>(tr2.first_visit_time.size());
  CHECK(tr2.frogs_created == 1 + 2 * (visited2 - 1));
  CHECK(tr2.truncation_events == 0);
}

TEST_CASE("equal seeds reproduce the trace bit for bit") {
  SimConfig cfg = base_config(FrogVariant::SelfSimilar, 10);
  cfg.init = InitLaw::poisson(4.0);
  cfg.root_reflect = true;
  cfg.seed = 2024;
  const Trace a = run_self_similar(cfg);
  const Trace b = run_self_similar(cfg);
  CHECK(a == b);

  cfg.seed = 2025;
  const Trace c = run_self_similar(cfg);
  CHECK_FALSE(a == c);

  SimConfig std_cfg = base_config(FrogVariant::Standard, 8);
  std_cfg.init = InitLaw::poisson(2.0);
  std_cfg.seed = 5;
  CHECK(run(std_cfg) == run(std_cfg));
}

TEST_CASE("raising mu only adds frogs: V and D grow pointwise") {
  for (const auto variant :
       {FrogVariant::Standard, FrogVariant::Nonbacktracking}) {
    SimConfig lo = base_config(variant, 8);
    lo.init = InitLaw::poisson(1.0);
    SimConfig hi = lo;
    hi.init = InitLaw::poisson(2.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
      lo.seed = hi.seed = derive_seed(17, s);
      const Trace a = run(lo);
      const Trace b = run(hi);
      for (std::size_t t = 0; t < a.V_series.size(); ++t) {
        CHECK(b.V_series[t] >= a.V_series[t]);
        CHECK(b.D_series[t] >= a.D_series[t]);
      }
      for (const auto& [vertex, time] : a.first_visit_time) {
        const auto it = b.first_visit_time.find(vertex);
        REQUIRE(it != b.first_visit_time.end());
        CHECK(it->second <= time);
      }
    }
  }
}

TEST_CASE("frog cap breach raises a truncation error with the partial trace") {
  SimConfig cfg = base_config(FrogVariant::Standard, 6);
  cfg.init = InitLaw::one_per_site();
  cfg.frog_cap = 1;
  cfg.seed = 3;
  try {
    run(cfg);
    FAIL("expected TruncationError");
  } catch (const TruncationError& err) {
    CHECK(std::string(err.what()).find("frog_cap") != std::string::npos);
    CHECK(err.partial().truncation_events == 1);
    CHECK(err.partial().frogs_created == 2);
    CHECK(err.partial().V_series.size() == 1);  // breach during step 1
  }
}

TEST_CASE("depth cap breach raises a truncation error") {
  SimConfig cfg = base_config(FrogVariant::Standard, 12);
  cfg.init = InitLaw::one_per_site();
  cfg.depth_cap = 2;
  cfg.seed = 1;
  CHECK_THROWS_AS(run(cfg), TruncationError);
}

TEST_CASE("pruning below half the horizon leaves root statistics intact") {
  for (const auto variant : {FrogVariant::Standard, FrogVariant::SelfSimilar}) {
    SimConfig full = base_config(variant, 16);
    full.init = InitLaw::poisson(4.0);
    SimConfig pruned = full;
    pruned.prune_depth = 8;
    for (std::uint64_t s = 0; s < 5; ++s) {
      full.seed = pruned.seed = derive_seed(18, s);
      const Trace a = run_any(full);
      const Trace b = run_any(pruned);
      CHECK(a.return_process == b.return_process);
      CHECK(a.V_series == b.V_series);
      CHECK(b.frogs_created <= a.frogs_created);
    }
  }
}

TEST_CASE("reflected runs keep counting the root without dying there") {
  SimConfig kill = base_config(FrogVariant::SelfSimilar, 12);
  kill.init = InitLaw::poisson(8.0);
  SimConfig reflect = kill;
  reflect.root_reflect = true;
  double kill_total = 0.0, reflect_total = 0.0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    kill.seed = reflect.seed = derive_seed(19, s);
    kill_total += static_cast<double>(run_self_similar(kill).V_series.back());
    const Trace r = run_self_similar(reflect);
    reflect_total += static_cast<double>(r.V_series.back());
    for (const auto& atom : r.return_process.atoms) CHECK(atom.time % 2 == 0);
  }
  // The stopped continuation can only produce more root visits on average.
  CHECK(reflect_total > kill_total);
}

TEST_CASE("finite trees confine the infection") {
  SimConfig cfg;
  cfg.tree = TreeKind::rooted_finite(2, 2);
  cfg.variant = FrogVariant::Standard;
  cfg.init = InitLaw::one_per_site();
  cfg.horizon = 12;
  cfg.seed = 4;
  const Trace tr = run(cfg);
  CHECK(tr.first_visit_time.size() <= 7);  // 1 + 2 + 4 vertices
  CHECK(tr.frogs_created <= 7);
  CHECK(tr.D_series.back() <= 2);
  for (const auto& [vertex, time] : tr.first_visit_time)
    CHECK(time <= 12);
}

TEST_CASE("trace_stats reads passage times off the visit map") {
  SimConfig cfg = base_config(FrogVariant::Standard, 10);
  cfg.init = InitLaw::one_per_site();
  cfg.seed = 21;
  const Trace tr = run(cfg);

  std::vector<VertexRef> ray{VertexRef::root(), VertexRef::of({0}),
                             VertexRef::of({0, 0})};
  const TraceStats stats = trace_stats(tr, ray);
  REQUIRE(stats.tau.size() == 2);
  CHECK(stats.V == tr.V_series);
  CHECK(stats.D == tr.D_series);
  const auto fv0 = tr.first_visit_time.at("0");
  if (stats.tau[0]) {
    CHECK(*stats.tau[0] == fv0);
    const auto it = tr.first_visit_time.find("0/0");
    if (it != tr.first_visit_time.end())
      CHECK(*stats.tau[1] == it->second - fv0);
  }

  // A ray outrunning the horizon ends with unvisited vertices.
  std::vector<VertexRef> deep{VertexRef::root()};
  for (int i = 0; i < 14; ++i) deep.push_back(deep.back().child(0));
  const TraceStats far = trace_stats(tr, deep);
  CHECK_FALSE(far.tau.back().has_value());

  CHECK_THROWS_AS(trace_stats(tr, {}), AddressingError);
  CHECK_THROWS_AS(trace_stats(tr, {VertexRef::of({0})}), AddressingError);
  CHECK_THROWS_AS(
      trace_stats(tr, {VertexRef::root(), VertexRef::of({0, 0})}),
      AddressingError);
  CHECK_THROWS_AS(
      trace_stats(tr, {VertexRef::root(), VertexRef{true, {}}}),
      AddressingError);

  SimConfig quiet = cfg;
  quiet.record_first_visits = false;
  const Trace bare = run(quiet);
  CHECK(bare.first_visit_time.empty());
  const TraceStats none = trace_stats(bare, ray);
  CHECK_FALSE(none.tau[0].has_value());
}

TEST_CASE("star system: empty input leaves only the hub scatter") {
  const double mu = 21.0;
  const int trials = 30000;
  Rng rng = derive_rng(31, 0);
  const PatternSampler empty = [](Rng&) { return PointPattern{}; };
  double total = 0.0;
  for (int i = 0; i < trials; ++i) {
    const PointPattern out = run_star_A(empty, 2, mu, rng);
    for (const auto& atom : out.atoms) CHECK(atom.time == 2);
    total += static_cast<double>(out.count_at(2));
  }
  const double se = std::sqrt(7.0 / trials);
  CHECK(std::abs(total / trials - 7.0) < 4 * se);

  Rng rng2 = derive_rng(31, 1);
  const PointPattern silent = run_star_A(empty, 2, 0.0, rng2);
  CHECK(silent.empty());
}

TEST_CASE("star system: one deterministic atom lands with the derived mass") {
  const PatternSampler delta2 = [](Rng&) {
    PointPattern p;
    p.deposit(2);
    return p;
  };
  struct Case {
    int d;
    double mu;
    double expected;  // (1/d)(1 + (d-1)(1 - e^{-mu/(d+1)}))
    int trials;
  };
  const Case cases[] = {{2, 1.0, 0.6417343447131054, 100000},
                        {2, 21.0, 0.9995440590172228, 50000},
                        {3, 6.0, 0.8512465599010467, 100000}};
  int which = 0;
  for (const auto& c : cases) {
    Rng rng = derive_rng(32, static_cast<std::uint64_t>(which++));
    const double mean = mean_count_at(4, c.trials, [&](int) {
      return run_star_A(delta2, c.d, c.mu, rng);
    });
    const double se = std::sqrt(0.75 / c.trials);  // count in {0..d}, var < 3/4
    CHECK(std::abs(mean - c.expected) < 4 * se);
  }
}

TEST_CASE("star system rejects ill-formed inputs") {
  Rng rng = derive_rng(33, 0);
  const PatternSampler odd = [](Rng&) {
    PointPattern p;
    p.deposit(3);
    return p;
  };
  CHECK_THROWS_AS(run_star_A(odd, 2, 1.0, rng), ConfigError);
  const PatternSampler fine = [](Rng&) { return PointPattern{}; };
  CHECK_THROWS_AS(run_star_A(fine, 1, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(run_star_A(PatternSampler{}, 2, 1.0, rng), ConfigError);
}

TEST_CASE("dominated decomposition matches its first two moments") {
  // xi ~ Poisson pattern with intensity lambda_1 at time 2.  Then the
  // decomposition has mean mu/(d+1) at time 2 and
  // (lambda_1/d)(1 + (d-1) P[S=0]) at time 4.
  struct Case {
    double mu;
    double lambda1;
    double at4;
    int trials;
  };
  const Case cases[] = {{21.0, 7.0, 6.99680841312056, 30000},
                        {3.0, 0.5, 0.4080301397071394, 30000}};
  int which = 0;
  for (const auto& c : cases) {
    const std::vector<double> lambda{c.lambda1};
    const IntensityOnEvens intensity{lambda};
    Rng rng = derive_rng(34, static_cast<std::uint64_t>(which++));
    const PatternSampler xi = [&](Rng& g) {
      return sample_poisson_pp(intensity, g);
    };
    double at2 = 0.0, at4 = 0.0;
    for (int i = 0; i < c.trials; ++i) {
      const PointPattern out = sample_rhs_dominated(xi, lambda, 2, c.mu, rng);
      at2 += static_cast<double>(out.count_at(2));
      at4 += static_cast<double>(out.count_at(4));
    }
    at2 /= c.trials;
    at4 /= c.trials;
    const double se2 = std::sqrt((c.mu / 3.0) / c.trials);
    const double se4 = std::sqrt((c.lambda1 + 0.5) / c.trials);
    CHECK(std::abs(at2 - c.mu / 3.0) < 4 * se2);
    CHECK(std::abs(at4 - c.at4) < 4 * se4);
  }

  Rng rng = derive_rng(34, 9);
  const PatternSampler empty = [](Rng&) { return PointPattern{}; };
  const PointPattern only_z = sample_rhs_dominated(empty, {}, 2, 21.0, rng);
  for (const auto& atom : only_z.atoms) CHECK(atom.time == 2);

  CHECK_THROWS_AS(sample_rhs_dominated(empty, {-1.0}, 2, 1.0, rng),
                  ConfigError);
  CHECK_THROWS_AS(sample_rhs_dominated(empty, {}, 1, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(sample_rhs_dominated(empty, {}, 2, 0.0, rng), ConfigError);
}

TEST_CASE("exports round-trip through csv and json") {
  SimConfig cfg = base_config(FrogVariant::SelfSimilar, 8);
  cfg.init = InitLaw::poisson(3.0);
  cfg.seed = 77;
  const Trace tr = run_self_similar(cfg);

  const std::string series_path = "engine_test_series.csv";
  write_series_csv(tr, series_path);
  std::ifstream series(series_path);
  std::string line;
  REQUIRE(std::getline(series, line));
  CHECK(line == "t,V_t,D_t");
  int rows = 0;
  while (std::getline(series, line)) ++rows;
  CHECK(rows == static_cast<int>(tr.V_series.size()));

  const std::string visits_path = "engine_test_visits.csv";
  write_first_visits_csv(tr, visits_path);
  std::ifstream visits(visits_path);
  REQUIRE(std::getline(visits, line));
  CHECK(line == "vertex,first_visit_time");
  REQUIRE(std::getline(visits, line));
  CHECK(line == ",0");  // the root, visited at time 0
  rows = 1;
  while (std::getline(visits, line)) ++rows;
  CHECK(rows == static_cast<int>(tr.first_visit_time.size()));

  const std::string summary_path = "engine_test_summary.json";
  write_run_summary_json(cfg, tr, summary_path);
  std::ifstream summary(summary_path);
  const nlohmann::json doc = nlohmann::json::parse(summary);
  CHECK(doc.at("seed").get<std::uint64_t>() == 77);
  CHECK(doc.at("counts").at("frogs_created").get<std::int64_t>() ==
        tr.frogs_created);
  CHECK(doc.at("config").at("variant").get<std::string>() == "self_similar");
  CHECK(doc.at("truncation_events").get<int>() == 0);

  std::remove(series_path.c_str());
  std::remove(visits_path.c_str());
  std::remove(summary_path.c_str());
}
