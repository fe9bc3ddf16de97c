// Integer-supported point patterns and the operators the return-process
// analysis composes: Poisson sampling on even atoms, independent thinning,
// time shifts, superposition, the mixed-geometric delay S, and the
// statistical dominance certificate that compares simulated return
// processes against a target Poisson intensity.

#ifndef FROGLAB_POINTPROC_HPP
#define FROGLAB_POINTPROC_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "froglab/rng.hpp"

namespace froglab {

struct PointPattern {
  struct Atom {
    std::int64_t time = 0;   // >= 0
    std::int64_t count = 0;  // > 0
    bool operator==(const Atom&) const = default;
  };
  // Sorted by time, times strictly increasing (multiplicities merge).
  std::vector<Atom> atoms;

  bool operator==(const PointPattern&) const = default;
  bool empty() const { return atoms.empty(); }

  // Adds `count` points at `time`, keeping the representation canonical.
  void deposit(std::int64_t time, std::int64_t count = 1);

  std::int64_t total_count() const;
  std::int64_t count_at(std::int64_t time) const;
  std::int64_t count_in(std::int64_t lo, std::int64_t hi) const;  // inclusive
  bool void_on(std::int64_t lo, std::int64_t hi) const {
    return count_in(lo, hi) == 0;
  }
};

// Intensities on the even grid: lambda[k-1] is the rate of the atom at time
// 2k, k = 1..size().
struct IntensityOnEvens {
  std::vector<double> lambda;
};

// Independent Poi(lambda_k) multiplicities at times 2k.
PointPattern sample_poisson_pp(const IntensityOnEvens& intensity, Rng& rng);

// Keeps each point independently with probability p.
PointPattern thin(const PointPattern& pattern, double p, Rng& rng);

// Moves every atom forward by t >= 0.
PointPattern shift(const PointPattern& pattern, std::int64_t t);

PointPattern superpose(const std::vector<PointPattern>& patterns);

// The delay S of the dominated decomposition:
//   P[S = 0]         = 1 - e^(-mu/(d+1))
//   P[S = k | S >= k] = 1 - e^(-lambda_k / d),  1 <= k <= n
// with the remaining mass on infinity (an explicit sentinel; shifting a
// pattern by 2 + 2*S then yields the empty pattern).
inline constexpr std::int64_t kInfiniteDelay =
    std::numeric_limits<std::int64_t>::max();
std::int64_t sample_S(double mu, int d, const std::vector<double>& lambda_seq,
                      Rng& rng);

// One tested consequence of stochastic dominance, with its verdict.
// `margin` is the slack toward passing: the check passes iff margin >= 0.
struct DominanceCheck {
  std::string name;
  double statistic = 0.0;  // certified empirical side of the comparison
  double bound = 0.0;      // model prediction it must respect
  double margin = 0.0;
  bool pass = false;
};

struct DominanceReport {
  std::vector<DominanceCheck> checks;
  bool all_pass = false;
  std::size_t sample_count = 0;
  double confidence = 0.0;
};

// Statistical certificate that `samples` are consistent with stochastically
// dominating a Poisson pattern of the target intensity.  Two families of
// necessary conditions are tested, per prefix k and per atom:
//   - the one-sided lower confidence bound of the empirical void
//     probability on {2,...,2k} must not exceed exp(-sum_{j<=k} lambda_j);
//   - the empirical mean count at 2k plus its confidence margin must reach
//     lambda_k.
// This certifies consistency with dominance; it is not a proof (the full
// coupling statement is not finite-sample testable).  Throws ConfigError on
// an empty sample list.
DominanceReport dominance_report(const std::vector<PointPattern>& samples,
                                 const IntensityOnEvens& target,
                                 double confidence);

// Fraction of samples with no point in [lo, hi] (inclusive).
double empirical_void(const std::vector<PointPattern>& samples,
                      std::int64_t lo, std::int64_t hi);

}  // namespace froglab

#endif  // FROGLAB_POINTPROC_HPP
