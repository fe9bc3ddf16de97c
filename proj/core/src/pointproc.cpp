#include "froglab/pointproc.hpp"

#include <algorithm>
#include <cmath>

#include "froglab/concentration.hpp"
#include "froglab/errors.hpp"
#include "froglab/numerics.hpp"

namespace froglab {

void PointPattern::deposit(std::int64_t time, std::int64_t count) {
  if (time < 0) throw ConfigError("point times must be nonnegative");
  if (count <= 0) {
    if (count == 0) return;
    throw ConfigError("point multiplicities must be positive");
  }
  auto it = std::lower_bound(
      atoms.begin(), atoms.end(), time,
      [](const Atom& a, std::int64_t t) { return a.time < t; });
  if (it != atoms.end() && it->time == time)
    it->count += count;
  else
    atoms.insert(it, Atom{time, count});
}

std::int64_t PointPattern::total_count() const {
  std::int64_t total = 0;
  for (const auto& a : atoms) total += a.count;
  return total;
}

std::int64_t PointPattern::count_at(std::int64_t time) const {
  return count_in(time, time);
}

std::int64_t PointPattern::count_in(std::int64_t lo, std::int64_t hi) const {
  std::int64_t total = 0;
  auto it = std::lower_bound(
      atoms.begin(), atoms.end(), lo,
      [](const Atom& a, std::int64_t t) { return a.time < t; });
  for (; it != atoms.end() && it->time <= hi; ++it) total += it->count;
  return total;
}

PointPattern sample_poisson_pp(const IntensityOnEvens& intensity, Rng& rng) {
  PointPattern out;
  for (std::size_t k = 0; k < intensity.lambda.size(); ++k) {
    const double rate = intensity.lambda[k];
    if (rate < 0.0 || !std::isfinite(rate))
      throw ConfigError("intensity entries must be finite and >= 0");
    const int m = poisson(rng, rate);
    if (m > 0) out.atoms.push_back({std::int64_t(2 * (k + 1)), m});
  }
  return out;  // built in increasing time order already
}

PointPattern thin(const PointPattern& pattern, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("thinning probability must lie in [0,1]");
  PointPattern out;
  for (const auto& a : pattern.atoms) {
    std::int64_t kept = 0;
    for (std::int64_t i = 0; i < a.count; ++i)
      if (bernoulli(rng, p)) ++kept;
    if (kept > 0) out.atoms.push_back({a.time, kept});
  }
  return out;
}

PointPattern shift(const PointPattern& pattern, std::int64_t t) {
  if (t < 0) throw ConfigError("shift must be nonnegative");
  PointPattern out = pattern;
  for (auto& a : out.atoms) a.time += t;
  return out;
}

PointPattern superpose(const std::vector<PointPattern>& patterns) {
  std::vector<PointPattern::Atom> all;
  for (const auto& p : patterns)
    all.insert(all.end(), p.atoms.begin(), p.atoms.end());
  std::sort(all.begin(), all.end(),
            [](const auto& x, const auto& y) { return x.time < y.time; });
  PointPattern out;
  for (const auto& a : all) {
    if (!out.atoms.empty() && out.atoms.back().time == a.time)
      out.atoms.back().count += a.count;
    else
      out.atoms.push_back(a);
  }
  return out;
}

std::int64_t sample_S(double mu, int d, const std::vector<double>& lambda_seq,
                      Rng& rng) {
  if (!(mu > 0.0) || d < 2) throw ConfigError("sample_S: need mu > 0, d >= 2");
  for (double l : lambda_seq)
    if (l < 0.0 || !std::isfinite(l))
      throw ConfigError("sample_S: lambda entries must be finite and >= 0");
  if (bernoulli(rng, -std::expm1(-mu / (d + 1.0)))) return 0;
  for (std::size_t k = 0; k < lambda_seq.size(); ++k)
    if (bernoulli(rng, -std::expm1(-lambda_seq[k] / d)))
      return std::int64_t(k + 1);
  return kInfiniteDelay;
}

double empirical_void(const std::vector<PointPattern>& samples,
                      std::int64_t lo, std::int64_t hi) {
  if (samples.empty()) throw ConfigError("empirical_void: no samples");
  std::size_t voids = 0;
  for (const auto& s : samples)
    if (s.void_on(lo, hi)) ++voids;
  return double(voids) / double(samples.size());
}

DominanceReport dominance_report(const std::vector<PointPattern>& samples,
                                 const IntensityOnEvens& target,
                                 double confidence) {
  if (samples.empty())
    throw ConfigError("dominance_report: refusing an empty sample set");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("dominance_report: confidence must be in (0,1)");

  const std::size_t n = target.lambda.size();
  const long trials = long(samples.size());

  // One pass over the samples: first point time >= 2 (for the prefix void
  // counts) and per-atom count sums/squares (for the mean checks).
  std::vector<long> first_at_prefix(n + 1, 0);  // index k: first time <= 2k
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  for (const auto& s : samples) {
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    for (const auto& a : s.atoms) {
      if (a.time >= 2) {
        first = a.time;
        break;
      }
    }
    if (first <= std::int64_t(2 * n))
      ++first_at_prefix[std::size_t((first + 1) / 2)];  // ceil(first/2) >= 1
    for (const auto& a : s.atoms) {
      if (a.time >= 2 && a.time <= std::int64_t(2 * n) && a.time % 2 == 0) {
        sum[std::size_t(a.time / 2 - 1)] += double(a.count);
        sumsq[std::size_t(a.time / 2 - 1)] += double(a.count) * double(a.count);
      }
    }
  }

  DominanceReport report;
  report.sample_count = samples.size();
  report.confidence = confidence;
  report.all_pass = true;
  const double z = normal_quantile(confidence);

  KahanSum lambda_sum;
  long hits = 0;  // samples with a point somewhere in {2,...,2k}
  for (std::size_t k = 1; k <= n; ++k) {
    hits += first_at_prefix[k];
    lambda_sum.add(target.lambda[k - 1]);

    DominanceCheck void_check;
    void_check.name = "void[2.." + std::to_string(2 * k) + "]";
    void_check.bound = std::exp(-lambda_sum.value());
    void_check.statistic = binomial_lower_ci(trials - hits, trials, confidence);
    void_check.margin = void_check.bound - void_check.statistic;
    void_check.pass = void_check.margin >= 0.0;
    report.all_pass = report.all_pass && void_check.pass;
    report.checks.push_back(std::move(void_check));

    const double mean = sum[k - 1] / double(trials);
    const double var =
        std::max(0.0, sumsq[k - 1] / double(trials) - mean * mean);
    DominanceCheck mean_check;
    mean_check.name = "mean@" + std::to_string(2 * k);
    mean_check.bound = target.lambda[k - 1];
    mean_check.statistic = mean + z * std::sqrt(var / double(trials));
    mean_check.margin = mean_check.statistic - mean_check.bound;
    mean_check.pass = mean_check.margin >= 0.0;
    report.all_pass = report.all_pass && mean_check.pass;
    report.checks.push_back(std::move(mean_check));
  }
  return report;
}

}  // namespace froglab
