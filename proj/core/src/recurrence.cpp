#include "froglab/recurrence.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "froglab/errors.hpp"
#include "froglab/numerics.hpp"

namespace froglab {

double SequenceTables::P(int k) const {
  if (k < 0 || k > n) throw std::out_of_range("P index out of range");
  return std::exp(log_P[static_cast<std::size_t>(k)]);
}

SequenceTables compute_tables(int d, double mu, int n) {
  if (d < 2) throw ConfigError("compute_tables: d must be >= 2");
  if (!(mu > 0.0)) throw ConfigError("compute_tables: mu must be > 0");
  if (n < 1) throw ConfigError("compute_tables: n must be >= 1");

  SequenceTables t;
  t.d = d;
  t.mu = mu;
  t.n = n;
  t.a = std::exp(-mu / (d + 1.0));
  t.log_P.assign(static_cast<std::size_t>(n) + 1, 0.0);
  t.p.assign(static_cast<std::size_t>(n) + 1, 0.0);
  t.lambda.assign(static_cast<std::size_t>(n) + 1, 0.0);

  const double a = t.a;
  t.p[0] = a;
  t.log_P[1] = -mu / (d * (d + 1.0));
  t.p[1] = std::exp(t.log_P[1]);
  t.lambda[1] = mu / (d + 1.0);

  // log_P is accumulated with compensation so the product/sum link can be
  // reconstructed from the lambda table to well under 1e-12 relative error
  // even at n in the hundreds.
  KahanSum log_sum;
  log_sum.add(t.log_P[1]);
  if (n >= 2) {
    t.p[2] = (1.0 - a) * t.p[1] + a;  // P_2/P_1 from the defining product
    const double step = std::log(t.p[2]);
    t.lambda[2] = -d * step;
    log_sum.add(step);
    t.log_P[2] = log_sum.value();
  }

  // Advance the ratios: every convolution term is divided by P_m before
  // leaving log space, so nothing underflows no matter how deep P_m sinks.
  //   p_{m+1} = P_1 [ (1-a) + a sum_{i=1}^{m-1} (1-p_i) P_{i-1}P_{m-i}/P_m
  //                         + a P_{m-1}/P_m ]
  for (int m = 2; m < n; ++m) {
    KahanSum conv;
    for (int i = 1; i < m; ++i)
      conv.add((1.0 - t.p[i]) *
               std::exp(t.log_P[i - 1] + t.log_P[m - i] - t.log_P[m]));
    const double bracket = (1.0 - a) + a * conv.value() +
                           a * std::exp(t.log_P[m - 1] - t.log_P[m]);
    const double next = t.p[1] * bracket;
    if (!(next > 0.0) || !std::isfinite(next))
      throw std::range_error(
          "sequence tables left the representable range; largest valid "
          "index is " +
          std::to_string(m));
    t.p[m + 1] = next;
    const double step = std::log(next);
    t.lambda[m + 1] = -d * step;
    log_sum.add(step);
    t.log_P[m + 1] = log_sum.value();
  }

  // Cross-check against the direct P-form recursion while it stays within
  // double range.
  if (n >= 2) {
    std::vector<double> P(static_cast<std::size_t>(n) + 1, 0.0);
    P[0] = 1.0;
    P[1] = std::exp(t.log_P[1]);
    P[2] = P[1] * ((1.0 - a) * P[1] + a);
    double worst = std::abs(P[2] / std::exp(t.log_P[2]) - 1.0);
    for (int m = 2; m < n && P[m] > 1e-280; ++m) {
      KahanSum conv;
      for (int i = 1; i < m; ++i) conv.add((P[i - 1] - P[i]) * P[m - i]);
      P[m + 1] = P[1] * ((1.0 - a) * P[m] + a * (conv.value() + P[m - 1]));
      if (P[m + 1] <= 0.0) break;
      worst = std::max(worst,
                       std::abs(P[m + 1] / std::exp(t.log_P[m + 1]) - 1.0));
    }
    t.form_agreement_rel = worst;
  }
  return t;
}

MonotoneReport verify_monotone(const SequenceTables& t) {
  constexpr double slack = 1e-14;  // absolute rounding slack per comparison
  MonotoneReport r;
  KahanSum lambda_sum;
  for (int k = 1; k <= t.n; ++k) {
    const bool bad_P = !std::isfinite(t.log_P[k]) ||
                       (k >= 2 && t.log_P[k] > t.log_P[k - 1] + slack);
    if (bad_P && !r.first_bad_P) r.first_bad_P = k;
    const bool bad_lambda = t.lambda[k] < -slack ||
                            (k >= 2 && t.lambda[k] > t.lambda[k - 1] + slack);
    if (bad_lambda && !r.first_bad_lambda) r.first_bad_lambda = k;
    if (t.p[k] < t.p[k - 1] - slack && !r.first_bad_p)  // k=1: p_0 <= p_1
      r.first_bad_p = k;

    lambda_sum.add(t.lambda[k]);
    const double resid =
        std::abs(std::expm1(-lambda_sum.value() / t.d - t.log_P[k]));
    r.max_link_residual = std::max(r.max_link_residual, resid);
  }
  r.ok = !r.first_bad_P && !r.first_bad_lambda && !r.first_bad_p &&
         r.max_link_residual <= 1e-12;
  return r;
}

InfLambdaReport check_inf_lambda(const SequenceTables& t, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("check_inf_lambda: gamma must be > 0");
  const double threshold = (gamma + 3.0) * t.d * (t.d + 1.0);
  if (t.mu < threshold - 1e-9 * std::max(1.0, threshold))
    throw ConfigError(
        "check_inf_lambda: requires mu >= (gamma+3) d (d+1); the bound is "
        "not claimed below that");

  InfLambdaReport r;
  r.gamma = gamma;
  r.min_lambda_margin = std::numeric_limits<double>::infinity();
  r.min_log_bound_margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= t.n; ++k) {
    const double lambda_margin = t.lambda[k] - t.d * gamma;
    const double log_bound = -gamma * (k - 1) - 2.0 * std::log(double(k));
    const double bound_margin = log_bound - t.log_P[k];
    r.min_lambda_margin = std::min(r.min_lambda_margin, lambda_margin);
    r.min_log_bound_margin = std::min(r.min_log_bound_margin, bound_margin);
    if ((lambda_margin < 0.0 || bound_margin < 0.0) && !r.first_violation)
      r.first_violation = k;
  }
  r.ok = !r.first_violation;
  return r;
}

double weighted_average(const std::vector<double>& weights,
                        const std::vector<double>& values) {
  if (weights.size() != values.size())
    throw ConfigError("weighted_average: length mismatch");
  KahanSum num, den;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0)
      throw ConfigError("weighted_average: negative weight");
    num.add(weights[i] * values[i]);
    den.add(weights[i]);
  }
  if (!(den.value() > 0.0))
    throw ConfigError("weighted_average: weights sum to zero");
  return num.value() / den.value();
}

namespace {

// Weight vector for one stage of the averaging chain, built in log space
// and shifted by its maximum (weighted averages are scale invariant), so
// deep-table products cannot underflow.
//
// Stage j uses arguments x_m = p_m for m <= j and x_m = p_{m-1} for m > j
// (so stage 0 is (p_0,...,p_{n-3}) and stage n-2 is (p_1,...,p_{n-2}));
// weight i is x_1...x_{i-1}(1-x_i)P_{n-1-i} for i <= n-2 and x_1...x_{n-2}
// for i = n-1.
std::vector<double> stage_weights(const SequenceTables& t, int n, int j) {
  auto x = [&](int m) { return m <= j ? t.p[m] : t.p[m - 1]; };
  std::vector<double> logw(static_cast<std::size_t>(n) - 1);
  double prefix = 0.0;  // log(x_1...x_{i-1})
  for (int i = 1; i <= n - 2; ++i) {
    logw[i - 1] = prefix + std::log1p(-x(i)) + t.log_P[n - 1 - i];
    prefix += std::log(x(i));
  }
  logw[n - 2] = prefix;
  double top = logw[0];
  for (double lw : logw) top = std::max(top, lw);
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) w[i] = std::exp(logw[i] - top);
  return w;
}

}  // namespace

ChainReport verify_monotone_chain(const SequenceTables& t, int n) {
  if (n < 2) throw ConfigError("verify_monotone_chain: n must be >= 2");
  if (t.n < n + 1)
    throw ConfigError("verify_monotone_chain: tables must reach index n+1");

  ChainReport r;
  r.n = n;
  const double q = t.p[1] + (1.0 - t.p[1]) * t.p[n - 1];
  const double q_prime = t.p[1] + (1.0 - t.p[1]) * t.p[n - 2];
  r.q_prime_le_q = q_prime <= q + 1e-15;

  // Values are p_{n-1}, p_{n-2}, ..., p_2 followed by the closing term.
  std::vector<double> values(static_cast<std::size_t>(n) - 1);
  for (int i = 1; i <= n - 2; ++i) values[i - 1] = t.p[n - i];
  values[n - 2] = q_prime;

  const auto w0 = stage_weights(t, n, 0);
  const double identity = weighted_average(w0, values);
  r.identity_rel_err = std::abs(identity / t.p[n] - 1.0);

  values[n - 2] = q;  // the chain itself closes with q
  r.chain.reserve(static_cast<std::size_t>(n) - 1);
  r.chain.push_back(weighted_average(w0, values));
  for (int j = 1; j <= n - 2; ++j)
    r.chain.push_back(weighted_average(stage_weights(t, n, j), values));

  r.min_step = 0.0;
  r.steps_nondecreasing = true;
  for (std::size_t j = 1; j < r.chain.size(); ++j) {
    const double step = r.chain[j] - r.chain[j - 1];
    if (j == 1 || step < r.min_step) r.min_step = step;
    if (step < -1e-12) r.steps_nondecreasing = false;
  }
  r.sufficient_holds = t.p[n] <= r.chain.back() + 1e-12;
  r.conclusion_holds = t.p[n] <= t.p[n + 1] + 1e-14;
  r.ok = r.identity_rel_err <= 1e-10 && r.steps_nondecreasing &&
         r.q_prime_le_q && r.sufficient_holds && r.conclusion_holds;
  return r;
}

ZetaEnclosure zeta_enclosure(double beta) {
  if (!(beta > 1.0)) throw ConfigError("zeta_enclosure: beta must be > 1");
  // The series sum is expensive and callers (the interval-sum sweep) ask
  // for the same beta thousands of times, so memoize per exponent.
  static std::mutex mutex;
  static std::map<double, ZetaEnclosure> cache;
  {
    const std::lock_guard<std::mutex> lock(mutex);
    const auto hit = cache.find(beta);
    if (hit != cache.end()) return hit->second;
  }
  constexpr long N = 1000000;
  KahanSum s;  // ascending magnitudes: sum from the small end
  for (long k = N; k >= 1; --k) s.add(std::pow(double(k), -beta));
  // Integral bounds for the remainder sum_{k>N} k^(-beta).
  const double tail_lo = std::pow(double(N + 1), 1.0 - beta) / (beta - 1.0);
  const double tail_hi = std::pow(double(N), 1.0 - beta) / (beta - 1.0);
  ZetaEnclosure z;
  z.lower = (s.value() + tail_lo) * (1.0 - 1e-14);
  z.upper = (s.value() + tail_hi) * (1.0 + 1e-14);
  const std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(beta, z);
  return z;
}

SumBoundResult sum_bound_check(double beta, long n) {
  if (!(beta > 1.0)) throw ConfigError("sum_bound_check: beta must be > 1");
  if (n < 1) throw ConfigError("sum_bound_check: n must be >= 1");
  KahanSum lhs;
  // Terms are symmetric under k <-> n+1-k; fold the two halves together.
  for (long k = 1; 2 * k < n + 1; ++k)
    lhs.add(2.0 * std::pow(double(k) * double(n + 1 - k), -beta));
  if (n % 2 == 1) {
    const long mid = (n + 1) / 2;
    lhs.add(std::pow(double(mid) * double(mid), -beta));
  }
  SumBoundResult r;
  r.lhs = lhs.value();
  // The lower zeta edge makes a pass self-certifying.
  r.rhs = std::pow(2.0, beta + 1.0) * zeta_enclosure(beta).lower *
          std::pow(double(n), -beta);
  r.ok = r.lhs <= r.rhs;
  return r;
}

double chi_prefix_void(const SequenceTables& t, int k) {
  if (k == 0) return 1.0;
  if (k < 1 || k > t.n - 1)
    throw std::out_of_range("chi_prefix_void: need 0 <= k <= n-1");
  return std::exp(t.log_P[k + 1] - t.log_P[1]);
}

}  // namespace froglab
