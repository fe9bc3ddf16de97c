#include "froglab/concentration.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "froglab/errors.hpp"

namespace froglab {

double poisson_tail_bound(double lambda, double alpha, PoissonTailSide side) {
  if (!(lambda > 0.0))
    throw ConfigError("poisson_tail_bound: lambda must be > 0");
  switch (side) {
    case PoissonTailSide::Lower:
      if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError(
            "poisson_tail_bound: lower tail requires 0 < alpha < 1");
      return std::exp(-(1.0 - alpha) * (1.0 - alpha) * lambda / 2.0);
    case PoissonTailSide::Upper:
      if (!(alpha > 1.0))
        throw ConfigError("poisson_tail_bound: upper tail requires alpha > 1");
      return std::exp(-(alpha - 1.0) * lambda /
                      (2.0 / 3.0 + 2.0 / (alpha - 1.0)));
  }
  throw ConfigError("poisson_tail_bound: unknown side");
}

double exp_sum_constant(double C, double b, double b_prime) {
  if (C < 0.0) throw ConfigError("exp_sum_constant: C must be >= 0");
  if (!(b > 0.0)) throw ConfigError("exp_sum_constant: b must be > 0");
  if (!(b_prime > 0.0)) throw ConfigError("exp_sum_constant: b' must be > 0");
  return 2.0 * (b_prime + C) / b;
}

double binomial_upper_ci(long successes, long trials, double confidence) {
  if (trials <= 0) throw ConfigError("binomial_upper_ci: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw ConfigError("binomial_upper_ci: successes out of range");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("binomial_upper_ci: confidence must be in (0,1)");
  if (successes == trials) return 1.0;
  if (successes == 0)  // closed form keeps the common case cheap and exact
    return 1.0 - std::pow(1.0 - confidence, 1.0 / double(trials));
  // Smallest p with P[Bin(trials, p) <= successes] = 1 - confidence.
  return boost::math::ibeta_inv(double(successes + 1),
                                double(trials - successes), confidence);
}

double binomial_lower_ci(long successes, long trials, double confidence) {
  if (trials <= 0) throw ConfigError("binomial_lower_ci: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw ConfigError("binomial_lower_ci: successes out of range");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("binomial_lower_ci: confidence must be in (0,1)");
  if (successes == 0) return 0.0;
  if (successes == trials)
    return std::pow(1.0 - confidence, 1.0 / double(trials));
  return boost::math::ibeta_inv(double(successes),
                                double(trials - successes + 1),
                                1.0 - confidence);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("normal_quantile: p must be in (0,1)");
  static const boost::math::normal_distribution<double> unit(0.0, 1.0);
  return boost::math::quantile(unit, p);
}

}  // namespace froglab
