// Tail inequalities used by the speed and coverage arguments, plus the exact
// binomial confidence bounds that every statistical test in the suite leans
// on.  Exact (Clopper-Pearson-style) intervals are deliberate: the
// acceptance thresholds sit in far tails where normal approximations are
// anti-conservative.

#ifndef FROGLAB_CONCENTRATION_HPP
#define FROGLAB_CONCENTRATION_HPP

namespace froglab {

enum class PoissonTailSide { Lower, Upper };

// For Y ~ Poi(lambda):
//   Lower (0 < alpha < 1):  P[Y <= alpha*lambda] <= exp(-(1-alpha)^2 lambda/2)
//   Upper (alpha > 1):      P[Y >= alpha*lambda]
//                             <= exp(-(alpha-1) lambda / (2/3 + 2/(alpha-1)))
// Throws ConfigError when alpha is on the wrong side for the requested tail.
double poisson_tail_bound(double lambda, double alpha, PoissonTailSide side);

// If X_1, X_2, ... are i.i.d. >= 0 with P[X >= l] <= C e^{-b l}, then
// P[X_1 + ... + X_n >= C' n] <= e^{-b' n} for C' = 2 (b' + C) / b
// (valid once b' < b works into the derivation; callers choose b' < b).
double exp_sum_constant(double C, double b, double b_prime);

// Exact one-sided upper confidence bound for a binomial success probability:
// the largest p still consistent with seeing <= `successes` of `trials` at
// the given confidence.  Monotone nondecreasing in `successes`; equals
// 1 - (1-confidence)^(1/trials) at zero successes and 1 at full successes.
double binomial_upper_ci(long successes, long trials, double confidence);

// Exact one-sided lower confidence bound; 0 at zero successes.
double binomial_lower_ci(long successes, long trials, double confidence);

// Standard normal quantile (used for mean-comparison margins).
double normal_quantile(double p);

}  // namespace froglab

#endif  // FROGLAB_CONCENTRATION_HPP
