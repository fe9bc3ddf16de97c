// The deterministic sequences that the return-process analysis is built on:
//
//   a       = e^(-mu/(d+1))
//   P_1     = a^(1/d),  P_2 = P_1[(1-a)P_1 + a]
//   P_{n+1} = P_1[(1-a)P_n + a(sum_{i=1}^{n-1}(P_{i-1}-P_i)P_{n-i} + P_{n-1})]
//   lambda_1 = mu/(d+1),  lambda_n = -d log(P_n / P_{n-1})
//   p_0     = a,  p_k = e^(-lambda_k/d)  (so P_n = p_1...p_n)
//
// P_n decays like e^(-c n) and leaves double range near n ~ 250 already at
// mu in the low tens, so the tables are carried in log space: the primary
// recursion advances the ratios p_n (every convolution term is normalized
// by P_n before exponentiation), and the textbook P-form recursion is
// evaluated alongside while it is representable purely as a cross-check.
//
// On top of the tables sit the verification routines: monotonicity of
// P (down), lambda (down), p (up); the exponential upper bound on P_k and
// the lower bound inf_k lambda_k >= d*gamma that hold once
// mu >= (gamma+3)d(d+1); the weighted-average chain that certifies
// p_n <= p_{n+1} step by step; and the convolution-sum bound against
// 2^(b+1) zeta(b) n^(-b).

#ifndef FROGLAB_RECURRENCE_HPP
#define FROGLAB_RECURRENCE_HPP

#include <string>
#include <vector>

namespace froglab {

struct SequenceTables {
  int d = 0;
  double mu = 0.0;
  int n = 0;
  double a = 0.0;            // e^(-mu/(d+1))
  std::vector<double> log_P;  // log_P[k] = log P_k, k = 0..n, log_P[0] = 0
  std::vector<double> p;      // p[k], k = 0..n, p[0] = a
  std::vector<double> lambda;  // lambda[k], k = 1..n; lambda[0] unused (0)

  // Largest relative gap between the ratio-form tables and a direct
  // evaluation of the P-recursion, over the indices where the latter is
  // representable in double precision.
  double form_agreement_rel = 0.0;

  double P(int k) const;  // exp(log_P[k]); underflows to 0 for deep k
};

// Builds tables through index n.  Throws ConfigError on bad parameters and
// std::range_error (naming the largest valid index) if the ratio form itself
// degenerates, which does not happen in the parameter ranges of interest.
SequenceTables compute_tables(int d, double mu, int n);

struct MonotoneReport {
  bool ok = false;
  // 0 = no violation; otherwise the first index where the named sequence
  // breaks its direction (P nonincreasing, lambda nonincreasing and
  // nonnegative, p nondecreasing starting from p_0 <= p_1).
  int first_bad_P = 0;
  int first_bad_lambda = 0;
  int first_bad_p = 0;
  // max_k |exp(-(1/d) sum_{j<=k} lambda_j - log P_k) - 1|: the product/sum
  // consistency identity, measured as a relative error on P_k.
  double max_link_residual = 0.0;
};
MonotoneReport verify_monotone(const SequenceTables& tables);

struct InfLambdaReport {
  bool ok = false;
  int first_violation = 0;  // index k, or 0
  double gamma = 0.0;
  // min over k of lambda_k - d*gamma (claim: >= 0).
  double min_lambda_margin = 0.0;
  // min over k of [-gamma(k-1) - 2 log k] - log P_k (claim: >= 0).
  double min_log_bound_margin = 0.0;
};
// Requires mu >= (gamma+3) d (d+1); throws ConfigError otherwise, because
// outside that range the bound is not claimed.
InfLambdaReport check_inf_lambda(const SequenceTables& tables, double gamma);

// sum(w_i a_i) / sum(w_i).  Weights nonnegative with positive total;
// throws ConfigError otherwise.
double weighted_average(const std::vector<double>& weights,
                        const std::vector<double>& values);

struct ChainReport {
  bool ok = false;
  int n = 0;
  // |WA-expression for p_n divided by table p_n, minus 1|.
  double identity_rel_err = 0.0;
  // Successive weighted averages; chain[j] is stage j, j = 0..n-2.
  std::vector<double> chain;
  double min_step = 0.0;        // min_j chain[j+1] - chain[j]
  bool steps_nondecreasing = false;
  bool q_prime_le_q = false;    // q' <= q
  bool sufficient_holds = false;  // p_n <= final chain value
  bool conclusion_holds = false;  // p_n <= p_{n+1}
};
// Certifies p_n <= p_{n+1} the long way: expresses p_n as a weighted
// average, walks the chain of averages whose links are each nondecreasing,
// and lands on the sufficient bound.  Needs tables through n+1, n >= 2.
ChainReport verify_monotone_chain(const SequenceTables& tables, int n);

// Certified enclosure of zeta(beta) for beta > 1: truncation at 10^6 terms
// plus integral tail bounds.
struct ZetaEnclosure {
  double lower = 0.0;
  double upper = 0.0;
};
ZetaEnclosure zeta_enclosure(double beta);

struct SumBoundResult {
  double lhs = 0.0;  // sum_{k=1}^n (k(n+1-k))^(-beta)
  double rhs = 0.0;  // 2^(beta+1) zeta_lower(beta) n^(-beta)
  bool ok = false;   // lhs <= rhs (rhs uses the lower zeta edge, so a pass
                     // certifies the claim rather than relying on it)
};
SumBoundResult sum_bound_check(double beta, long n);

// P_{k+1}/P_1: the predicted probability that the shifted 1/d-thinned
// intensity pattern has no points on {4, ..., 2k+2}.  k = 0 returns 1 by
// convention.  Throws std::out_of_range unless 0 <= k <= n-1.
double chi_prefix_void(const SequenceTables& tables, int k);

}  // namespace froglab

#endif  // FROGLAB_RECURRENCE_HPP
