// Splittable random number streams for reproducible parallel simulation.
//
// splitmix64: Steele, Lea, Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014; fixed-increment variant by Vigna (public domain).
// xoshiro256**: Blackman & Vigna (public domain), seeded through splitmix64
// as its authors recommend.
//
// Every stream in the toolkit is derived deterministically from a master
// seed and a tuple of indices (trial number, vertex hash, frog index, ...),
// so trials can run in any order, or in parallel, with identical results.

#ifndef FROGLAB_RNG_HPP
#define FROGLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace froglab {

inline constexpr std::uint64_t kSplitmixGamma = 0x9E3779B97F4A7C15ULL;

// One mixing round of splitmix64; also used as the stream-derivation hash.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kSplitmixGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stateless mix of two words; used to fold indices into stream seeds and to
// hash vertex paths incrementally.  (One splitmix round applied to a ^ mix(b).)
inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = b;
  s = a ^ splitmix64_next(s);
  return splitmix64_next(s);
}

// Minimal-state generator for per-frog walk streams (8 bytes of state).
// splitmix64 passes BigCrush and distinct seeds give statistically
// independent streams, which is the whole point of its "split" operation.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  SplitMix64() : state_(0) {}
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return splitmix64_next(state_); }

 private:
  std::uint64_t state_;
};

// General-purpose generator for experiment-level sampling.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  Xoshiro256StarStar() : Xoshiro256StarStar(0) {}
  explicit Xoshiro256StarStar(std::uint64_t seed) {
    // Seed the four state words from splitmix64, per the generator's authors.
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

using Rng = Xoshiro256StarStar;

// Derivation of independent stream seeds from (master seed, index...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_u64(master, index);
}
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i,
                                 std::uint64_t j) {
  return mix_u64(mix_u64(master, i), j);
}
inline Rng derive_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Uniform double in [0,1) from the top 53 bits.
template <class G>
inline double uniform_double(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in {0,...,bound-1} by rejection on the top bits
// (bound is tiny here -- a tree degree -- so rejections are rare).
template <class G>
inline std::uint32_t uniform_below(G& g, std::uint32_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = g();
  } while (r >= limit);
  return static_cast<std::uint32_t>(r % bound);
}

template <class G>
inline bool bernoulli(G& g, double p) {
  return uniform_double(g) < p;
}

// Poisson count by CDF inversion of a single uniform.  Using one shared
// uniform per site makes counts pointwise nondecreasing in the mean, which
// is what the cross-mu monotone coupling of the frog engine relies on.
// Accurate for mean up to a few hundred (the toolkit's range); the loop is
// O(mean).
inline int poisson_inverse_cdf(double mean, double u) {
  if (mean <= 0.0) return 0;
  double pk = std::exp(-mean);  // underflows near mean ~745, far above use
  double cdf = pk;
  int k = 0;
  // Invert: smallest k with CDF(k) >= u.  Cap the loop generously; for the
  // means used here (<= ~500) the cap is unreachable.
  const int cap = 64 + static_cast<int>(16.0 * (mean + 8.0));
  while (u > cdf && k < cap) {
    ++k;
    pk *= mean / static_cast<double>(k);
    cdf += pk;
  }
  return k;
}

template <class G>
inline int poisson(G& g, double mean) {
  return poisson_inverse_cdf(mean, uniform_double(g));
}

// Failures before the first success (the Geo(p) convention used throughout:
// P[Geo(p) >= k] = (1-p)^k).
template <class G>
inline long geometric(G& g, double p) {
  if (p >= 1.0) return 0;
  // Inversion: floor(log(U) / log(1-p)) with U uniform in (0,1].
  double u = 1.0 - uniform_double(g);  // (0,1]
  return static_cast<long>(std::log(u) / std::log1p(-p));
}

template <class G>
inline double exponential(G& g, double rate) {
  double u = 1.0 - uniform_double(g);  // (0,1]
  return -std::log(u) / rate;
}

}  // namespace froglab

#endif  // FROGLAB_RNG_HPP
