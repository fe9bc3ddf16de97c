#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <random>
#include <set>

#include "doctest.h"
#include "froglab/rng.hpp"

using namespace froglab;

static_assert(std::uniform_random_bit_generator<SplitMix64>);
static_assert(std::uniform_random_bit_generator<Xoshiro256StarStar>);

TEST_CASE("splitmix64 matches the published reference sequence") {
  // First outputs for seed 0, as listed by the generator's authors.
  SplitMix64 g(0);
  CHECK(g() == 0xe220a8397b1dcdafULL);
  CHECK(g() == 0x6e789e6aa1b965f4ULL);
  CHECK(g() == 0x06c45d188009454fULL);
  CHECK(g() == 0xf88bb8a8724c81ecULL);

  SplitMix64 g42(42);
  CHECK(g42() == 0xbdd732262feb6e95ULL);
  CHECK(g42() == 0x28efe333b266f103ULL);
  CHECK(g42() == 0x47526757130f9f52ULL);
}

TEST_CASE("xoshiro256** frozen outputs for a fixed seed") {
  Xoshiro256StarStar g(2024);
  CHECK(g() == 0x0e48715a13d7772eULL);
  CHECK(g() == 0xc837f3ee8a7a1065ULL);
  CHECK(g() == 0x1272314b15ee5001ULL);
  CHECK(g() == 0x28e323a6abe2a46bULL);
  CHECK(g() == 0xc60df3b261660aa7ULL);
}

TEST_CASE("mix_u64 and derive_seed frozen values") {
  CHECK(mix_u64(1, 2) == 0xe06dd043328bd285ULL);
  CHECK(mix_u64(0xDEADBEEFULL, 7) == 0x03b1802eab8d5742ULL);
  CHECK(derive_seed(1, 2) == mix_u64(1, 2));
  CHECK(derive_seed(9, 4, 5) == mix_u64(mix_u64(9, 4), 5));
}

TEST_CASE("derived streams do not collide over a hundred thousand indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100000; ++i)
    seen.insert(derive_seed(0xFEEDFACE, i));
  CHECK(seen.size() == 100000);
}

TEST_CASE("same seed reproduces the same stream") {
  Rng a = derive_rng(77, 3), b = derive_rng(77, 3);
  for (int i = 0; i < 1000; ++i) REQUIRE(a() == b());
}

TEST_CASE("uniform_double stays in [0,1) and has the right mean") {
  Rng g(5);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = uniform_double(g);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // SE of the mean is 1/sqrt(12 n) ~ 6.5e-4.
  CHECK(std::abs(sum / n - 0.5) < 4 * 6.5e-4);
}

TEST_CASE("uniform_below hits every residue roughly equally") {
  Rng g(6);
  int counts[5] = {0, 0, 0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[uniform_below(g, 5)];
  for (int c : counts) CHECK(std::abs(c - n / 5) < 5 * std::sqrt(n * 0.2 * 0.8));
  CHECK(uniform_below(g, 1) == 0);
}

TEST_CASE("poisson inversion: mean, variance, and frozen small-case pmf") {
  Rng g(7);
  const double mean = 8.5;
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    int k = poisson(g, mean);
    s += k;
    s2 += double(k) * k;
  }
  double m = s / n, var = s2 / n - m * m;
  CHECK(std::abs(m - mean) < 4 * std::sqrt(mean / n));
  CHECK(std::abs(var - mean) < 0.15);

  // Quantiles of Poisson(2): CDF(0)=e^-2=.1353, CDF(1)=.4060, CDF(2)=.6767.
  CHECK(poisson_inverse_cdf(2.0, 0.10) == 0);
  CHECK(poisson_inverse_cdf(2.0, 0.20) == 1);
  CHECK(poisson_inverse_cdf(2.0, 0.50) == 2);
  CHECK(poisson_inverse_cdf(2.0, 0.70) == 3);
  CHECK(poisson_inverse_cdf(0.0, 0.99) == 0);
}

TEST_CASE("poisson inversion is nondecreasing in the mean for a fixed uniform") {
  // This is the coupling property the engine's sleeper counts rely on.
  Rng g(8);
  for (int trial = 0; trial < 2000; ++trial) {
    double u = uniform_double(g);
    int prev = 0;
    for (double mean : {0.5, 1.0, 2.0, 5.0, 10.0, 21.0, 40.0}) {
      int k = poisson_inverse_cdf(mean, u);
      REQUIRE(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("geometric counts failures before the first success") {
  Rng g(9);
  const double p = 1.0 / 3.0;
  const int n = 300000;
  double s = 0;
  int ge1 = 0;
  for (int i = 0; i < n; ++i) {
    long k = geometric(g, p);
    REQUIRE(k >= 0);
    s += double(k);
    if (k >= 1) ++ge1;
  }
  // E = (1-p)/p = 2, sd = sqrt(1-p)/p ~ 2.449; P[G >= 1] = 1-p.
  CHECK(std::abs(s / n - 2.0) < 4 * 2.449 / std::sqrt(double(n)));
  CHECK(std::abs(double(ge1) / n - (1 - p)) <
        4 * std::sqrt((1 - p) * p / n));
  CHECK(geometric(g, 1.0) == 0);
}
