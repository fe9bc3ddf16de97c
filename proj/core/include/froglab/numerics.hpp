#ifndef FROGLAB_NUMERICS_HPP
#define FROGLAB_NUMERICS_HPP

#include <cstddef>
#include <vector>

namespace froglab {

// Kahan compensated accumulator, for sums whose terms span many orders of
// magnitude (recurrence convolutions, zeta truncations, tail sums).
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double kahan_total(const std::vector<double>& xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace froglab

#endif  // FROGLAB_NUMERICS_HPP
