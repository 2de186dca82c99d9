#pragma once

#include <cstdint>
#include <vector>

namespace sblab {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

using Box = std::vector<Interval>;

// Deterministic low-discrepancy samples (Halton with a seeded rotation).
// Same (box, count, seed) always yields the same points, in the same order.
std::vector<std::vector<double>> sample_box(const Box& box, int count,
                                            std::uint64_t seed);

// Corresponding unit-cube samples.
std::vector<std::vector<double>> sample_unit(int dim, int count,
                                             std::uint64_t seed);

}  // namespace sblab
