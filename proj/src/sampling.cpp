#include "sblab/sampling.hpp"

#include <cmath>
#include <random>

#include "sblab/errors.hpp"

namespace sblab {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double scale = inv;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}

}  // namespace

std::vector<std::vector<double>> sample_unit(int dim, int count,
                                             std::uint64_t seed) {
  if (dim < 1 || static_cast<std::size_t>(dim) > std::size(kPrimes))
    throw NumericError("unsupported sampling dimension");
  if (count < 0) throw NumericError("negative sample count");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> shift(dim);
  for (int d = 0; d < dim; ++d) shift[d] = uni(rng);

  std::vector<std::vector<double>> points(count, std::vector<double>(dim));
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < dim; ++d) {
      double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[d]) +
                 shift[d];
      u -= std::floor(u);
      points[i][d] = u;
    }
  }
  return points;
}

std::vector<std::vector<double>> sample_box(const Box& box, int count,
                                            std::uint64_t seed) {
  auto points = sample_unit(static_cast<int>(box.size()), count, seed);
  for (auto& p : points)
    for (std::size_t d = 0; d < box.size(); ++d)
      p[d] = box[d].lo + p[d] * box[d].width();
  return points;
}

}  // namespace sblab
