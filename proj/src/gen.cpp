#include "bitkiln/gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bitkiln/rng.hpp"

namespace bitkiln {

FactTable genUniform(uint64_t rows, uint32_t independentDims, uint32_t r,
                     uint32_t dependentDims, uint64_t seed) {
  if (independentDims < 1) {
    throw std::invalid_argument("genUniform: need at least one independent "
                                "dimension");
  }
  if (r != 1 && r != 2) {
    throw std::invalid_argument("genUniform: r must be 1 or 2");
  }
  Rng rng(seed);
  const uint32_t dims = independentDims + dependentDims;

  std::vector<size_t> permutation(dims);
  std::iota(permutation.begin(), permutation.end(), size_t{0});
  shuffleVector(permutation, rng);

  std::vector<uint64_t> ranges(independentDims);
  uint64_t range = 100;
  for (uint32_t i = 0; i < independentDims; ++i) {
    ranges[i] = range;
    range *= r;
  }

  FactTable table;
  table.rows.reserve(rows);
  std::vector<uint64_t> raw(dims);
  for (uint64_t rIdx = 0; rIdx < rows; ++rIdx) {
    for (uint32_t i = 0; i < independentDims; ++i) {
      raw[i] = rng.below(ranges[i]) + 1;
    }
    for (uint32_t jDep = 0; jDep < dependentDims; ++jDep) {
      uint64_t value = 0;
      uint32_t picked = 0;
      for (uint32_t i = 0; i < independentDims; ++i) {
        if (rng.bernoulli(0.2)) {
          value += raw[i];
          ++picked;
        }
      }
      if (picked == 0) value = rng.below(100) + 1;
      raw[independentDims + jDep] = value;
    }
    std::vector<std::string> row(dims);
    for (uint32_t j = 0; j < dims; ++j) {
      row[j] = std::to_string(raw[permutation[j]]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

FactTable genZipf(uint64_t rows, uint32_t dims, double s, uint32_t valueRange,
                  uint64_t seed) {
  if (dims < 1) throw std::invalid_argument("genZipf: need dims >= 1");
  if (!(s > 0.0)) throw std::invalid_argument("genZipf: need s > 0");
  if (valueRange < 1) throw std::invalid_argument("genZipf: need valueRange >= 1");

  // Inverse-CDF sampling over the normalized v^(-s) masses.
  std::vector<double> cdf(valueRange);
  double total = 0.0;
  for (uint32_t v = 1; v <= valueRange; ++v) {
    total += std::pow(static_cast<double>(v), -s);
    cdf[v - 1] = total;
  }
  for (double& c : cdf) c /= total;

  Rng rng(seed);
  FactTable table;
  table.rows.reserve(rows);
  for (uint64_t i = 0; i < rows; ++i) {
    std::vector<std::string> row(dims);
    for (uint32_t j = 0; j < dims; ++j) {
      const double u = rng.unitDouble();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const uint32_t value =
          static_cast<uint32_t>(it - cdf.begin()) + 1;
      row[j] = std::to_string(std::min(value, valueRange));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace bitkiln
