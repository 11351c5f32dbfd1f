#ifndef BITKILN_GEN_HPP
#define BITKILN_GEN_HPP

#include <cstdint>

#include "bitkiln/table.hpp"

namespace bitkiln {

/// Uniform synthetic table. Independent column i (1-based) draws from
/// 100 * r^(i-1) distinct integers; each dependent column is sum(a_i * p_i)
/// over the independent values with p_i Bernoulli(0.2), falling back to a
/// uniform draw from {1..100} when every p_i is zero. Columns are then
/// permuted with the same seed, so a fixed seed reproduces the table
/// byte for byte.
FactTable genUniform(uint64_t rows, uint32_t independentDims, uint32_t r,
                     uint32_t dependentDims, uint64_t seed);

/// Zipf synthetic table: every column independently draws values from
/// {1..valueRange} with frequency proportional to v^(-s).
FactTable genZipf(uint64_t rows, uint32_t dims, double s, uint32_t valueRange,
                  uint64_t seed);

}  // namespace bitkiln

#endif  // BITKILN_GEN_HPP
