#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldptail/transform.hpp"

namespace ldptail {

enum class MarginalScale {
  kNormal,       // U ~ N(0, 1)
  kExponential,  // Y = -log(1 - Phi(U)) ~ Exp(1)
  kPareto,       // exp(Y), standard Pareto
};

MarginalScale marginal_scale_from_string(const std::string& name);
std::string to_string(MarginalScale scale);

struct SimConfig {
  std::size_t n = 5000;
  std::size_t m = 2;
  std::vector<double> correlation{1.0, 0.5, 0.5, 1.0};  // row-major m x m
  MarginalScale marginal_scale = MarginalScale::kExponential;
  std::uint64_t seed = 1;

  static SimConfig bivariate(std::size_t n, double rho, MarginalScale scale, std::uint64_t seed);
  // Throws ConfigError for n = 0 or an invalid correlation matrix.
  void validate() const;
};

// Seed of realisation `index` within a study seeded by `seed` (splitmix64 of
// the pair), so every realisation draws from its own stream.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

// n draws of N(0, V) with the chosen marginal scale. Uses std::mt19937_64
// seeded with cfg.seed, uniforms ((x >> 11) + 1/2) 2^-53, inverse-CDF normals
// and a Cholesky factor of V; draws are consumed row by row.
Sample sample_mvn(const SimConfig& cfg);

// P(a_1 U_1 + a_2 U_2 > c) for standard normals with correlation rho.
// Throws DegenerateError when a_1 U_1 + a_2 U_2 is almost surely constant.
double halfspace_exact_prob(std::span<const double> a, double c, double rho);
// The threshold c with halfspace_exact_prob(a, c, rho) = p.
double halfspace_threshold(std::span<const double> a, double p, double rho);

// P(Y_1 > a_1, Y_2 > a_2) with Y on the exponential scale.
double corner_exact_prob(std::span<const double> a, double rho);

}  // namespace ldptail
