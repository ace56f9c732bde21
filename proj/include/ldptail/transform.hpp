#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldptail/marginal.hpp"
#include "ldptail/point_matrix.hpp"

namespace ldptail {

// n observations of an m-dimensional random vector, in data units.
struct Sample {
  PointMatrix rows;
  std::vector<std::string> column_names;

  std::size_t n() const noexcept { return rows.rows(); }
  std::size_t m() const noexcept { return rows.cols(); }

  // Throws DataError for non-finite entries or a name/width mismatch.
  void validate() const;
};

// Rank-based pseudo-observations on the standard exponential scale,
// Y_hat = -log(1 - (R - 1/2) / n).
struct PseudoSample {
  PointMatrix points;
  std::vector<std::size_t> ranks;        // n x m, row-major, 1-based
  std::vector<std::size_t> tied_columns;  // columns in which ties were broken

  bool has_ties() const noexcept { return !tied_columns.empty(); }
  std::size_t rank(std::size_t i, std::size_t j) const { return ranks[i * points.cols() + j]; }
};

// -log(1 - (rank - 1/2) / n), evaluated as log(2n / (2(n - rank) + 1)) so the top
// rank maps to log(2n) exactly.
double pseudo_exponential(std::size_t rank, std::size_t n);

// Ties are broken by input order; affected columns are listed in tied_columns.
PseudoSample rank_transform(const Sample& sample);

// Coordinatewise map from the exponential scale to data space: either the
// identity, the fitted Q_hat, or user-supplied per-coordinate quantile
// functions (e.g. the exact Q of a simulation).
class MarginMap {
 public:
  using Coordinate = std::function<double(double)>;

  static MarginMap identity() { return MarginMap(); }
  static MarginMap per_coordinate(std::vector<Coordinate> maps);
  static MarginMap fitted(std::vector<LogGwTailFit> fits, std::vector<SortedMarginal> margs);

  bool is_identity() const noexcept { return maps_.empty(); }

  // out may alias in.
  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  MarginMap() = default;
  std::vector<Coordinate> maps_;
};

// Marginal fits for every column of a sample.
struct FittedMarginals {
  std::vector<SortedMarginal> margs;
  std::vector<LogGwTailFit> fits;

  MarginMap q_hat() const { return MarginMap::fitted(fits, margs); }
};

// Fits every column with k2 (default ceil((log n)^2)) and iota.
FittedMarginals fit_marginals(const Sample& sample, std::optional<std::size_t> k2 = {},
                              double iota = 2.0);

// Q_hat(x) = (q_hat_1(x_1), ..., q_hat_m(x_m)).
std::vector<double> q_hat_map(std::span<const LogGwTailFit> fits,
                              std::span<const SortedMarginal> margs, std::span<const double> x);

// Fraction of true flags. Throws ConfigError for an empty input.
double empirical_probability(const std::vector<bool>& flags);

}  // namespace ldptail
