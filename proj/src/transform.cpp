#include "ldptail/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "ldptail/error.hpp"

namespace ldptail {

void Sample::validate() const {
  if (!column_names.empty() && column_names.size() != m()) {
    throw DataError("sample has " + std::to_string(m()) + " columns but " +
                    std::to_string(column_names.size()) + " names");
  }
  for (double v : rows.data()) {
    if (!std::isfinite(v)) throw DataError("sample contains a non-finite value");
  }
}

double pseudo_exponential(std::size_t rank, std::size_t n) {
  const double two_n = 2.0 * static_cast<double>(n);
  return std::log(two_n / (2.0 * static_cast<double>(n - rank) + 1.0));
}

PseudoSample rank_transform(const Sample& sample) {
  const std::size_t n = sample.n();
  const std::size_t m = sample.m();
  if (n == 0) throw ConfigError("rank_transform: empty sample");

  PseudoSample out;
  out.points = PointMatrix(n, m);
  out.ranks.assign(n * m, 0);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < m; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sample.rows(a, j) < sample.rows(b, j);
    });
    bool tied = false;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t i = order[pos];
      out.ranks[i * m + j] = pos + 1;
      out.points(i, j) = pseudo_exponential(pos + 1, n);
      if (pos > 0 && sample.rows(order[pos - 1], j) == sample.rows(i, j)) tied = true;
    }
    if (tied) out.tied_columns.push_back(j);
  }
  return out;
}

MarginMap MarginMap::per_coordinate(std::vector<Coordinate> maps) {
  MarginMap out;
  out.maps_ = std::move(maps);
  return out;
}

MarginMap MarginMap::fitted(std::vector<LogGwTailFit> fits, std::vector<SortedMarginal> margs) {
  if (fits.size() != margs.size()) {
    throw ConfigError("MarginMap::fitted: " + std::to_string(fits.size()) + " fits for " +
                      std::to_string(margs.size()) + " marginals");
  }
  auto shared_fits = std::make_shared<const std::vector<LogGwTailFit>>(std::move(fits));
  auto shared_margs = std::make_shared<const std::vector<SortedMarginal>>(std::move(margs));
  std::vector<Coordinate> maps;
  for (std::size_t j = 0; j < shared_fits->size(); ++j) {
    maps.emplace_back([shared_fits, shared_margs, j](double z) {
      return quantile_hat((*shared_fits)[j], (*shared_margs)[j], z);
    });
  }
  return per_coordinate(std::move(maps));
}

void MarginMap::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != out.size()) throw ConfigError("MarginMap::apply: size mismatch");
  if (maps_.empty()) {
    if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  if (in.size() != maps_.size()) {
    throw ConfigError("MarginMap::apply: point of dimension " + std::to_string(in.size()) +
                      " for a map of dimension " + std::to_string(maps_.size()));
  }
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = maps_[j](in[j]);
}

FittedMarginals fit_marginals(const Sample& sample, std::optional<std::size_t> k2, double iota) {
  const std::size_t n = sample.n();
  const KSequence kseq = k_sequence(n, k2.value_or(default_k2(n)), iota);
  FittedMarginals out;
  for (std::size_t j = 0; j < sample.m(); ++j) {
    std::string name = j < sample.column_names.size() ? sample.column_names[j]
                                                       : "x" + std::to_string(j + 1);
    out.margs.emplace_back(sample.rows.column(j), std::move(name));
    out.fits.push_back(fit_log_gw(out.margs.back(), kseq));
  }
  return out;
}

std::vector<double> q_hat_map(std::span<const LogGwTailFit> fits,
                              std::span<const SortedMarginal> margs, std::span<const double> x) {
  if (fits.size() != margs.size() || fits.size() != x.size()) {
    throw ConfigError("q_hat_map: dimension mismatch");
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = quantile_hat(fits[j], margs[j], x[j]);
  return out;
}

double empirical_probability(const std::vector<bool>& flags) {
  if (flags.empty()) throw ConfigError("empirical_probability: no observations");
  const auto hits = std::count(flags.begin(), flags.end(), true);
  return static_cast<double>(hits) / static_cast<double>(flags.size());
}

}  // namespace ldptail
