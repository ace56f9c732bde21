#include "ldptail/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ldptail/error.hpp"
#include "ldptail/special_fn.hpp"

namespace ldptail {
namespace {

// pow() may land one ulp below an exact integer; floor() must not drop a unit.
constexpr double kFloorNudge = 1e-12;

// Both log-ratios of the three-point fit must exceed this.
constexpr double kMinLogSpacing = 1e-12;

std::size_t nudged_floor(double v) {
  return static_cast<std::size_t>(std::floor(v * (1.0 + kFloorNudge)));
}

}  // namespace

SortedMarginal::SortedMarginal(std::vector<double> values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
  if (values_.size() < 4) {
    throw ConfigError("marginal '" + name_ + "' needs at least 4 observations, got " +
                      std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("marginal '" + name_ + "' has a non-finite value");
  }
  std::sort(values_.begin(), values_.end());
}

std::size_t default_k2(std::size_t n) {
  const double l = std::log(static_cast<double>(n));
  return static_cast<std::size_t>(std::ceil(l * l));
}

KSequence k_sequence(std::size_t n, std::size_t k2, double iota) {
  if (n < 4) throw ConfigError("k_sequence: n must be at least 4");
  if (k2 < 1 || k2 >= n) {
    throw ConfigError("k_sequence: k2 = " + std::to_string(k2) + " must satisfy 1 <= k2 < n = " +
                      std::to_string(n));
  }
  if (!(iota > 1.0)) throw ConfigError("k_sequence: iota must exceed 1");

  const double nd = static_cast<double>(n);
  const double ratio = nd / static_cast<double>(k2);
  KSequence seq;
  seq.n = n;
  seq.k2 = k2;
  seq.iota = iota;
  seq.k1 = nudged_floor(std::pow(ratio, -1.0 / iota) * nd);
  seq.k0 = nudged_floor(std::pow(ratio, -1.0 / (iota * iota)) * nd);
  if (!(seq.k2 <= seq.k1 && seq.k1 <= seq.k0 && seq.k0 < n)) {
    throw ConfigError("k_sequence: ordering k2 <= k1 <= k0 < n fails (k0=" +
                      std::to_string(seq.k0) + ", k1=" + std::to_string(seq.k1) +
                      ", k2=" + std::to_string(seq.k2) + ")");
  }
  return seq;
}

LogGwTailFit fit_log_gw(const SortedMarginal& marg, const KSequence& kseq) {
  if (kseq.n != marg.n()) {
    throw ConfigError("fit_log_gw: k-sequence built for n=" + std::to_string(kseq.n) +
                      " applied to a sample of size " + std::to_string(marg.n()));
  }
  const double x2 = marg.upper(kseq.k2);
  const double x1 = marg.upper(kseq.k1);
  const double x0 = marg.upper(kseq.k0);
  if (!(x0 > 0.0)) {
    throw DegenerateError("fit_log_gw: anchor X_{n-k0+1:n} = " + std::to_string(x0) +
                          " of '" + marg.name() + "' is not positive");
  }
  const double upper_spacing = std::log(x2 / x1);
  const double lower_spacing = std::log(x1 / x0);
  if (!(upper_spacing > kMinLogSpacing && lower_spacing > kMinLogSpacing)) {
    throw DegenerateError("fit_log_gw: tied or non-increasing order statistics in '" +
                          marg.name() + "'");
  }

  LogGwTailFit fit;
  fit.kseq = kseq;
  fit.theta_hat = (std::log(upper_spacing) - std::log(lower_spacing)) / std::log(kseq.iota);
  fit.g_hat = lower_spacing / h_transform(fit.theta_hat, kseq.iota);
  fit.anchor = x0;
  fit.y_n = std::log(static_cast<double>(marg.n()) / static_cast<double>(kseq.k0));
  return fit;
}

double quantile_hat(const LogGwTailFit& fit, const SortedMarginal& marg, double z) {
  if (!(z >= 0.0)) throw DomainError("quantile_hat: z must be nonnegative");
  if (z > fit.y_n) {
    return fit.anchor * std::exp(fit.g_hat * h_transform(fit.theta_hat, z / fit.y_n));
  }
  const std::size_t n = marg.n();
  const double count = -static_cast<double>(n) * std::expm1(-z);
  // The floor is nudged so that z = y_n lands exactly on the anchor.
  std::size_t index = static_cast<std::size_t>(std::floor(count + 1e-9)) + 1;
  index = std::min(index, n - fit.kseq.k0 + 1);
  return marg.order_stat(index);
}

double nu_diagnostic(const LogGwTailFit& fit, const SortedMarginal& marg,
                     const std::function<double(double)>& true_q_inverse, double z) {
  if (!(z > 0.0)) throw DomainError("nu_diagnostic: z must be positive");
  const double q = quantile_hat(fit, marg, z);
  const double back = true_q_inverse(q);
  if (!std::isfinite(back)) {
    throw DomainError("nu_diagnostic: q_hat(z) = " + std::to_string(q) +
                      " is outside the domain of the supplied inverse");
  }
  return back / z - 1.0;
}

}  // namespace ldptail
