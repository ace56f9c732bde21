#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ldptail {

// One variable's order statistics X_{1:n} <= ... <= X_{n:n}.
class SortedMarginal {
 public:
  // Sorts `values`. Throws ConfigError for fewer than 4 values and DataError
  // for non-finite values.
  SortedMarginal(std::vector<double> values, std::string name = {});

  std::size_t n() const noexcept { return values_.size(); }
  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& values() const noexcept { return values_; }

  // X_{i:n}, 1-based like the usual order-statistic notation.
  double order_stat(std::size_t i) const { return values_.at(i - 1); }

  // X_{n-k+1:n}: the k-th largest value.
  double upper(std::size_t k) const { return values_.at(values_.size() - k); }

 private:
  std::vector<double> values_;
  std::string name_;
};

// Intermediate sequence k2 <= k1 <= k0 < n used by the three-point fit:
// k_i = floor((n / k2)^(-iota^(i-2)) * n) for i in {0, 1}.
struct KSequence {
  std::size_t k0 = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  double iota = 2.0;
  std::size_t n = 0;
};

KSequence k_sequence(std::size_t n, std::size_t k2, double iota = 2.0);

// ceil((log n)^2), the default for k2.
std::size_t default_k2(std::size_t n);

// Fitted log-GW tail of one marginal.
struct LogGwTailFit {
  double theta_hat = 0.0;
  double g_hat = 0.0;
  double anchor = 0.0;  // X_{n-k0+1:n}
  double y_n = 0.0;     // log(n / k0)
  KSequence kseq;
};

// Three-order-statistic estimator of (theta, g). Throws DegenerateError when
// the spacings are tied or the anchor is not positive.
LogGwTailFit fit_log_gw(const SortedMarginal& marg, const KSequence& kseq);

// Hybrid quantile estimator on the exponential scale: empirical quantile for
// z <= y_n, log-GW extrapolation above. Throws DomainError for z < 0 or NaN.
double quantile_hat(const LogGwTailFit& fit, const SortedMarginal& marg, double z);

// Probability-based quantile estimation error z^{-1} q^{-1}(q_hat(z)) - 1 for a
// known generating quantile function q (simulation diagnostic).
double nu_diagnostic(const LogGwTailFit& fit, const SortedMarginal& marg,
                     const std::function<double(double)>& true_q_inverse, double z);

}  // namespace ldptail
