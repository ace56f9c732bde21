#include "ldptail/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "ldptail/error.hpp"

namespace ldptail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThetaZero = 1e-12;

// Beyond this point erfc(x / sqrt 2) is close to the smallest normal double.
constexpr double kSfAsymptotic = 37.0;

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// log(1 - Phi(t)) for large t from the asymptotic Mills-ratio series.
double log_sf_asymptotic(double t) {
  const double r = 1.0 / (t * t);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
  return -0.5 * t * t - std::log(t) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

}  // namespace

double std_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_sf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double log_std_normal_sf(double x) {
  if (x < kSfAsymptotic) return std::log(std_normal_sf(x));
  return log_sf_asymptotic(x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: probability " + std::to_string(p) +
                      " outside (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double std_normal_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_upper_quantile: probability " + std::to_string(p) +
                      " outside (0, 1)");
  }
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_of_exp(double x) {
  if (!(x > 0.0)) return -kInf;
  if (x == kInf) return kInf;
  if (x < std::numbers::ln2) return std_normal_quantile(-std::expm1(-x));
  if (x < 700.0) return std_normal_upper_quantile(std::exp(-x));
  // exp(-x) underflows: solve log(1 - Phi(t)) = -x by Newton's method.
  double t = std::sqrt(2.0 * x - std::log(4.0 * std::numbers::pi * x));
  for (int it = 0; it < 8; ++it) {
    const double f = log_sf_asymptotic(t) + x;
    const double slope = -(t + 1.0 / t);
    const double step = f / slope;
    t -= step;
    if (std::abs(step) <= 1e-15 * t) break;
  }
  return t;
}

double exp_of_normal(double u) {
  // log1p keeps the small values of the lower half accurate.
  if (u < 0.0) return -std::log1p(-std_normal_cdf(u));
  return -log_std_normal_sf(u);
}

double h_transform(double theta, double lambda) {
  if (!(lambda > 0.0)) {
    throw DomainError("h_transform: lambda must be positive, got " +
                      std::to_string(lambda));
  }
  const double log_lambda = std::log(lambda);
  if (std::abs(theta) < kThetaZero) return log_lambda;
  // expm1 keeps full relative accuracy as theta -> 0.
  return std::expm1(theta * log_lambda) / theta;
}

double h_inverse(double theta, double x) {
  if (std::isnan(x)) throw DomainError("h_inverse: NaN argument");
  if (std::abs(theta) < kThetaZero) return std::exp(x);
  const double arg = theta * x;
  if (!(arg > -1.0)) {
    throw DomainError("h_inverse: " + std::to_string(x) +
                      " is outside the image of h_theta for theta = " +
                      std::to_string(theta));
  }
  return std::exp(std::log1p(arg) / theta);
}

double bvn_upper_prob(double rho, double x1, double x2) {
  if (!(std::abs(rho) < 1.0)) {
    throw DomainError("bvn_upper_prob: |rho| must be < 1, got " + std::to_string(rho));
  }
  if (std::isnan(x1) || std::isnan(x2)) throw DomainError("bvn_upper_prob: NaN threshold");
  if (x1 == kInf || x2 == kInf) return 0.0;
  if (x1 == -kInf) return std_normal_sf(x2);
  if (x2 == -kInf) return std_normal_sf(x1);
  if (rho == 0.0) return std_normal_sf(x1) * std_normal_sf(x2);

  // Condition on U1 = t: P(U2 > x2 | t) = 1 - Phi((x2 - rho t) / sqrt(1 - rho^2)).
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  auto integrand = [&](double t) {
    return std_normal_pdf(t) * std_normal_sf((x2 - rho * t) / s);
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  double error = 0.0;
  // Two pieces: [x1, max(x1, 0)] and [max(x1, 0), inf).
  const double split = std::max(x1, 0.0);
  double value = Quadrature::integrate(integrand, split, kInf, 12, 1e-14, &error);
  if (split > x1) value += Quadrature::integrate(integrand, x1, split, 12, 1e-14, &error);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace ldptail
