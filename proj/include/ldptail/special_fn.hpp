#pragma once

// Special functions shared by the estimators, the rate-function code and the
// simulation oracles. Everything here is pure and reentrant.

namespace ldptail {

// Standard normal distribution function. Total; accepts +-infinity.
double std_normal_cdf(double x);

// Upper tail 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x);

// log(1 - Phi(x)), finite for arbitrarily large x.
double log_std_normal_sf(double x);

// Inverse of std_normal_cdf. Throws DomainError unless 0 < p < 1.
double std_normal_quantile(double p);

// Phi^{-1}(1 - p) for a small upper-tail probability p, without forming 1 - p.
double std_normal_upper_quantile(double p);

// Maps the standard exponential scale to the standard normal scale:
// x -> Phi^{-1}(1 - exp(-x)). Returns -infinity for x <= 0 and stays finite for
// very large x (where exp(-x) underflows).
double normal_of_exp(double x);

// Inverse of normal_of_exp: u -> -log(1 - Phi(u)).
double exp_of_normal(double u);

// The family h_theta(lambda) = (lambda^theta - 1) / theta, with h_0 = log.
// Throws DomainError for lambda <= 0.
double h_transform(double theta, double lambda);

// Inverse of h_transform in lambda. Throws DomainError when x lies outside
// h_theta((0, inf)), i.e. x <= -1/theta for theta > 0 or x >= -1/theta for
// theta < 0.
double h_inverse(double theta, double x);

// P(U1 > x1, U2 > x2) for a standard bivariate normal pair with correlation
// rho. Infinite thresholds are allowed. Throws DomainError for |rho| >= 1.
double bvn_upper_prob(double rho, double x1, double x2);

}  // namespace ldptail
