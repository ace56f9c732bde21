#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ldptail/events.hpp"

namespace ldptail {

// Rate function of Y = -log(1 - Phi(U)) with U ~ N(0, V), on the exponential scale.
class NormalRateModel {
 public:
  // Row-major m x m correlation matrix. Throws ConfigError unless V is
  // symmetric with unit diagonal and strictly positive definite.
  NormalRateModel(std::size_t m, std::vector<double> correlation);
  static NormalRateModel bivariate(double rho);

  std::size_t dimension() const noexcept { return m_; }
  double correlation(std::size_t i, std::size_t j) const { return v_[i * m_ + j]; }
  double precision(std::size_t i, std::size_t j) const { return w_[i * m_ + j]; }
  // W = V^{-1}, row-major.
  const std::vector<double>& precision_matrix() const noexcept { return w_; }

 private:
  std::size_t m_;
  std::vector<double> v_;
  std::vector<double> w_;
};

// sum_{j,i} W_ji sqrt(x_i x_j) for x in (0, inf)^m. On the boundary of the
// orthant the coordinates at zero are relaxed: the value is
// (1/2) min u'Wu over u_j = sqrt(2 x_j) where x_j > 0 and u_j <= 0 where x_j = 0,
// which coincides with the closed form whenever the closed form respects the
// marginal condition. Returns +infinity when any coordinate is negative.
double normal_rate(const NormalRateModel& model, std::span<const double> x);

// I(1 - t, t) for the bivariate model. Throws DomainError unless |rho| < 1
// and t in [0, 1].
double psi(double rho, double t);

// Joint-survival exponent inf{I(y) : y_1 > x_1, y_2 > x_2} of the bivariate
// normal model in closed form.
double kappa_normal(double rho, double x1, double x2);

using RateFunction = std::function<double(std::span<const double>)>;

struct RateSearch {
  std::size_t directions = 2048;  // m = 2: grid points on the unit simplex
  std::size_t lattice = 48;       // m > 2: subdivisions of the simplex lattice
  double scale_cap = 1e4;         // largest ray scale tried
  double rel_tol = 1e-13;         // ray bisection tolerance (relative)
  bool refine = true;             // golden-section polish around the best direction (m = 2)
};

// inf of a positively homogeneous rate over an event, found by scanning
// directions u of the unit simplex, bisecting for the smallest scale
// lambda(u) with lambda(u) u in the event and minimising lambda(u) rate(u).
// For m = 2 the error is of order the squared grid step after refinement.
// Throws DegenerateError when no ray enters the event below scale_cap.
double inf_rate_over_event(const RateFunction& rate, const Event& event, std::size_t m,
                           const RateSearch& search = {});

}  // namespace ldptail
