#include "ldptail/ratefn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ldptail/error.hpp"

namespace ldptail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Smallest lambda in (0, cap] with lambda u in the event; +inf when none.
double entry_scale(const Event& event, std::span<const double> u, const RateSearch& search,
                   std::vector<double>& scratch) {
  auto inside = [&](double lambda) {
    for (std::size_t j = 0; j < u.size(); ++j) scratch[j] = lambda * u[j];
    return event.contains(scratch);
  };
  double hi = search.scale_cap;
  if (!inside(hi)) return kInf;
  double lo = 0.0;
  if (inside(lo)) return 0.0;
  for (int it = 0; it < 400 && hi - lo > search.rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

void check_rho(double rho) {
  if (!(std::fabs(rho) < 1.0)) throw DomainError("correlation must satisfy |rho| < 1");
}

}  // namespace

NormalRateModel::NormalRateModel(std::size_t m, std::vector<double> correlation)
    : m_(m), v_(std::move(correlation)) {
  if (m_ == 0 || v_.size() != m_ * m_) {
    throw ConfigError("correlation matrix must have m * m entries");
  }
  const Eigen::Map<const RowMatrix> v(v_.data(), static_cast<Eigen::Index>(m_),
                                      static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) {
    if (std::fabs(v_[i * m_ + i] - 1.0) > 1e-12) {
      throw ConfigError("correlation matrix must have a unit diagonal");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::fabs(v_[i * m_ + j] - v_[j * m_ + i]) > 1e-12) {
        throw ConfigError("correlation matrix must be symmetric");
      }
    }
  }
  const Eigen::LLT<RowMatrix> llt(v);
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-12) {
    throw ConfigError("correlation matrix is not positive definite");
  }
  const RowMatrix w = llt.solve(RowMatrix::Identity(v.rows(), v.cols()));
  const double residual =
      (w * v - RowMatrix::Identity(v.rows(), v.cols())).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    throw ConfigError("correlation matrix is too ill-conditioned to invert");
  }
  w_.assign(w.data(), w.data() + w.size());
}

NormalRateModel NormalRateModel::bivariate(double rho) {
  check_rho(rho);
  return NormalRateModel(2, {1.0, rho, rho, 1.0});
}

double normal_rate(const NormalRateModel& model, std::span<const double> x) {
  const std::size_t m = model.dimension();
  if (x.size() != m) throw ConfigError("normal_rate: dimension mismatch");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> zero;
  for (std::size_t j = 0; j < m; ++j) {
    if (std::isnan(x[j])) throw DomainError("normal_rate: NaN coordinate");
    if (x[j] < 0.0) return kInf;
    (x[j] > 0.0 ? pos : zero).push_back(j);
  }
  if (pos.empty()) return 0.0;

  if (zero.empty()) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) total += model.precision(j, i) * std::sqrt(x[i] * x[j]);
    }
    return total;
  }

  // Active-set enumeration of the boundary problem. Each subset S of the zero
  // coordinates is left free while the rest K stay fixed. Minimising over u_S
  // gives u_K' V_KK^{-1} u_K with u_S = V_SK V_KK^{-1} u_K (the conditional
  // mean), which avoids the cancellation of a Schur complement of W. The best
  // candidate with u_S <= 0 is the constrained minimum.
  if (zero.size() > 20) throw ConfigError("normal_rate: too many zero coordinates");
  double best = kInf;
  const std::size_t subsets = std::size_t{1} << zero.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<std::size_t> free;
    std::vector<std::size_t> kept = pos;
    for (std::size_t b = 0; b < zero.size(); ++b) {
      (mask >> b & 1U ? free : kept).push_back(zero[b]);
    }
    const auto k = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd v_kk(k, k);
    Eigen::VectorXd u_k(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      u_k(a) = std::sqrt(2.0 * x[kept[a]]);
      for (Eigen::Index b = 0; b < k; ++b) v_kk(a, b) = model.correlation(kept[a], kept[b]);
    }
    const Eigen::VectorXd y = v_kk.llt().solve(u_k);
    bool feasible = true;
    for (std::size_t f : free) {
      double u_f = 0.0;
      for (Eigen::Index a = 0; a < k; ++a) u_f += model.correlation(f, kept[a]) * y(a);
      if (u_f > 0.0) {
        feasible = false;
        break;
      }
    }
    if (feasible) best = std::min(best, 0.5 * u_k.dot(y));
  }
  return best;
}

double psi(double rho, double t) {
  check_rho(rho);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("psi: t must lie in [0, 1]");
  const double x[2] = {1.0 - t, t};
  return normal_rate(NormalRateModel::bivariate(rho), x);
}

double kappa_normal(double rho, double x1, double x2) {
  check_rho(rho);
  if (!(x1 >= 0.0 && x2 >= 0.0)) throw DomainError("kappa_normal: thresholds must be >= 0");
  const double lo = std::min(x1, x2);
  const double hi = std::max(x1, x2);
  if (lo == 0.0) return hi;
  if (rho < 0.0 || lo / hi > rho * rho) {
    return (x1 + x2 - 2.0 * rho * std::sqrt(x1 * x2)) / (1.0 - rho * rho);
  }
  return hi;
}

double inf_rate_over_event(const RateFunction& rate, const Event& event, std::size_t m,
                           const RateSearch& search) {
  if (m == 0) throw ConfigError("inf_rate_over_event: dimension must be positive");
  if (event.dimension() != 0 && event.dimension() != m) {
    throw ConfigError("inf_rate_over_event: event dimension mismatch");
  }
  if (!(search.scale_cap > 0.0) || !(search.rel_tol > 0.0)) {
    throw ConfigError("inf_rate_over_event: invalid search settings");
  }
  std::vector<double> scratch(m);
  std::vector<double> u(m);
  auto value_at = [&](std::span<const double> dir) {
    const double lambda = entry_scale(event, dir, search, scratch);
    if (std::isinf(lambda)) return kInf;
    if (lambda == 0.0) return 0.0;
    return lambda * rate(dir);
  };

  double best = kInf;
  if (m == 1) {
    u[0] = 1.0;
    best = value_at(u);
  } else if (m == 2) {
    if (search.directions < 2) throw ConfigError("inf_rate_over_event: need >= 2 directions");
    const double step = 1.0 / static_cast<double>(search.directions - 1);
    auto along = [&](double t) {
      u[0] = 1.0 - t;
      u[1] = t;
      return value_at(u);
    };
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < search.directions; ++k) {
      const double v = along(static_cast<double>(k) * step);
      if (v < best) {
        best = v;
        best_k = k;
      }
    }
    if (search.refine && std::isfinite(best) && best > 0.0) {
      const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = std::max(0.0, (static_cast<double>(best_k) - 1.0) * step);
      double b = std::min(1.0, (static_cast<double>(best_k) + 1.0) * step);
      double c = b - invphi * (b - a);
      double d = a + invphi * (b - a);
      double fc = along(c);
      double fd = along(d);
      for (int it = 0; it < 80; ++it) {
        if (fc <= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - invphi * (b - a);
          fc = along(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + invphi * (b - a);
          fd = along(d);
        }
      }
      best = std::min({best, fc, fd});
    }
  } else {
    // Lattice points (i_1, ..., i_m) / L with sum_j i_j = L.
    const std::size_t lattice = std::max<std::size_t>(search.lattice, 1);
    const double scale = 1.0 / static_cast<double>(lattice);
    auto visit = [&](auto&& self, std::size_t j, std::size_t remaining) -> void {
      if (j + 1 == m) {
        u[j] = static_cast<double>(remaining) * scale;
        best = std::min(best, value_at(u));
        return;
      }
      for (std::size_t v = 0; v <= remaining; ++v) {
        u[j] = static_cast<double>(v) * scale;
        self(self, j + 1, remaining - v);
      }
    };
    visit(visit, 0, lattice);
  }
  if (std::isinf(best)) {
    throw DegenerateError("inf_rate_over_event: no direction enters the event below the scale cap");
  }
  return best;
}

}  // namespace ldptail
