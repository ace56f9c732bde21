#include "ldptail/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ldptail/error.hpp"

namespace ldptail {
namespace {

constexpr const char* kRtdNote =
    "residual-tail-dependence correction (k/n) exp(-lambda/eta) is one possible correction, "
    "not a formula fixed by the method";

double k_over_n(const EstimatorConfig& cfg, std::size_t n) {
  return static_cast<double>(cfg.k_n) / static_cast<double>(n);
}

}  // namespace

void EstimatorConfig::validate(std::size_t n) const {
  if (k_n < 1 || k_n >= n) {
    throw ConfigError("k_n = " + std::to_string(k_n) + " must satisfy 1 <= k_n < n = " +
                      std::to_string(n));
  }
  if (!(xi > 0.0)) throw ConfigError("xi must be positive");
  if (!(vartheta > 0.0 && vartheta <= xi)) throw ConfigError("vartheta must lie in (0, xi]");
  if (target_count && *target_count == 0) throw ConfigError("target_count must be positive");
  scale_search.validate();
  shift_search.validate();
}

std::string method_name(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::kLdpI:
      return "ldp-I";
    case EstimateMethod::kLdpII:
      return "ldp-II";
    case EstimateMethod::kClassical:
      return "classical";
    case EstimateMethod::kClassicalRtd:
      return "classical-rtd";
    case EstimateMethod::kEmpirical:
      return "empirical";
  }
  return "unknown";
}

std::size_t required_count(std::size_t n, std::size_t k_n, double exponent) {
  const double nd = static_cast<double>(n);
  const double target = nd * std::pow(static_cast<double>(k_n) / nd, exponent);
  const double c = std::ceil(target * (1.0 - 1e-12));
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

double ldp_I_estimate(double k_over_n, double xi, double ell_plus) {
  if (!(ell_plus > 0.0)) return 0.0;
  return std::pow(k_over_n, xi / ell_plus);
}

double ldp_II_estimate(std::size_t count, std::size_t n, double ell) {
  if (!(ell > 0.0) || count == 0) return 0.0;
  return std::pow(static_cast<double>(count) / static_cast<double>(n), 1.0 / ell);
}

double classical_estimate(double k_over_n, double lambda) {
  if (std::isinf(lambda)) return 0.0;
  return k_over_n * std::exp(-lambda);
}

double classical_rtd_estimate(double k_over_n, double lambda, double eta) {
  if (!(eta > 0.0)) throw DomainError("classical_rtd_estimate: eta must be positive");
  if (std::isinf(lambda)) return 0.0;
  return k_over_n * std::exp(-lambda / eta);
}

double ell_plus(const PointMatrix& pseudo, const MarginMap& q_map, const Event& event,
                const EstimatorConfig& cfg) {
  cfg.validate(pseudo.rows());
  CriticalScales path(pseudo, event, q_map, PathKind::kScale, cfg.scale_search);
  return path.threshold_for_count(required_count(pseudo.rows(), cfg.k_n, cfg.xi)).value;
}

double ell_minus(const PointMatrix& pseudo, const MarginMap& q_map, const Event& event,
                 const EstimatorConfig& cfg) {
  cfg.validate(pseudo.rows());
  CriticalScales path(pseudo, event, q_map, PathKind::kScale, cfg.scale_search);
  return path.threshold_for_count(required_count(pseudo.rows(), cfg.k_n, cfg.vartheta)).value;
}

EstimateReport estimate_ldp_I(CriticalScales& scale_path, const EstimatorConfig& cfg) {
  if (scale_path.kind() != PathKind::kScale) {
    throw ConfigError("estimate_ldp_I needs a scale path");
  }
  const std::size_t n = scale_path.size();
  cfg.validate(n);
  EstimateReport r;
  r.method = EstimateMethod::kLdpI;
  r.n = n;
  r.k_n = cfg.k_n;
  r.required_count = required_count(n, cfg.k_n, cfg.xi);
  const CountThreshold plus = scale_path.threshold_for_count(r.required_count);
  r.ell_plus = plus.value;
  r.ell_minus =
      scale_path.threshold_for_count(required_count(n, cfg.k_n, cfg.vartheta)).value;
  r.ell_used = r.ell_plus;
  r.saturated = plus.saturated;
  r.grid_fallback = plus.grid_fallback;
  r.estimate = ldp_I_estimate(k_over_n(cfg, n), cfg.xi, r.ell_plus);
  r.underflow = r.estimate == 0.0;
  if (r.ell_plus > 0.0) r.count_at_ell = scale_path.count_at(r.ell_plus);
  return r;
}

EstimateReport estimate_ldp_I(const PointMatrix& pseudo, const MarginMap& q_map,
                              const Event& event, const EstimatorConfig& cfg) {
  cfg.validate(pseudo.rows());
  CriticalScales path(pseudo, event, q_map, PathKind::kScale, cfg.scale_search);
  return estimate_ldp_I(path, cfg);
}

EstimateReport estimate_ldp_II(CriticalScales& scale_path, const EstimatorConfig& cfg) {
  if (scale_path.kind() != PathKind::kScale) {
    throw ConfigError("estimate_ldp_II needs a scale path");
  }
  const std::size_t n = scale_path.size();
  cfg.validate(n);
  EstimateReport r;
  r.method = EstimateMethod::kLdpII;
  r.n = n;
  r.k_n = cfg.k_n;
  r.required_count = required_count(n, cfg.k_n, cfg.xi);
  const CountThreshold plus = scale_path.threshold_for_count(r.required_count);
  const CountThreshold minus =
      scale_path.threshold_for_count(required_count(n, cfg.k_n, cfg.vartheta));
  r.ell_plus = plus.value;
  r.ell_minus = minus.value;
  r.saturated = plus.saturated || minus.saturated;
  r.grid_fallback = plus.grid_fallback || minus.grid_fallback;

  r.ell_used = r.ell_plus;
  if (cfg.target_count) {
    const CountThreshold chosen = scale_path.threshold_for_count(*cfg.target_count);
    if (chosen.value < r.ell_minus || chosen.value > r.ell_plus) {
      throw ConfigError("target_count " + std::to_string(*cfg.target_count) +
                        " gives ell = " + std::to_string(chosen.value) + " outside [" +
                        std::to_string(r.ell_minus) + ", " + std::to_string(r.ell_plus) + "]");
    }
    r.ell_used = chosen.value;
    r.saturated = r.saturated || chosen.saturated;
  }
  if (r.ell_used > 0.0) r.count_at_ell = scale_path.count_at(r.ell_used);
  r.estimate = ldp_II_estimate(r.count_at_ell, n, r.ell_used);
  r.underflow = r.estimate == 0.0;
  return r;
}

EstimateReport estimate_ldp_II(const PointMatrix& pseudo, const MarginMap& q_map,
                               const Event& event, const EstimatorConfig& cfg) {
  cfg.validate(pseudo.rows());
  CriticalScales path(pseudo, event, q_map, PathKind::kScale, cfg.scale_search);
  return estimate_ldp_II(path, cfg);
}

EstimateReport estimate_classical(CriticalScales& shift_path, const EstimatorConfig& cfg) {
  if (shift_path.kind() != PathKind::kShift) {
    throw ConfigError("estimate_classical needs a shift path");
  }
  const std::size_t n = shift_path.size();
  cfg.validate(n);
  EstimateReport r;
  r.method = EstimateMethod::kClassical;
  r.n = n;
  r.k_n = cfg.k_n;
  r.required_count = required_count(n, cfg.k_n, 1.0);
  const CountThreshold lambda = shift_path.threshold_for_count(r.required_count);
  r.lambda_shift = lambda.value;
  r.saturated = lambda.saturated;
  r.grid_fallback = lambda.grid_fallback;
  if (std::isfinite(lambda.value)) r.count_at_ell = shift_path.count_at(lambda.value);
  r.estimate = classical_estimate(k_over_n(cfg, n), lambda.value);
  r.underflow = r.estimate == 0.0;
  return r;
}

EstimateReport estimate_classical(const PointMatrix& pseudo, const Event& event,
                                  const EstimatorConfig& cfg, const MarginMap& q_map) {
  cfg.validate(pseudo.rows());
  CriticalScales path(pseudo, event, q_map, PathKind::kShift, cfg.shift_search);
  return estimate_classical(path, cfg);
}

double estimate_eta_hill(const PointMatrix& pseudo, std::size_t k_eta) {
  const std::size_t n = pseudo.rows();
  if (k_eta < 1 || k_eta >= n) {
    throw ConfigError("k_eta = " + std::to_string(k_eta) + " must satisfy 1 <= k_eta < n = " +
                      std::to_string(n));
  }
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = pseudo.row(i);
    t[i] = *std::min_element(row.begin(), row.end());
  }
  std::sort(t.begin(), t.end());
  const double threshold = t[n - k_eta - 1];
  double excess = 0.0;
  for (std::size_t i = n - k_eta; i < n; ++i) excess += t[i] - threshold;
  const double eta = excess / static_cast<double>(k_eta);
  if (!(eta > 0.0)) throw DegenerateError("estimate_eta_hill: all top excesses are zero");
  return std::min(eta, 1.0);
}

EstimateReport estimate_classical_rtd(CriticalScales& shift_path, const EstimatorConfig& cfg,
                                      double eta_hat) {
  EstimateReport r = estimate_classical(shift_path, cfg);
  r.method = EstimateMethod::kClassicalRtd;
  r.eta_hat = eta_hat;
  r.estimate = classical_rtd_estimate(k_over_n(cfg, r.n), *r.lambda_shift, eta_hat);
  r.underflow = r.estimate == 0.0;
  r.note = kRtdNote;
  return r;
}

EstimateReport estimate_classical_rtd(const PointMatrix& pseudo, const Event& event,
                                      const EstimatorConfig& cfg,
                                      std::optional<std::size_t> k_eta, const MarginMap& q_map) {
  cfg.validate(pseudo.rows());
  const double eta = estimate_eta_hill(pseudo, k_eta.value_or(cfg.k_n));
  CriticalScales path(pseudo, event, q_map, PathKind::kShift, cfg.shift_search);
  return estimate_classical_rtd(path, cfg, eta);
}

EstimateReport estimate_empirical(const PointMatrix& data, const Event& event) {
  if (data.empty()) throw ConfigError("estimate_empirical: no observations");
  EstimateReport r;
  r.method = EstimateMethod::kEmpirical;
  r.n = data.rows();
  for (std::size_t i = 0; i < data.rows(); ++i) r.count_at_ell += event.contains(data.row(i));
  r.estimate = static_cast<double>(r.count_at_ell) / static_cast<double>(r.n);
  r.ell_used = 1.0;
  r.ell_plus = 1.0;
  r.ell_minus = 1.0;
  return r;
}

}  // namespace ldptail
