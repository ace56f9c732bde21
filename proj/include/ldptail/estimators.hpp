#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "ldptail/events.hpp"
#include "ldptail/point_matrix.hpp"
#include "ldptail/transform.hpp"

namespace ldptail {

struct EstimatorConfig {
  std::size_t k_n = 20;
  double xi = 1.0;
  double vartheta = 1.0;  // must satisfy 0 < vartheta <= xi
  // Selects ell_n for the second LDP estimator as the scale at which exactly
  // this many stretched points lie in the event; unset means ell_n = ell_plus.
  std::optional<std::size_t> target_count;
  PathSearch scale_search;
  PathSearch shift_search;

  // Throws ConfigError unless 1 <= k_n < n and 0 < vartheta <= xi.
  void validate(std::size_t n) const;
};

enum class EstimateMethod { kLdpI, kLdpII, kClassical, kClassicalRtd, kEmpirical };

std::string method_name(EstimateMethod method);

struct EstimateReport {
  double estimate = 0.0;
  EstimateMethod method = EstimateMethod::kLdpI;
  std::size_t n = 0;
  std::size_t k_n = 0;
  std::size_t required_count = 0;
  double ell_plus = 0.0;
  double ell_minus = 0.0;
  double ell_used = 0.0;
  std::size_t count_at_ell = 0;
  std::optional<double> lambda_shift;
  std::optional<double> eta_hat;
  bool underflow = false;       // estimate forced to 0 (ell = 0 or no shift found)
  bool saturated = false;       // a scale or shift hit the end of its search range
  bool grid_fallback = false;   // non-monotone membership, grid search used
  std::string note;
};

// ceil(n (k_n / n)^exponent), guarded against rounding just above an integer.
std::size_t required_count(std::size_t n, std::size_t k_n, double exponent);

// Closed forms shared by the estimators.
double ldp_I_estimate(double k_over_n, double xi, double ell_plus);
double ldp_II_estimate(std::size_t count, std::size_t n, double ell);
double classical_estimate(double k_over_n, double lambda);
double classical_rtd_estimate(double k_over_n, double lambda, double eta);

// sup{l > 0 : p_hat(Q(Y_hat / l) in B) >= (k_n / n)^xi}; 0 when empty.
double ell_plus(const PointMatrix& pseudo, const MarginMap& q_map, const Event& event,
                const EstimatorConfig& cfg);
// Same with exponent vartheta; never exceeds ell_plus.
double ell_minus(const PointMatrix& pseudo, const MarginMap& q_map, const Event& event,
                 const EstimatorConfig& cfg);

// (k_n / n)^(xi / ell_plus).
EstimateReport estimate_ldp_I(const PointMatrix& pseudo, const MarginMap& q_map,
                              const Event& event, const EstimatorConfig& cfg);
EstimateReport estimate_ldp_I(CriticalScales& scale_path, const EstimatorConfig& cfg);

// p_hat(Q(Y_hat / ell_n) in B)^(1 / ell_n) with ell_n in [ell_minus, ell_plus].
EstimateReport estimate_ldp_II(const PointMatrix& pseudo, const MarginMap& q_map,
                               const Event& event, const EstimatorConfig& cfg);
EstimateReport estimate_ldp_II(CriticalScales& scale_path, const EstimatorConfig& cfg);

// (k_n / n) exp(-lambda_n) with lambda_n = inf{l > 0 : p_hat(Q(Y_hat + l 1) in B) >= k_n / n}.
// The map defaults to the identity (event given on the exponential scale).
EstimateReport estimate_classical(const PointMatrix& pseudo, const Event& event,
                                  const EstimatorConfig& cfg,
                                  const MarginMap& q_map = MarginMap::identity());
EstimateReport estimate_classical(CriticalScales& shift_path, const EstimatorConfig& cfg);

// Hill-type estimate of the residual dependence index: mean excess of the
// top k_eta values of T = min_j Y_hat_j over the next order statistic,
// clamped to (0, 1]. Throws DegenerateError when the excesses vanish.
double estimate_eta_hill(const PointMatrix& pseudo, std::size_t k_eta);

// Classical estimate with the shift damped by eta: (k_n / n) exp(-lambda_n / eta_hat).
// k_eta defaults to k_n.
EstimateReport estimate_classical_rtd(const PointMatrix& pseudo, const Event& event,
                                      const EstimatorConfig& cfg,
                                      std::optional<std::size_t> k_eta = {},
                                      const MarginMap& q_map = MarginMap::identity());
EstimateReport estimate_classical_rtd(CriticalScales& shift_path, const EstimatorConfig& cfg,
                                      double eta_hat);

// Plain relative frequency of the event among the observations.
EstimateReport estimate_empirical(const PointMatrix& data, const Event& event);

}  // namespace ldptail
