#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ldptail {

enum class Scenario { kFig2, kSurvivalGrid, kConsistency };

struct StudyConfig {
  Scenario scenario = Scenario::kFig2;
  std::size_t n = 5000;
  std::size_t k_n = 20;
  double xi = 1.0;
  double rho = 0.5;
  std::size_t realisations = 500;
  std::uint64_t seed = 20240601;
  std::size_t threads = 0;  // 0: hardware concurrency

  // fig2: halfspace a_1 U_1 + a2 U_2 > c with P = truth.
  std::vector<double> a1_list{1.0, 0.5, 0.1, 0.0, -0.1, -0.5};
  double a2 = 1.0;
  double truth = 4e-8;
  std::size_t k_eta = 0;  // 0: use k_n

  // survival_grid: corners (r x2, x2) with x2 = x2_factor log n.
  std::vector<double> ratio_list{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  double x2_factor = 1.5;

  // consistency: halfspace (a1_list[0], a2) on the normal scale with
  // P = n^(-tau_rate tau); k_n = ceil(n^k_exponent) when k_exponent > 0.
  std::vector<std::size_t> n_list{2000, 20000, 200000};
  std::vector<double> tau_list{1.0};
  double tau_rate = 2.0;
  double k_exponent = 0.3;

  // Throws ConfigError for unusable settings.
  void validate() const;
};

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

// Parses the JSON form of StudyConfig; absent keys keep their defaults and
// unknown keys are rejected.
StudyConfig study_config_from_json(std::string_view text);
std::string study_config_to_json(const StudyConfig& cfg);

struct StudyRow {
  std::string scenario;
  std::string cell;   // human-readable cell label
  double x = 0.0;     // a1, corner ratio or n
  double tau = 0.0;   // consistency only
  std::string method;
  double truth = 0.0;
  double rmse_log = 0.0;
  double bias_log = 0.0;
  double median_abs_rel_log_err = 0.0;  // median of |log estimate / log truth - 1|
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // zero or failed estimates
};

struct StudyReport {
  StudyConfig config;
  std::vector<StudyRow> rows;
};

// Log-error summary of one cell; zero estimates count as excluded.
StudyRow aggregate_cell(const std::vector<double>& estimates, double truth);

StudyReport run_fig2(const StudyConfig& cfg);
StudyReport run_survival_grid(const StudyConfig& cfg);
StudyReport run_consistency(const StudyConfig& cfg);
StudyReport run_study(const StudyConfig& cfg);

void write_report_csv(std::ostream& out, const StudyReport& report);
std::string report_to_json(const StudyReport& report);

// Clusters of true flags, where a run of more than min_gap false flags
// separates clusters.
std::size_t count_separated_events(const std::vector<bool>& flags, std::size_t min_gap);

}  // namespace ldptail
