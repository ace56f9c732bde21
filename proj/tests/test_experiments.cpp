#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ldptail/error.hpp"
#include "ldptail/experiments.hpp"
#include "ldptail/simulate.hpp"

using namespace ldptail;

TEST_CASE("aggregate cell statistics") {
  const double truth = 1e-6;
  const std::vector<double> est{2e-6, 5e-7, 1e-6, 4e-6, 0.0, -1.0, NAN};
  const StudyRow row = aggregate_cell(est, truth);
  CHECK(row.n_used == 4);
  CHECK(row.n_excluded == 3);
  std::vector<double> d;
  for (std::size_t i = 0; i < 4; ++i) d.push_back(std::log(est[i] / truth));
  double mean = 0.0;
  for (double x : d) mean += x / 4.0;
  double var = 0.0;
  double ms = 0.0;
  for (double x : d) {
    var += (x - mean) * (x - mean) / 4.0;
    ms += x * x / 4.0;
  }
  CHECK(row.bias_log == doctest::Approx(mean).epsilon(1e-14));
  CHECK(row.rmse_log == doctest::Approx(std::sqrt(ms)).epsilon(1e-14));
  CHECK(row.rmse_log * row.rmse_log == doctest::Approx(row.bias_log * row.bias_log + var));
  // Relative log errors |log e / log p - 1|, median of four.
  std::vector<double> rel;
  for (std::size_t i = 0; i < 4; ++i) rel.push_back(std::fabs(std::log(est[i]) / std::log(truth) - 1));
  std::sort(rel.begin(), rel.end());
  CHECK(row.median_abs_rel_log_err == doctest::Approx(0.5 * (rel[1] + rel[2])).epsilon(1e-14));

  const StudyRow single = aggregate_cell({3e-6}, truth);
  CHECK(single.rmse_log == doctest::Approx(std::fabs(single.bias_log)).epsilon(1e-15));
  const StudyRow empty = aggregate_cell({0.0, 0.0}, truth);
  CHECK(empty.n_used == 0);
  CHECK(std::isnan(empty.rmse_log));
}

TEST_CASE("separated exceedance clusters") {
  std::vector<bool> flags(100, false);
  for (std::size_t i : {3u, 4u, 6u, 30u, 31u, 60u}) flags[i] = true;
  CHECK(count_separated_events(flags, 1) == 3);  // {3,4,6}, {30,31}, {60}
  CHECK(count_separated_events(flags, 25) == 2);
  CHECK(count_separated_events(flags, 40) == 1);
  CHECK(count_separated_events(std::vector<bool>(10, false), 3) == 0);
  CHECK(count_separated_events({true, false, true}, 1) == 1);
  CHECK_THROWS_AS(count_separated_events(flags, 0), ConfigError);
}

TEST_CASE("study configuration JSON") {
  const StudyConfig cfg = study_config_from_json(
      R"({"scenario":"survival_grid","n":800,"realisations":3,"ratio_list":[0.5]})");
  CHECK(cfg.scenario == Scenario::kSurvivalGrid);
  CHECK(cfg.n == 800);
  CHECK(cfg.k_n == 20);
  CHECK(cfg.ratio_list == std::vector<double>{0.5});
  const StudyConfig back = study_config_from_json(study_config_to_json(cfg));
  CHECK(study_config_to_json(back) == study_config_to_json(cfg));
  CHECK_THROWS_AS(study_config_from_json(R"({"scenario":"fig2","bogus":1})"), ConfigError);
  CHECK_THROWS_AS(study_config_from_json(R"({"scenario":"nope"})"), ConfigError);
  CHECK_THROWS_AS(study_config_from_json(R"({"n":"many"})"), ConfigError);
  CHECK_THROWS_AS(study_config_from_json("[1"), ConfigError);
  CHECK_THROWS_AS(study_config_from_json(R"({"realisations":0})").validate(), ConfigError);
}

TEST_CASE("small fig2 study") {
  StudyConfig cfg;
  cfg.n = 1000;
  cfg.realisations = 4;
  cfg.a1_list = {1.0, -0.5};
  cfg.threads = 1;
  const StudyReport rep = run_study(cfg);
  REQUIRE(rep.rows.size() == 6);
  for (const auto& row : rep.rows) {
    CHECK(row.truth == 4e-8);
    CHECK(row.n_used + row.n_excluded == 4);
    CHECK(row.scenario == "fig2");
  }
  CHECK(rep.rows[0].method == "ldp-I");
  CHECK(rep.rows[1].method == "classical");
  CHECK(rep.rows[2].method == "classical-rtd");
  CHECK(rep.rows[3].cell == "a1=-0.5");

  // Thread count does not change the report.
  StudyConfig threaded = cfg;
  threaded.threads = 3;
  StudyReport other = run_study(threaded);
  other.config.threads = 1;
  CHECK(report_to_json(other) == report_to_json(rep));

  std::ostringstream csv;
  write_report_csv(csv, rep);
  const std::string text = csv.str();
  CHECK(text.rfind("scenario,cell,x,tau,method,truth,rmse_log,bias_log,median_abs_rel_log_err,"
                   "n_used,n_excluded\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("small survival and consistency studies") {
  StudyConfig surv;
  surv.scenario = Scenario::kSurvivalGrid;
  surv.n = 1000;
  surv.realisations = 3;
  surv.ratio_list = {0.5};
  const StudyReport s = run_study(surv);
  REQUIRE(s.rows.size() == 1);
  const double x2 = 1.5 * std::log(1000.0);
  const std::vector<double> a{0.5 * x2, x2};
  CHECK(s.rows[0].truth == corner_exact_prob(a, 0.5));

  StudyConfig cons;
  cons.scenario = Scenario::kConsistency;
  cons.n_list = {500, 1000};
  cons.tau_list = {0.5, 1.0};
  cons.realisations = 2;
  const StudyReport c = run_study(cons);
  REQUIRE(c.rows.size() == 4);
  CHECK(c.rows[0].truth == doctest::Approx(std::pow(500.0, -1.0)).epsilon(1e-15));
  CHECK(c.rows[3].truth == doctest::Approx(std::pow(1000.0, -2.0)).epsilon(1e-15));
  CHECK(c.rows[0].cell == "n=500,k_n=7,tau=0.5");  // ceil(500^0.3) = ceil(6.45)
  CHECK_THROWS_AS(run_fig2(cons), ConfigError);
}
