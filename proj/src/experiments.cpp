#include "ldptail/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <json.hpp>
#include <ostream>
#include <thread>

#include "ldptail/csv.hpp"
#include "ldptail/error.hpp"
#include "ldptail/estimators.hpp"
#include "ldptail/events.hpp"
#include "ldptail/simulate.hpp"
#include "ldptail/transform.hpp"

namespace ldptail {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, count) on a small worker pool. Each index writes
// only its own output slot, so results do not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Estimator failures inside one realisation (degenerate paths, ...) count as
// excluded rather than aborting the study.
template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return 0.0;
  }
}

Sample simulate_exponential(const StudyConfig& cfg, std::size_t n, std::uint64_t seed) {
  return sample_mvn(SimConfig::bivariate(n, cfg.rho, MarginalScale::kExponential, seed));
}

template <class T>
void read_key(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kFig2:
      return "fig2";
    case Scenario::kSurvivalGrid:
      return "survival_grid";
    case Scenario::kConsistency:
      return "consistency";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "fig2") return Scenario::kFig2;
  if (name == "survival_grid") return Scenario::kSurvivalGrid;
  if (name == "consistency") return Scenario::kConsistency;
  throw ConfigError("unknown scenario '" + name + "'");
}

void StudyConfig::validate() const {
  if (realisations < 1) throw ConfigError("realisations must be at least 1");
  if (!(xi > 0.0)) throw ConfigError("xi must be positive");
  if (!(std::fabs(rho) < 1.0)) throw ConfigError("rho must satisfy |rho| < 1");
  switch (scenario) {
    case Scenario::kFig2:
      if (a1_list.empty()) throw ConfigError("fig2 needs a non-empty a1_list");
      if (!(truth > 0.0 && truth < 1.0)) throw ConfigError("truth must lie in (0, 1)");
      [[fallthrough]];
    case Scenario::kSurvivalGrid:
      if (n < 4 || k_n < 1 || k_n >= n) throw ConfigError("need 1 <= k_n < n and n >= 4");
      if (k_eta >= n) throw ConfigError("k_eta must be below n");
      if (scenario == Scenario::kSurvivalGrid) {
        if (ratio_list.empty()) throw ConfigError("survival_grid needs a non-empty ratio_list");
        for (double r : ratio_list) {
          if (!(r > 0.0)) throw ConfigError("ratios must be positive");
        }
        if (!(x2_factor > 0.0)) throw ConfigError("x2_factor must be positive");
      }
      break;
    case Scenario::kConsistency:
      if (n_list.empty() || tau_list.empty() || a1_list.empty()) {
        throw ConfigError("consistency needs n_list, tau_list and a1_list");
      }
      for (std::size_t nn : n_list) {
        if (nn < 4) throw ConfigError("every n must be at least 4");
      }
      for (double t : tau_list) {
        if (!(t > 0.0)) throw ConfigError("tau values must be positive");
      }
      if (!(tau_rate > 0.0)) throw ConfigError("tau_rate must be positive");
      if (!(k_exponent >= 0.0 && k_exponent < 1.0)) {
        throw ConfigError("k_exponent must lie in [0, 1)");
      }
      break;
  }
}

StudyConfig study_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("study config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("study config must be a JSON object");
  static const std::vector<std::string> known{
      "scenario", "n",          "k_n",       "xi",     "rho",      "realisations",
      "seed",     "threads",    "a1_list",   "a2",     "truth",    "k_eta",
      "ratio_list", "x2_factor", "n_list",   "tau_list", "tau_rate", "k_exponent"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown study config key '" + item.key() + "'");
    }
  }
  StudyConfig cfg;
  try {
    if (j.contains("scenario")) cfg.scenario = scenario_from_string(j.at("scenario"));
    read_key(j, "n", cfg.n);
    read_key(j, "k_n", cfg.k_n);
    read_key(j, "xi", cfg.xi);
    read_key(j, "rho", cfg.rho);
    read_key(j, "realisations", cfg.realisations);
    read_key(j, "seed", cfg.seed);
    read_key(j, "threads", cfg.threads);
    read_key(j, "a1_list", cfg.a1_list);
    read_key(j, "a2", cfg.a2);
    read_key(j, "truth", cfg.truth);
    read_key(j, "k_eta", cfg.k_eta);
    read_key(j, "ratio_list", cfg.ratio_list);
    read_key(j, "x2_factor", cfg.x2_factor);
    read_key(j, "n_list", cfg.n_list);
    read_key(j, "tau_list", cfg.tau_list);
    read_key(j, "tau_rate", cfg.tau_rate);
    read_key(j, "k_exponent", cfg.k_exponent);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("study config has a field of the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string study_config_to_json(const StudyConfig& cfg) {
  const json j{{"scenario", to_string(cfg.scenario)},
               {"n", cfg.n},
               {"k_n", cfg.k_n},
               {"xi", cfg.xi},
               {"rho", cfg.rho},
               {"realisations", cfg.realisations},
               {"seed", cfg.seed},
               {"a1_list", cfg.a1_list},
               {"a2", cfg.a2},
               {"truth", cfg.truth},
               {"k_eta", cfg.k_eta},
               {"ratio_list", cfg.ratio_list},
               {"x2_factor", cfg.x2_factor},
               {"n_list", cfg.n_list},
               {"tau_list", cfg.tau_list},
               {"tau_rate", cfg.tau_rate},
               {"k_exponent", cfg.k_exponent}};
  return j.dump();
}

StudyRow aggregate_cell(const std::vector<double>& estimates, double truth) {
  StudyRow row;
  row.truth = truth;
  const double log_truth = std::log(truth);
  std::vector<double> err;
  std::vector<double> rel;
  for (double e : estimates) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      ++row.n_excluded;
      continue;
    }
    err.push_back(std::log(e) - log_truth);
    rel.push_back(std::fabs(std::log(e) / log_truth - 1.0));
  }
  row.n_used = err.size();
  if (err.empty()) {
    row.rmse_log = row.bias_log = row.median_abs_rel_log_err = kNaN;
    return row;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double d : err) {
    sum += d;
    sum_sq += d * d;
  }
  const auto cnt = static_cast<double>(err.size());
  row.bias_log = sum / cnt;
  row.rmse_log = std::sqrt(sum_sq / cnt);
  std::sort(rel.begin(), rel.end());
  const std::size_t h = rel.size() / 2;
  row.median_abs_rel_log_err = rel.size() % 2 ? rel[h] : 0.5 * (rel[h - 1] + rel[h]);
  return row;
}

StudyReport run_fig2(const StudyConfig& cfg) {
  if (cfg.scenario != Scenario::kFig2) throw ConfigError("run_fig2 needs scenario fig2");
  cfg.validate();
  const std::size_t cells = cfg.a1_list.size();
  constexpr std::size_t kMethods = 3;
  std::vector<Event> events;
  for (double a1 : cfg.a1_list) {
    const std::vector<double> a{a1, cfg.a2};
    events.push_back(Event::halfspace(a, halfspace_threshold(a, cfg.truth, cfg.rho),
                                      MarginTransform::kNormalOfExp));
  }
  EstimatorConfig est;
  est.k_n = cfg.k_n;
  est.xi = cfg.xi;
  est.vartheta = cfg.xi;
  const std::size_t k_eta = cfg.k_eta ? cfg.k_eta : cfg.k_n;

  // estimates[r][cell * kMethods + method]
  std::vector<std::vector<double>> estimates(cfg.realisations);
  parallel_for(cfg.realisations, cfg.threads, [&](std::size_t r) {
    const Sample sample = simulate_exponential(cfg, cfg.n, substream_seed(cfg.seed, r));
    const PseudoSample pseudo = rank_transform(sample);
    const double eta = guarded([&] { return estimate_eta_hill(pseudo.points, k_eta); });
    auto& out = estimates[r];
    out.assign(cells * kMethods, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      out[c * kMethods] = guarded([&] {
        CriticalScales path(pseudo.points, events[c], MarginMap::identity(), PathKind::kScale,
                            est.scale_search);
        return estimate_ldp_I(path, est).estimate;
      });
      CriticalScales shift(pseudo.points, events[c], MarginMap::identity(), PathKind::kShift,
                           est.shift_search);
      out[c * kMethods + 1] = guarded([&] { return estimate_classical(shift, est).estimate; });
      out[c * kMethods + 2] = guarded([&] {
        return eta > 0.0 ? estimate_classical_rtd(shift, est, eta).estimate : 0.0;
      });
    }
  });

  StudyReport report{cfg, {}};
  const char* names[kMethods] = {"ldp-I", "classical", "classical-rtd"};
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t m = 0; m < kMethods; ++m) {
      std::vector<double> cell(cfg.realisations);
      for (std::size_t r = 0; r < cfg.realisations; ++r) cell[r] = estimates[r][c * kMethods + m];
      StudyRow row = aggregate_cell(cell, cfg.truth);
      row.scenario = "fig2";
      row.cell = "a1=" + fmt(cfg.a1_list[c]);
      row.x = cfg.a1_list[c];
      row.method = names[m];
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

StudyReport run_survival_grid(const StudyConfig& cfg) {
  if (cfg.scenario != Scenario::kSurvivalGrid) {
    throw ConfigError("run_survival_grid needs scenario survival_grid");
  }
  cfg.validate();
  const double x2 = cfg.x2_factor * std::log(static_cast<double>(cfg.n));
  const std::size_t cells = cfg.ratio_list.size();
  std::vector<Event> events;
  std::vector<double> truths;
  for (double ratio : cfg.ratio_list) {
    const std::vector<double> a{ratio * x2, x2};
    events.push_back(Event::corner(a));
    truths.push_back(corner_exact_prob(a, cfg.rho));
  }
  EstimatorConfig est;
  est.k_n = cfg.k_n;
  est.xi = cfg.xi;
  est.vartheta = cfg.xi;

  std::vector<std::vector<double>> estimates(cfg.realisations);
  parallel_for(cfg.realisations, cfg.threads, [&](std::size_t r) {
    // The exact exponential-scale sample stands in for the pseudo-observations.
    const Sample sample = simulate_exponential(cfg, cfg.n, substream_seed(cfg.seed, r));
    auto& out = estimates[r];
    out.assign(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      out[c] = guarded([&] {
        return estimate_ldp_I(sample.rows, MarginMap::identity(), events[c], est).estimate;
      });
    }
  });

  StudyReport report{cfg, {}};
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> cell(cfg.realisations);
    for (std::size_t r = 0; r < cfg.realisations; ++r) cell[r] = estimates[r][c];
    StudyRow row = aggregate_cell(cell, truths[c]);
    row.scenario = "survival_grid";
    row.cell = "x1/x2=" + fmt(cfg.ratio_list[c]);
    row.x = cfg.ratio_list[c];
    row.method = "ldp-I";
    report.rows.push_back(std::move(row));
  }
  return report;
}

StudyReport run_consistency(const StudyConfig& cfg) {
  if (cfg.scenario != Scenario::kConsistency) {
    throw ConfigError("run_consistency needs scenario consistency");
  }
  cfg.validate();
  const std::vector<double> a{cfg.a1_list.front(), cfg.a2};
  StudyReport report{cfg, {}};
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::size_t n = cfg.n_list[ni];
    const auto nd = static_cast<double>(n);
    EstimatorConfig est;
    est.k_n = cfg.k_exponent > 0.0
                  ? static_cast<std::size_t>(std::ceil(std::pow(nd, cfg.k_exponent) * (1.0 - 1e-12)))
                  : cfg.k_n;
    est.xi = cfg.xi;
    est.vartheta = cfg.xi;
    est.validate(n);
    std::vector<Event> events;
    std::vector<double> truths;
    for (double tau : cfg.tau_list) {
      const double p = std::pow(nd, -cfg.tau_rate * tau);
      truths.push_back(p);
      events.push_back(Event::halfspace(a, halfspace_threshold(a, p, cfg.rho),
                                        MarginTransform::kNormalOfExp));
    }
    const std::uint64_t n_seed = substream_seed(cfg.seed, ni);
    std::vector<std::vector<double>> estimates(cfg.realisations);
    parallel_for(cfg.realisations, cfg.threads, [&](std::size_t r) {
      const Sample sample = simulate_exponential(cfg, n, substream_seed(n_seed, r));
      const PseudoSample pseudo = rank_transform(sample);
      auto& out = estimates[r];
      out.assign(events.size(), 0.0);
      for (std::size_t t = 0; t < events.size(); ++t) {
        out[t] = guarded([&] {
          return estimate_ldp_I(pseudo.points, MarginMap::identity(), events[t], est).estimate;
        });
      }
    });
    for (std::size_t t = 0; t < events.size(); ++t) {
      std::vector<double> cell(cfg.realisations);
      for (std::size_t r = 0; r < cfg.realisations; ++r) cell[r] = estimates[r][t];
      StudyRow row = aggregate_cell(cell, truths[t]);
      row.scenario = "consistency";
      row.cell = "n=" + std::to_string(n) + ",k_n=" + std::to_string(est.k_n) +
                 ",tau=" + fmt(cfg.tau_list[t]);
      row.x = nd;
      row.tau = cfg.tau_list[t];
      row.method = "ldp-I";
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

StudyReport run_study(const StudyConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::kFig2:
      return run_fig2(cfg);
    case Scenario::kSurvivalGrid:
      return run_survival_grid(cfg);
    case Scenario::kConsistency:
      return run_consistency(cfg);
  }
  throw Error(ErrorKind::kInternal, "unhandled scenario");
}

void write_report_csv(std::ostream& out, const StudyReport& report) {
  out << "scenario,cell,x,tau,method,truth,rmse_log,bias_log,median_abs_rel_log_err,n_used,"
         "n_excluded\n";
  for (const auto& r : report.rows) {
    out << r.scenario << ",\"" << r.cell << "\"," << fmt(r.x) << ',' << fmt(r.tau) << ','
        << r.method << ',' << fmt(r.truth) << ',' << fmt(r.rmse_log) << ',' << fmt(r.bias_log)
        << ',' << fmt(r.median_abs_rel_log_err) << ',' << r.n_used << ',' << r.n_excluded
        << '\n';
  }
}

std::string report_to_json(const StudyReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"cell", r.cell},
                    {"x", r.x},
                    {"tau", r.tau},
                    {"method", r.method},
                    {"truth", r.truth},
                    {"rmse_log", r.rmse_log},
                    {"bias_log", r.bias_log},
                    {"median_abs_rel_log_err", r.median_abs_rel_log_err},
                    {"n_used", r.n_used},
                    {"n_excluded", r.n_excluded}});
  }
  const json j{{"config", json::parse(study_config_to_json(report.config))}, {"rows", rows}};
  return j.dump(2);
}

std::size_t count_separated_events(const std::vector<bool>& flags, std::size_t min_gap) {
  if (min_gap < 1) throw ConfigError("min_gap must be at least 1");
  std::size_t clusters = 0;
  bool seen = false;
  std::size_t last = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) continue;
    if (!seen || i - last - 1 > min_gap) ++clusters;
    seen = true;
    last = i;
  }
  return clusters;
}

}  // namespace ldptail
