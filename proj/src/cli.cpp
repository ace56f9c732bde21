#include "ldptail/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ldptail/csv.hpp"
#include "ldptail/error.hpp"
#include "ldptail/estimators.hpp"
#include "ldptail/events.hpp"
#include "ldptail/experiments.hpp"
#include "ldptail/marginal.hpp"
#include "ldptail/ratefn.hpp"
#include "ldptail/simulate.hpp"
#include "ldptail/transform.hpp"

namespace ldptail {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path, ErrorKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(kind, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "auto" or a positive integer.
std::optional<std::size_t> parse_auto(const std::string& text, const std::string& flag) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 1) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw ConfigError(flag + " must be 'auto' or a positive integer, got '" + text + "'");
  }
}

json fit_to_json(const SortedMarginal& marg, const LogGwTailFit& fit) {
  return {{"name", marg.name()},     {"theta_hat", fit.theta_hat}, {"g_hat", fit.g_hat},
          {"anchor", fit.anchor},    {"y_n", fit.y_n},             {"k0", fit.kseq.k0},
          {"k1", fit.kseq.k1},       {"k2", fit.kseq.k2},          {"iota", fit.kseq.iota}};
}

json report_to_json(const EstimateReport& r) {
  json j{{"method", method_name(r.method)},
         {"estimate", r.estimate},
         {"n", r.n},
         {"k_n", r.k_n},
         {"required_count", r.required_count},
         {"ell_plus", r.ell_plus},
         {"ell_minus", r.ell_minus},
         {"ell_used", r.ell_used},
         {"count_at_ell", r.count_at_ell},
         {"underflow", r.underflow},
         {"saturated", r.saturated},
         {"grid_fallback", r.grid_fallback}};
  j["lambda_shift"] = r.lambda_shift ? json(*r.lambda_shift) : json(nullptr);
  j["eta_hat"] = r.eta_hat ? json(*r.eta_hat) : json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void print_table(std::ostream& out, const std::vector<EstimateReport>& reports) {
  out << std::left << std::setw(15) << "method" << std::setw(14) << "estimate" << std::setw(12)
      << "ell_plus" << std::setw(12) << "ell_used" << std::setw(8) << "count" << "lambda\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(15) << method_name(r.method) << std::setw(14)
        << std::setprecision(6) << r.estimate << std::setw(12) << r.ell_plus << std::setw(12)
        << r.ell_used << std::setw(8) << r.count_at_ell;
    if (r.lambda_shift) out << *r.lambda_shift;
    out << '\n';
  }
}

Sample load_sample(const std::string& path, std::ostream& err) {
  IngestResult in = ingest_csv(path);
  for (const auto& d : in.diagnostics) err << "warning: dropped row " << d << '\n';
  return std::move(in.sample);
}

struct EstimateArgs {
  std::string data;
  std::string event;
  std::string k2 = "auto";
  double iota = 2.0;
  std::string k_n = "auto";
  double xi = 1.0;
  std::optional<double> vartheta;
  std::optional<std::size_t> target_count;
  std::optional<std::size_t> k_eta;
  std::string method = "all";
  std::string margins = "fitted";
  std::string format = "json";
};

int do_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const Event event = event_from_json(read_file(a.event, ErrorKind::kConfig));
  const Sample sample = load_sample(a.data, err);
  const std::size_t n = sample.n();
  if (event.dimension() != 0 && event.dimension() != sample.m()) {
    throw ConfigError("event has dimension " + std::to_string(event.dimension()) +
                      " but the data has " + std::to_string(sample.m()) + " columns");
  }
  EstimatorConfig cfg;
  cfg.k_n = parse_auto(a.k_n, "--k-n").value_or(default_k2(n));
  cfg.xi = a.xi;
  cfg.vartheta = a.vartheta.value_or(a.xi);
  cfg.target_count = a.target_count;
  cfg.validate(n);

  static const std::vector<std::string> methods{"ldp-I", "ldp-II", "classical", "classical-rtd",
                                                "empirical"};
  std::vector<std::string> chosen;
  if (a.method == "all") {
    chosen = methods;
  } else if (std::find(methods.begin(), methods.end(), a.method) != methods.end()) {
    chosen = {a.method};
  } else {
    throw ConfigError("unknown method '" + a.method + "'");
  }

  json j{{"n", n}, {"m", sample.m()}, {"columns", sample.column_names}};
  std::optional<FittedMarginals> fitted;
  MarginMap q_map = MarginMap::identity();
  if (a.margins == "fitted") {
    fitted = fit_marginals(sample, parse_auto(a.k2, "--k2"), a.iota);
    q_map = fitted->q_hat();
    json margs = json::array();
    for (std::size_t c = 0; c < fitted->fits.size(); ++c) {
      margs.push_back(fit_to_json(fitted->margs[c], fitted->fits[c]));
    }
    j["marginals"] = margs;
  } else if (a.margins != "identity") {
    throw ConfigError("--margins must be 'fitted' or 'identity'");
  }
  j["margins"] = a.margins;

  const PseudoSample pseudo = rank_transform(sample);
  if (pseudo.has_ties()) {
    err << "warning: ties broken by input order in column(s)";
    for (auto c : pseudo.tied_columns) err << ' ' << sample.column_names.at(c);
    err << '\n';
  }
  std::optional<CriticalScales> scale_path;
  std::optional<CriticalScales> shift_path;
  auto scales = [&]() -> CriticalScales& {
    if (!scale_path) scale_path.emplace(pseudo.points, event, q_map, PathKind::kScale, cfg.scale_search);
    return *scale_path;
  };
  auto shifts = [&]() -> CriticalScales& {
    if (!shift_path) shift_path.emplace(pseudo.points, event, q_map, PathKind::kShift, cfg.shift_search);
    return *shift_path;
  };
  std::vector<EstimateReport> reports;
  for (const auto& m : chosen) {
    if (m == "ldp-I") reports.push_back(estimate_ldp_I(scales(), cfg));
    if (m == "ldp-II") reports.push_back(estimate_ldp_II(scales(), cfg));
    if (m == "classical") reports.push_back(estimate_classical(shifts(), cfg));
    if (m == "classical-rtd") {
      const double eta = estimate_eta_hill(pseudo.points, a.k_eta.value_or(cfg.k_n));
      reports.push_back(estimate_classical_rtd(shifts(), cfg, eta));
    }
    if (m == "empirical") reports.push_back(estimate_empirical(sample.rows, event));
  }

  if (a.format == "table") {
    print_table(out, reports);
  } else if (a.format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    j["estimates"] = arr;
    out << j.dump(2) << '\n';
  } else {
    throw ConfigError("--format must be 'json' or 'table'");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail probability estimation for multivariate extremes"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a seeded bivariate normal sample");
  std::size_t sim_n = 5000;
  double sim_rho = 0.5;
  std::string sim_scale = "exponential";
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  sim->add_option("--n", sim_n, "Number of observations")->capture_default_str();
  sim->add_option("--rho", sim_rho, "Correlation")->capture_default_str();
  sim->add_option("--scale", sim_scale, "normal | exponential | pareto")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output CSV (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the probability of an event from data");
  EstimateArgs ea;
  est->add_option("--data", ea.data, "Input CSV with a header row")->required();
  est->add_option("--event", ea.event, "Event JSON file")->required();
  est->add_option("--k2", ea.k2, "Marginal fit k2 or 'auto'")->capture_default_str();
  est->add_option("--iota", ea.iota, "Marginal fit spacing")->capture_default_str();
  est->add_option("--k-n", ea.k_n, "k_n or 'auto' (ceil((log n)^2))")->capture_default_str();
  est->add_option("--xi", ea.xi, "Exponent xi")->capture_default_str();
  est->add_option("--vartheta", ea.vartheta, "Exponent vartheta (default xi)");
  est->add_option("--target-count", ea.target_count, "Count selecting ell_n for ldp-II");
  est->add_option("--k-eta", ea.k_eta, "Order statistics for eta (default k_n)");
  est->add_option("--method", ea.method,
                  "ldp-I | ldp-II | classical | classical-rtd | empirical | all")
      ->capture_default_str();
  est->add_option("--margins", ea.margins, "fitted | identity")->capture_default_str();
  est->add_option("--format", ea.format, "json | table")->capture_default_str();

  // marginal-fit
  auto* mf = app.add_subcommand("marginal-fit", "Fit log-GW tails to every column");
  std::string mf_data;
  std::string mf_k2 = "auto";
  double mf_iota = 2.0;
  std::vector<double> mf_z;
  mf->add_option("--data", mf_data, "Input CSV with a header row")->required();
  mf->add_option("--k2", mf_k2, "k2 or 'auto'")->capture_default_str();
  mf->add_option("--iota", mf_iota, "Spacing")->capture_default_str();
  mf->add_option("--z", mf_z, "Exponential-scale levels at which to report q_hat");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run a simulation study from a JSON config");
  std::string ex_config;
  bool ex_fast = false;
  std::string ex_json;
  std::optional<std::size_t> ex_threads;
  ex->add_option("--config", ex_config, "Study config JSON")->required();
  ex->add_flag("--fast", ex_fast, "Use at most 100 realisations");
  ex->add_option("--json", ex_json, "Also write the JSON report here");
  ex->add_option("--threads", ex_threads, "Worker threads (0: all cores)");

  // ratefn
  auto* rf = app.add_subcommand("ratefn", "Emit rate-function grids of the normal model");
  double rf_rho = 0.5;
  std::size_t rf_grid = 200;
  double rf_max = 3.0;
  bool rf_psi = false;
  rf->add_option("--rho", rf_rho, "Correlation")->capture_default_str();
  rf->add_option("--grid", rf_grid, "Points per axis")->capture_default_str();
  rf->add_option("--max", rf_max, "Upper end of each axis")->capture_default_str();
  rf->add_flag("--psi", rf_psi, "Emit t, psi(t) instead of the (x1, x2) grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
    return exit_code(ErrorKind::kConfig);
  }

  try {
    if (*sim) {
      SimConfig cfg = SimConfig::bivariate(sim_n, sim_rho, marginal_scale_from_string(sim_scale),
                                           sim_seed);
      const Sample s = sample_mvn(cfg);
      if (sim_out.empty()) {
        write_csv(out, s);
      } else {
        std::ofstream f(sim_out);
        if (!f) throw ConfigError("cannot write '" + sim_out + "'");
        write_csv(f, s);
      }
      return 0;
    }
    if (*est) return do_estimate(ea, out, err);
    if (*mf) {
      const Sample sample = load_sample(mf_data, err);
      const FittedMarginals fm = fit_marginals(sample, parse_auto(mf_k2, "--k2"), mf_iota);
      json arr = json::array();
      for (std::size_t c = 0; c < fm.fits.size(); ++c) {
        json jc = fit_to_json(fm.margs[c], fm.fits[c]);
        json q = json::array();
        for (double z : mf_z) {
          q.push_back({{"z", z}, {"q_hat", quantile_hat(fm.fits[c], fm.margs[c], z)}});
        }
        if (!mf_z.empty()) jc["quantiles"] = q;
        arr.push_back(jc);
      }
      out << json{{"n", sample.n()}, {"marginals", arr}}.dump(2) << '\n';
      return 0;
    }
    if (*ex) {
      StudyConfig cfg = study_config_from_json(read_file(ex_config, ErrorKind::kConfig));
      if (ex_fast) cfg.realisations = std::min<std::size_t>(cfg.realisations, 100);
      if (ex_threads) cfg.threads = *ex_threads;
      const StudyReport report = run_study(cfg);
      write_report_csv(out, report);
      if (!ex_json.empty()) {
        std::ofstream f(ex_json);
        if (!f) throw ConfigError("cannot write '" + ex_json + "'");
        f << report_to_json(report) << '\n';
      }
      return 0;
    }
    if (*rf) {
      if (rf_grid < 2) throw ConfigError("--grid must be at least 2");
      if (!(rf_max > 0.0)) throw ConfigError("--max must be positive");
      const NormalRateModel model = NormalRateModel::bivariate(rf_rho);
      const double step = rf_max / static_cast<double>(rf_grid - 1);
      if (rf_psi) {
        out << "t,psi\n";
        for (std::size_t i = 0; i < rf_grid; ++i) {
          const double t = static_cast<double>(i) / static_cast<double>(rf_grid - 1);
          out << format_double(t) << ',' << format_double(psi(rf_rho, t)) << '\n';
        }
        return 0;
      }
      out << "x1,x2,I,kappa\n";
      for (std::size_t i = 0; i < rf_grid; ++i) {
        for (std::size_t k = 0; k < rf_grid; ++k) {
          const double x[2] = {static_cast<double>(i) * step, static_cast<double>(k) * step};
          out << format_double(x[0]) << ',' << format_double(x[1]) << ','
              << format_double(normal_rate(model, x)) << ','
              << format_double(kappa_normal(rf_rho, x[0], x[1])) << '\n';
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    static const char* kinds[] = {"config", "data", "degenerate", "internal"};
    err << json{{"error", kinds[static_cast<int>(e.kind())]}, {"message", e.what()}}.dump()
        << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return exit_code(ErrorKind::kInternal);
  }
  return exit_code(ErrorKind::kInternal);
}

}  // namespace ldptail
