#include "ldptail/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <random>

#include "ldptail/error.hpp"
#include "ldptail/ratefn.hpp"
#include "ldptail/special_fn.hpp"

namespace ldptail {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double open_uniform(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

double check_bivariate(std::span<const double> a, double rho) {
  if (a.size() != 2) throw ConfigError("halfspace probability needs two coefficients");
  if (!(std::fabs(rho) < 1.0)) throw DomainError("correlation must satisfy |rho| < 1");
  const double var = a[0] * a[0] + 2.0 * rho * a[0] * a[1] + a[1] * a[1];
  if (!(var > 1e-300)) throw DegenerateError("halfspace combination has zero variance");
  return std::sqrt(var);
}

}  // namespace

MarginalScale marginal_scale_from_string(const std::string& name) {
  if (name == "normal") return MarginalScale::kNormal;
  if (name == "exponential") return MarginalScale::kExponential;
  if (name == "pareto") return MarginalScale::kPareto;
  throw ConfigError("unknown marginal scale '" + name + "'");
}

std::string to_string(MarginalScale scale) {
  switch (scale) {
    case MarginalScale::kNormal:
      return "normal";
    case MarginalScale::kExponential:
      return "exponential";
    case MarginalScale::kPareto:
      return "pareto";
  }
  return "unknown";
}

SimConfig SimConfig::bivariate(std::size_t n, double rho, MarginalScale scale,
                               std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.m = 2;
  cfg.correlation = {1.0, rho, rho, 1.0};
  cfg.marginal_scale = scale;
  cfg.seed = seed;
  return cfg;
}

void SimConfig::validate() const {
  if (n == 0) throw ConfigError("SimConfig: n must be positive");
  NormalRateModel(m, correlation);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ index);
}

Sample sample_mvn(const SimConfig& cfg) {
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(cfg.m);
  Eigen::MatrixXd v(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) v(i, j) = cfg.correlation[i * m + j];
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(v);
  const Eigen::MatrixXd l = llt.matrixL();
  if (llt.info() != Eigen::Success || l.diagonal().minCoeff() <= 1e-12) {
    throw ConfigError("correlation matrix is not positive definite");
  }

  std::mt19937_64 gen(cfg.seed);
  Sample out;
  out.rows = PointMatrix(cfg.n, cfg.m);
  for (std::size_t j = 0; j < cfg.m; ++j) out.column_names.push_back("x" + std::to_string(j + 1));
  std::vector<double> z(cfg.m);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (auto& zj : z) zj = std_normal_quantile(open_uniform(gen));
    auto row = out.rows.row(i);
    for (Eigen::Index a = 0; a < m; ++a) {
      double u = 0.0;
      for (Eigen::Index b = 0; b <= a; ++b) u += l(a, b) * z[static_cast<std::size_t>(b)];
      switch (cfg.marginal_scale) {
        case MarginalScale::kNormal:
          row[a] = u;
          break;
        case MarginalScale::kExponential:
          row[a] = exp_of_normal(u);
          break;
        case MarginalScale::kPareto:
          row[a] = std::exp(exp_of_normal(u));
          break;
      }
    }
  }
  return out;
}

double halfspace_exact_prob(std::span<const double> a, double c, double rho) {
  return std_normal_sf(c / check_bivariate(a, rho));
}

double halfspace_threshold(std::span<const double> a, double p, double rho) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("halfspace_threshold: p must lie in (0, 1)");
  return check_bivariate(a, rho) * std_normal_upper_quantile(p);
}

double corner_exact_prob(std::span<const double> a, double rho) {
  if (a.size() != 2) throw ConfigError("corner probability needs two thresholds");
  if (!(a[0] >= 0.0 && a[1] >= 0.0)) throw DomainError("corner thresholds must be >= 0");
  return bvn_upper_prob(rho, normal_of_exp(a[0]), normal_of_exp(a[1]));
}

}  // namespace ldptail
