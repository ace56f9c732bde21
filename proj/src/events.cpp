#include "ldptail/events.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ldptail/error.hpp"
#include "ldptail/special_fn.hpp"

namespace ldptail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t common_dimension(const std::vector<Event>& children, const char* what) {
  if (children.empty()) throw ConfigError(std::string(what) + " needs at least one child");
  std::size_t dim = 0;
  for (const Event& child : children) {
    const std::size_t d = child.dimension();
    if (d == 0) continue;
    if (dim != 0 && d != dim) {
      throw ConfigError(std::string(what) + ": children of dimensions " + std::to_string(dim) +
                        " and " + std::to_string(d));
    }
    dim = d;
  }
  return dim;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double ratio = std::log(hi / lo);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> path_samples(PathKind kind, const PathSearch& search) {
  if (kind == PathKind::kScale) {
    return log_spaced(search.l_min, search.l_max, search.monotonicity_samples);
  }
  std::vector<double> out{0.0};
  const auto rest = log_spaced(search.l_min, search.l_max, search.monotonicity_samples - 1);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<double> grid_points(PathKind kind, const PathSearch& search) {
  if (kind == PathKind::kScale) return log_spaced(search.l_min, search.l_max, search.fallback_grid);
  std::vector<double> out{0.0};
  const auto rest = log_spaced(search.l_min, search.l_max, search.fallback_grid - 1);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// Evaluates membership of Q(path(y, l)) for one point.
class PathProbe {
 public:
  PathProbe(const Event& event, const MarginMap& q_map, PathKind kind)
      : event_(event), q_map_(q_map), kind_(kind) {}

  bool operator()(std::span<const double> y, double l, std::vector<double>& scratch) const {
    scratch.resize(y.size());
    if (kind_ == PathKind::kScale) {
      for (std::size_t j = 0; j < y.size(); ++j) scratch[j] = y[j] / l;
    } else {
      for (std::size_t j = 0; j < y.size(); ++j) scratch[j] = y[j] + l;
    }
    q_map_.apply(scratch, scratch);
    return event_.contains(scratch);
  }

 private:
  const Event& event_;
  const MarginMap& q_map_;
  PathKind kind_;
};

// Bracket index from sampled membership, or nullopt when not monotone.
// Scale path: index of the last sample inside (-1 if none); membership must be
// true...true false...false. Shift path: index of the first sample inside
// (samples.size() if none); membership must be false...false true...true.
std::optional<int> bracket_from_samples(const std::vector<char>& inside, PathKind kind) {
  const int count = static_cast<int>(inside.size());
  if (kind == PathKind::kScale) {
    int last = -1;
    while (last + 1 < count && inside[last + 1]) ++last;
    for (int k = last + 1; k < count; ++k) {
      if (inside[k]) return std::nullopt;
    }
    return last;
  }
  int first = 0;
  while (first < count && !inside[first]) ++first;
  for (int k = first; k < count; ++k) {
    if (!inside[k]) return std::nullopt;
  }
  return first;
}

// Bisection inside a bracket; returns the end of the final interval that is
// inside the event.
double bisect(const PathProbe& probe, std::span<const double> y, double lo, double hi,
              PathKind kind, double tol, std::vector<double>& scratch) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const bool inside = probe(y, mid, scratch);
    // Scale path: lo is inside, hi outside. Shift path: lo outside, hi inside.
    if (inside == (kind == PathKind::kScale)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return kind == PathKind::kScale ? lo : hi;
}

CriticalScaleResult single_point(const Event& event, const MarginMap& q_map,
                                 std::span<const double> y, const PathSearch& search,
                                 PathKind kind) {
  search.validate();
  const PathProbe probe(event, q_map, kind);
  const auto samples = path_samples(kind, search);
  std::vector<double> scratch;
  std::vector<char> inside(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) inside[k] = probe(y, samples[k], scratch);
  const auto bracket = bracket_from_samples(inside, kind);
  if (!bracket) {
    throw MonotonicityError(kind == PathKind::kScale
                                ? "critical_scale: membership is not monotone in the scale"
                                : "critical_shift: membership is not monotone in the shift");
  }
  const int b = *bracket;
  const int last = static_cast<int>(samples.size()) - 1;
  if (kind == PathKind::kScale) {
    if (b < 0) return {0.0, false};
    if (b == last) return {search.l_max, true};
    return {bisect(probe, y, samples[b], samples[b + 1], kind, search.tol, scratch), false};
  }
  if (b == 0) return {0.0, false};
  if (b > last) return {kInf, true};
  return {bisect(probe, y, samples[b - 1], samples[b], kind, search.tol, scratch), false};
}

nlohmann::json to_json_value(const Event& event) {
  return std::visit(
      Overloaded{
          [](const HalfspaceNode& h) {
            return nlohmann::json{
                {"type", "halfspace"},
                {"coeffs", h.coeffs},
                {"threshold", h.threshold},
                {"margin_map",
                 h.margin == MarginTransform::kIdentity ? "identity" : "normal_of_exp"}};
          },
          [](const CornerNode& c) {
            return nlohmann::json{{"type", "corner"}, {"thresholds", c.thresholds}};
          },
          [](const AllOfNode& a) {
            nlohmann::json children = nlohmann::json::array();
            for (const Event& child : a.children) children.push_back(to_json_value(child));
            return nlohmann::json{{"type", "all_of"}, {"children", children}};
          },
          [](const AnyOfNode& a) {
            nlohmann::json children = nlohmann::json::array();
            for (const Event& child : a.children) children.push_back(to_json_value(child));
            return nlohmann::json{{"type", "any_of"}, {"children", children}};
          },
          [](const CustomNode&) -> nlohmann::json {
            throw ConfigError("custom events have no JSON representation");
          },
      },
      event.node());
}

std::vector<double> real_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ConfigError(std::string("event JSON: missing array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("event JSON: non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

Event from_json_value(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("event JSON: expected an object with a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "halfspace") {
    if (!j.contains("threshold") || !j.at("threshold").is_number()) {
      throw ConfigError("event JSON: halfspace needs a numeric 'threshold'");
    }
    MarginTransform margin = MarginTransform::kIdentity;
    if (j.contains("margin_map")) {
      const std::string name = j.at("margin_map").get<std::string>();
      if (name == "normal_of_exp") {
        margin = MarginTransform::kNormalOfExp;
      } else if (name != "identity") {
        throw ConfigError("event JSON: unknown margin_map '" + name + "'");
      }
    }
    return Event::halfspace(real_array(j, "coeffs"), j.at("threshold").get<double>(), margin);
  }
  if (type == "corner") return Event::corner(real_array(j, "thresholds"));
  if (type == "all_of" || type == "any_of") {
    if (!j.contains("children") || !j.at("children").is_array()) {
      throw ConfigError("event JSON: '" + type + "' needs a 'children' array");
    }
    std::vector<Event> children;
    for (const auto& child : j.at("children")) children.push_back(from_json_value(child));
    return type == "all_of" ? Event::all_of(std::move(children))
                            : Event::any_of(std::move(children));
  }
  throw ConfigError("event JSON: unknown type '" + type + "'");
}

}  // namespace

Event::Event(Node node) : node_(std::move(node)) {}

Event Event::halfspace(std::vector<double> coeffs, double threshold, MarginTransform margin) {
  if (coeffs.empty()) throw ConfigError("halfspace needs at least one coefficient");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw ConfigError("halfspace coefficients must be finite");
  }
  if (std::isnan(threshold)) throw ConfigError("halfspace threshold is NaN");
  const std::size_t dim = coeffs.size();
  Event e(HalfspaceNode{std::move(coeffs), threshold, margin});
  e.dimension_ = dim;
  return e;
}

Event Event::corner(std::vector<double> thresholds) {
  if (thresholds.empty()) throw ConfigError("corner needs at least one threshold");
  for (double t : thresholds) {
    if (std::isnan(t)) throw ConfigError("corner threshold is NaN");
  }
  const std::size_t dim = thresholds.size();
  Event e(CornerNode{std::move(thresholds)});
  e.dimension_ = dim;
  return e;
}

Event Event::all_of(std::vector<Event> children) {
  const std::size_t dim = common_dimension(children, "all_of");
  Event e(AllOfNode{std::move(children)});
  e.dimension_ = dim;
  return e;
}

Event Event::any_of(std::vector<Event> children) {
  const std::size_t dim = common_dimension(children, "any_of");
  Event e(AnyOfNode{std::move(children)});
  e.dimension_ = dim;
  return e;
}

Event Event::custom(std::function<bool(std::span<const double>)> predicate,
                    std::size_t dimension) {
  if (!predicate) throw ConfigError("custom event needs a predicate");
  Event e(CustomNode{std::move(predicate), dimension});
  e.dimension_ = dimension;
  return e;
}

bool Event::contains(std::span<const double> point) const {
  if (dimension_ != 0 && point.size() != dimension_) {
    throw ConfigError("event of dimension " + std::to_string(dimension_) +
                      " evaluated at a point of dimension " + std::to_string(point.size()));
  }
  return evaluate(point);
}

bool Event::evaluate(std::span<const double> point) const {
  return std::visit(
      Overloaded{
          [&](const HalfspaceNode& h) {
            double sum = 0.0;
            for (std::size_t j = 0; j < h.coeffs.size(); ++j) {
              if (h.coeffs[j] == 0.0) continue;
              const double x = h.margin == MarginTransform::kIdentity ? point[j]
                                                                       : normal_of_exp(point[j]);
              sum += h.coeffs[j] * x;
            }
            return sum > h.threshold;
          },
          [&](const CornerNode& c) {
            for (std::size_t j = 0; j < c.thresholds.size(); ++j) {
              if (!(point[j] > c.thresholds[j])) return false;
            }
            return true;
          },
          [&](const AllOfNode& a) {
            return std::all_of(a.children.begin(), a.children.end(),
                               [&](const Event& child) { return child.evaluate(point); });
          },
          [&](const AnyOfNode& a) {
            return std::any_of(a.children.begin(), a.children.end(),
                               [&](const Event& child) { return child.evaluate(point); });
          },
          [&](const CustomNode& c) { return c.predicate(point); },
      },
      node_);
}

Event event_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("event JSON: ") + e.what());
  }
  try {
    return from_json_value(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("event JSON: ") + e.what());
  }
}

std::string event_to_json(const Event& event) { return to_json_value(event).dump(); }

void PathSearch::validate() const {
  if (!(l_min > 0.0 && l_max > l_min)) throw ConfigError("path search needs 0 < l_min < l_max");
  if (!(tol > 0.0)) throw ConfigError("path search tolerance must be positive");
  if (monotonicity_samples < 3) throw ConfigError("path search needs at least 3 samples");
  if (fallback_grid < 3) throw ConfigError("path search grid needs at least 3 points");
}

CriticalScaleResult critical_scale(const Event& event, const MarginMap& q_map,
                                   std::span<const double> yhat_point, const PathSearch& search) {
  return single_point(event, q_map, yhat_point, search, PathKind::kScale);
}

CriticalScaleResult critical_shift(const Event& event, const MarginMap& q_map,
                                   std::span<const double> yhat_point, const PathSearch& search) {
  return single_point(event, q_map, yhat_point, search, PathKind::kShift);
}

CriticalScales::CriticalScales(const PointMatrix& points, Event event, MarginMap q_map,
                               PathKind kind, PathSearch search)
    : points_(&points),
      event_(std::move(event)),
      q_map_(std::move(q_map)),
      kind_(kind),
      search_(search) {
  search_.validate();
  if (event_.dimension() != 0 && points.cols() != event_.dimension()) {
    throw ConfigError("event of dimension " + std::to_string(event_.dimension()) +
                      " applied to points of dimension " + std::to_string(points.cols()));
  }
  samples_ = path_samples(kind_, search_);
  const PathProbe probe(event_, q_map_, kind_);
  bracket_.assign(points.rows(), 0);
  refined_.assign(points.rows(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> scratch;
  std::vector<char> inside(samples_.size());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto y = points.row(i);
    for (std::size_t k = 0; k < samples_.size(); ++k) inside[k] = probe(y, samples_[k], scratch);
    const auto b = bracket_from_samples(inside, kind_);
    if (!b) {
      monotone_ = false;
      break;
    }
    bracket_[i] = *b;
  }
}

bool CriticalScales::member(std::size_t i, double l, std::vector<double>& scratch) const {
  return PathProbe(event_, q_map_, kind_)(points_->row(i), l, scratch);
}

double CriticalScales::refine(std::size_t i) {
  if (!std::isnan(refined_[i])) return refined_[i];
  const int b = bracket_[i];
  const int last = static_cast<int>(samples_.size()) - 1;
  const PathProbe probe(event_, q_map_, kind_);
  std::vector<double> scratch;
  double value = 0.0;
  if (kind_ == PathKind::kScale) {
    if (b < 0) {
      value = 0.0;
    } else if (b == last) {
      value = search_.l_max;
    } else {
      value = bisect(probe, points_->row(i), samples_[b], samples_[b + 1], kind_, search_.tol,
                     scratch);
    }
  } else {
    if (b == 0) {
      value = 0.0;
    } else if (b > last) {
      value = kInf;
    } else {
      value = bisect(probe, points_->row(i), samples_[b - 1], samples_[b], kind_, search_.tol,
                     scratch);
    }
  }
  refined_[i] = value;
  return value;
}

std::vector<double> CriticalScales::values() {
  if (!monotone_) {
    throw MonotonicityError("critical values requested for a non-monotone path");
  }
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = refine(i);
  return out;
}

std::size_t CriticalScales::count_at(double l) const {
  std::vector<double> scratch;
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i) count += member(i, l, scratch) ? 1 : 0;
  return count;
}

CountThreshold CriticalScales::threshold_for_count(std::size_t c) {
  if (c == 0) throw ConfigError("threshold_for_count: required count must be positive");
  if (!monotone_) return grid_threshold(c);

  const int last = static_cast<int>(samples_.size()) - 1;
  // Brackets run over -1..last (scale) or 0..last+1 (shift); shift by one.
  std::vector<std::size_t> per_bracket(samples_.size() + 2, 0);
  for (int b : bracket_) ++per_bracket[static_cast<std::size_t>(b + 1)];

  if (kind_ == PathKind::kScale) {
    std::size_t above = 0;
    for (int b = last; b >= 0; --b) {
      const std::size_t here = per_bracket[static_cast<std::size_t>(b + 1)];
      if (above + here >= c) {
        if (b == last) return {search_.l_max, true, false};
        std::vector<double> candidates;
        for (std::size_t i = 0; i < size(); ++i) {
          if (bracket_[i] == b) candidates.push_back(refine(i));
        }
        const std::size_t rank = c - above - 1;
        std::nth_element(candidates.begin(), candidates.begin() + static_cast<long>(rank),
                         candidates.end(), std::greater<>());
        return {candidates[rank], false, false};
      }
      above += here;
    }
    return {0.0, false, false};
  }

  std::size_t below = 0;
  for (int b = 0; b <= last; ++b) {
    const std::size_t here = per_bracket[static_cast<std::size_t>(b + 1)];
    if (below + here >= c) {
      if (b == 0) return {0.0, false, false};
      std::vector<double> candidates;
      for (std::size_t i = 0; i < size(); ++i) {
        if (bracket_[i] == b) candidates.push_back(refine(i));
      }
      const std::size_t rank = c - below - 1;
      std::nth_element(candidates.begin(), candidates.begin() + static_cast<long>(rank),
                       candidates.end());
      return {candidates[rank], false, false};
    }
    below += here;
  }
  return {kInf, true, false};
}

CountThreshold CriticalScales::grid_threshold(std::size_t c) const {
  const auto grid = grid_points(kind_, search_);
  auto enough = [&](double l) { return count_at(l) >= c; };
  const std::size_t g = grid.size();
  if (kind_ == PathKind::kScale) {
    std::size_t j = g;
    for (std::size_t k = g; k-- > 0;) {
      if (enough(grid[k])) {
        j = k;
        break;
      }
    }
    if (j == g) return {0.0, false, true};
    if (j == g - 1) return {search_.l_max, true, true};
    double lo = grid[j];
    double hi = grid[j + 1];
    while (hi - lo > search_.tol) {
      const double mid = 0.5 * (lo + hi);
      (enough(mid) ? lo : hi) = mid;
    }
    return {lo, false, true};
  }
  std::size_t j = g;
  for (std::size_t k = 0; k < g; ++k) {
    if (enough(grid[k])) {
      j = k;
      break;
    }
  }
  if (j == g) return {kInf, true, true};
  if (j == 0) return {0.0, false, true};
  double lo = grid[j - 1];
  double hi = grid[j];
  while (hi - lo > search_.tol) {
    const double mid = 0.5 * (lo + hi);
    (enough(mid) ? hi : lo) = mid;
  }
  return {hi, false, true};
}

}  // namespace ldptail
