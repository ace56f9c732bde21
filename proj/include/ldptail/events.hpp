#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ldptail/point_matrix.hpp"
#include "ldptail/transform.hpp"

namespace ldptail {

// Per-coordinate map applied before a halfspace test.
enum class MarginTransform {
  kIdentity,
  kNormalOfExp,  // x -> Phi^{-1}(1 - exp(-x))
};

class Event;

struct HalfspaceNode {
  std::vector<double> coeffs;
  double threshold = 0.0;
  MarginTransform margin = MarginTransform::kIdentity;
};

// {x : x_j > a_j for all j}; the boundary is excluded.
struct CornerNode {
  std::vector<double> thresholds;
};

struct AllOfNode {
  std::vector<Event> children;
};

struct AnyOfNode {
  std::vector<Event> children;
};

struct CustomNode {
  std::function<bool(std::span<const double>)> predicate;
  std::size_t dimension = 0;  // 0: any dimension
};

// Membership predicate over data-space points, built from halfspaces, corners,
// boolean combinators and opaque callables.
class Event {
 public:
  using Node = std::variant<HalfspaceNode, CornerNode, AllOfNode, AnyOfNode, CustomNode>;

  static Event halfspace(std::vector<double> coeffs, double threshold,
                         MarginTransform margin = MarginTransform::kIdentity);
  static Event corner(std::vector<double> thresholds);
  static Event all_of(std::vector<Event> children);
  static Event any_of(std::vector<Event> children);
  static Event custom(std::function<bool(std::span<const double>)> predicate,
                      std::size_t dimension = 0);

  // Throws ConfigError when the point dimension does not match.
  bool contains(std::span<const double> point) const;

  // 0 when the event accepts any dimension (custom nodes only).
  std::size_t dimension() const noexcept { return dimension_; }
  const Node& node() const noexcept { return node_; }

 private:
  explicit Event(Node node);
  bool evaluate(std::span<const double> point) const;

  Node node_;
  std::size_t dimension_ = 0;
};

// JSON schema:
//   {"type":"halfspace","coeffs":[...],"threshold":c,"margin_map":"identity"|"normal_of_exp"}
//   {"type":"corner","thresholds":[...]}
//   {"type":"all_of"|"any_of","children":[...]}
// Custom predicates have no JSON form. Throws ConfigError on malformed input.
Event event_from_json(std::string_view text);
std::string event_to_json(const Event& event);

// Search range and resolution for critical scales (multiplicative path
// Q(y / l)) and critical shifts (additive path Q(y + l 1)).
struct PathSearch {
  double l_min = 1e-3;
  double l_max = 1e3;
  double tol = 1e-6;
  std::size_t monotonicity_samples = 16;
  std::size_t fallback_grid = 2048;

  void validate() const;
};

struct CriticalScaleResult {
  double value = 0.0;
  bool saturated = false;  // membership held at the end of the search range
};

// Largest l in [l_min, l_max] with Q(y / l) in the event, to tolerance tol; 0
// when the point is outside at l_min. Throws MonotonicityError when sampled
// membership is not nonincreasing in l.
CriticalScaleResult critical_scale(const Event& event, const MarginMap& q_map,
                                   std::span<const double> yhat_point,
                                   const PathSearch& search = {});

// Smallest s in [0, l_max] with Q(y + s 1) in the event; +infinity when never
// inside. Throws MonotonicityError when sampled membership is not
// nondecreasing in s.
CriticalScaleResult critical_shift(const Event& event, const MarginMap& q_map,
                                   std::span<const double> yhat_point,
                                   const PathSearch& search = {});

enum class PathKind { kScale, kShift };

struct CountThreshold {
  double value = 0.0;
  bool saturated = false;      // hit the end of the search range
  bool grid_fallback = false;  // non-monotone membership forced a grid search
};

// Critical values of all points of a pseudo-sample along one path. Points
// are bracketed by the monotonicity samples up front and bisected lazily,
// only where an order statistic of the critical values needs them.
//
// The referenced point matrix must outlive this object.
class CriticalScales {
 public:
  CriticalScales(const PointMatrix& points, Event event, MarginMap q_map, PathKind kind,
                 PathSearch search = {});

  PathKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return points_->rows(); }
  bool monotonicity_verified() const noexcept { return monotone_; }

  // Scale path: sup{l > 0 : count(l) >= c}, 0 when empty (the c-th largest
  // critical scale). Shift path: inf{s >= 0 : count(s) >= c}, +infinity when
  // empty (the c-th smallest critical shift).
  CountThreshold threshold_for_count(std::size_t c);

  // Number of points inside the event at path parameter l.
  std::size_t count_at(double l) const;

  // Fully refined per-point critical values. Throws MonotonicityError when
  // monotonicity was not verified.
  std::vector<double> values();

 private:
  bool member(std::size_t i, double l, std::vector<double>& scratch) const;
  double refine(std::size_t i);
  CountThreshold grid_threshold(std::size_t c) const;

  const PointMatrix* points_;
  Event event_;
  MarginMap q_map_;
  PathKind kind_;
  PathSearch search_;
  std::vector<double> samples_;
  std::vector<int> bracket_;
  std::vector<double> refined_;
  bool monotone_ = true;
};

}  // namespace ldptail
