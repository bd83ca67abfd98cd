#include "randshift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "randshift/errors.hpp"

namespace randshift {

namespace {

constexpr double kEdgeTolerance = 1e-12;

double shoelace_area(const std::vector<Point>& vs) {
  double twice = 0.0;
  const std::size_t n = vs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vs[i];
    const Point& b = vs[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(twice);
}

double point_segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::hypot(dx, dy);
}

// Floored modulo: result in [0, period) for any finite x.
double wrap(double x, double period) {
  const double r = std::fmod(x, period);
  return r < 0.0 ? r + period : r;
}

}  // namespace

Window Window::rectangle(double x0, double x1, double y0, double y1) {
  if (!(x0 < x1) || !(y0 < y1)) {
    throw DataError("invalid-window: rectangle requires x0 < x1 and y0 < y1");
  }
  Window w;
  w.shape_ = Rectangle{x0, x1, y0, y1};
  return w;
}

Window Window::polygon(std::vector<Point> vertices) {
  if (vertices.size() < 3) {
    throw DataError("invalid-window: polygon needs at least 3 vertices");
  }
  // A closing vertex equal to the first is accepted and dropped.
  if (vertices.size() > 3) {
    const Point& first = vertices.front();
    const Point& last = vertices.back();
    if (first.x == last.x && first.y == last.y) vertices.pop_back();
  }
  if (shoelace_area(vertices) <= 0.0) {
    throw DataError("invalid-window: degenerate polygon (area 0)");
  }
  Window w;
  w.shape_ = Polygon{std::move(vertices)};
  return w;
}

double Window::area() const {
  if (is_rectangle()) {
    const Rectangle& r = as_rectangle();
    return (r.x1 - r.x0) * (r.y1 - r.y0);
  }
  return shoelace_area(as_polygon().vertices);
}

bool Window::contains(Point u) const {
  if (is_rectangle()) {
    const Rectangle& r = as_rectangle();
    return u.x >= r.x0 && u.x <= r.x1 && u.y >= r.y0 && u.y <= r.y1;
  }
  const std::vector<Point>& vs = as_polygon().vertices;
  const std::size_t n = vs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(u, vs[i], vs[(i + 1) % n]) <= kEdgeTolerance) {
      return true;  // boundary counts as inside
    }
  }
  // Ray casting toward +x.
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vs[i];
    const Point& b = vs[(i + 1) % n];
    if ((a.y > u.y) != (b.y > u.y)) {
      const double x_cross = a.x + (u.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (u.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Rectangle Window::bounding_box() const {
  if (is_rectangle()) return as_rectangle();
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0, y1 = -x0;
  double y0 = x0;
  for (const Point& v : as_polygon().vertices) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  return Rectangle{x0, x1, y0, y1};
}

double Window::width() const {
  const Rectangle b = bounding_box();
  return b.x1 - b.x0;
}

double Window::height() const {
  const Rectangle b = bounding_box();
  return b.y1 - b.y0;
}

MarkedPointPattern::MarkedPointPattern(std::vector<Point> points, Window window)
    : points_(std::move(points)), marks_(std::monostate{}), window_(std::move(window)) {
  validate();
}

MarkedPointPattern::MarkedPointPattern(std::vector<Point> points, NumericMarks marks,
                                       Window window)
    : points_(std::move(points)), marks_(std::move(marks)), window_(std::move(window)) {
  validate();
}

MarkedPointPattern::MarkedPointPattern(std::vector<Point> points, CategoricalMarks marks,
                                       Window window)
    : points_(std::move(points)), marks_(std::move(marks)), window_(std::move(window)) {
  validate();
}

void MarkedPointPattern::validate() const {
  for (const Point& p : points_) {
    if (!window_.contains(p)) {
      throw DataError("pattern-point-outside-window");
    }
  }
  if (const auto* nm = std::get_if<NumericMarks>(&marks_)) {
    if (nm->values.size() != points_.size()) {
      throw DataError("marks-length-mismatch");
    }
  } else if (const auto* cm = std::get_if<CategoricalMarks>(&marks_)) {
    if (cm->levels.size() != points_.size()) {
      throw DataError("marks-length-mismatch");
    }
    if (cm->level_count < 1) throw DataError("categorical-marks-empty-level-set");
    // Levels live in 1..level_count; a level may be empty (e.g. after a
    // crop shift) and it is up to the tests to reject such patterns.
    for (int lv : cm->levels) {
      if (lv < 1 || lv > cm->level_count) {
        throw DataError("categorical-mark-level-out-of-range");
      }
    }
    if (!cm->labels.empty() &&
        cm->labels.size() != static_cast<std::size_t>(cm->level_count)) {
      throw DataError("categorical-mark-labels-size-mismatch");
    }
  }
}

double area(const Window& window) { return window.area(); }

bool contains(const Window& window, Point u) { return window.contains(u); }

MarkedPointPattern torus_shift(const MarkedPointPattern& pattern, ShiftVector v) {
  if (!pattern.window().is_rectangle()) {
    throw DataError("torus-unsupported: torus shift requires a rectangular window");
  }
  const Rectangle& r = pattern.window().as_rectangle();
  const double w = r.x1 - r.x0;
  const double h = r.y1 - r.y0;
  std::vector<Point> shifted;
  shifted.reserve(pattern.size());
  for (const Point& p : pattern.points()) {
    shifted.push_back(Point{wrap(p.x - r.x0 + v.dx, w) + r.x0,
                            wrap(p.y - r.y0 + v.dy, h) + r.y0});
  }
  return std::visit(
      [&](const auto& marks) -> MarkedPointPattern {
        using T = std::decay_t<decltype(marks)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return MarkedPointPattern(std::move(shifted), pattern.window());
        } else {
          return MarkedPointPattern(std::move(shifted), marks, pattern.window());
        }
      },
      pattern.marks());
}

MarkedPointPattern crop_shift(const MarkedPointPattern& pattern, ShiftVector v) {
  const Window& w = pattern.window();
  std::vector<Point> kept;
  std::vector<std::size_t> kept_idx;
  kept.reserve(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const Point p{pattern.points()[i].x + v.dx, pattern.points()[i].y + v.dy};
    if (w.contains(p)) {
      kept.push_back(p);
      kept_idx.push_back(i);
    }
  }
  return std::visit(
      [&](const auto& marks) -> MarkedPointPattern {
        using T = std::decay_t<decltype(marks)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return MarkedPointPattern(std::move(kept), w);
        } else if constexpr (std::is_same_v<T, NumericMarks>) {
          NumericMarks nm;
          nm.values.reserve(kept_idx.size());
          for (std::size_t i : kept_idx) nm.values.push_back(marks.values[i]);
          return MarkedPointPattern(std::move(kept), std::move(nm), w);
        } else {
          CategoricalMarks cm;
          cm.level_count = marks.level_count;
          cm.labels = marks.labels;
          cm.levels.reserve(kept_idx.size());
          for (std::size_t i : kept_idx) cm.levels.push_back(marks.levels[i]);
          return MarkedPointPattern(std::move(kept), std::move(cm), w);
        }
      },
      pattern.marks());
}

}  // namespace randshift
