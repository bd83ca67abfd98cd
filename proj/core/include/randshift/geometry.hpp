#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace randshift {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ShiftVector {
  double dx = 0.0;
  double dy = 0.0;
};

struct Rectangle {
  double x0, x1, y0, y1;
};

struct Polygon {
  std::vector<Point> vertices;  // ordered, closed implicitly (last->first)
};

/// Compact observation window: axis-aligned rectangle or simple polygon.
/// Boundary points count as inside, so a zero shift is always the identity.
class Window {
 public:
  static Window rectangle(double x0, double x1, double y0, double y1);
  static Window polygon(std::vector<Point> vertices);

  bool is_rectangle() const { return std::holds_alternative<Rectangle>(shape_); }
  const Rectangle& as_rectangle() const { return std::get<Rectangle>(shape_); }
  const Polygon& as_polygon() const { return std::get<Polygon>(shape_); }

  double area() const;
  bool contains(Point u) const;
  Rectangle bounding_box() const;
  double width() const;
  double height() const;

 private:
  std::variant<Rectangle, Polygon> shape_;
};

struct NumericMarks {
  std::vector<double> values;
};

struct CategoricalMarks {
  std::vector<int> levels;          // values in 1..level_count
  int level_count = 0;
  std::vector<std::string> labels;  // size level_count, label of level k at k-1
};

using Marks = std::variant<std::monostate, NumericMarks, CategoricalMarks>;

/// Point locations with optional numeric or categorical marks inside a
/// window. Construction validates containment and mark consistency.
class MarkedPointPattern {
 public:
  MarkedPointPattern(std::vector<Point> points, Window window);
  MarkedPointPattern(std::vector<Point> points, NumericMarks marks, Window window);
  MarkedPointPattern(std::vector<Point> points, CategoricalMarks marks, Window window);

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const Window& window() const { return window_; }

  bool has_numeric_marks() const { return std::holds_alternative<NumericMarks>(marks_); }
  bool has_categorical_marks() const { return std::holds_alternative<CategoricalMarks>(marks_); }
  const std::vector<double>& numeric_marks() const { return std::get<NumericMarks>(marks_).values; }
  const CategoricalMarks& categorical_marks() const { return std::get<CategoricalMarks>(marks_); }
  const Marks& marks() const { return marks_; }

 private:
  void validate() const;

  std::vector<Point> points_;
  Marks marks_;
  Window window_;
};

double area(const Window& window);
bool contains(const Window& window, Point u);

/// Shift on the torus induced by identifying opposite window edges.
/// Rectangular windows only; point count and marks are preserved exactly.
MarkedPointPattern torus_shift(const MarkedPointPattern& pattern, ShiftVector v);

/// Translate by v and drop the points (with their marks) that leave the
/// window. The window itself is unchanged.
MarkedPointPattern crop_shift(const MarkedPointPattern& pattern, ShiftVector v);

}  // namespace randshift
