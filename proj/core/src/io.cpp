#include "randshift/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "randshift/errors.hpp"

namespace randshift {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

// Splits one CSV record; double quotes delimit fields, "" escapes a quote.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_number,
                                   std::vector<bool>* quoted_out = nullptr) {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  std::string current;
  bool in_quotes = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      quoted.push_back(was_quoted);
      current.clear();
      was_quoted = false;
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (in_quotes) {
    throw DataError("parse-error at line " + std::to_string(line_number) +
                    ": unterminated quote");
  }
  fields.push_back(current);
  quoted.push_back(was_quoted);
  if (quoted_out) *quoted_out = quoted;
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct RawPoints {
  std::vector<Point> points;
  bool has_marks = false;
  std::vector<std::string> mark_tokens;
  std::vector<bool> mark_quoted;
};

RawPoints read_points_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("parse-error: cannot open " + path.string());
  std::string line;
  std::size_t line_number = 0;

  if (!std::getline(in, line)) throw DataError("parse-error: empty file " + path.string());
  ++line_number;
  const std::vector<std::string> header = split_csv(line, line_number);
  RawPoints raw;
  if (header.size() == 2 && trim(header[0]) == "x" && trim(header[1]) == "y") {
    raw.has_marks = false;
  } else if (header.size() == 3 && trim(header[0]) == "x" && trim(header[1]) == "y" &&
             trim(header[2]) == "mark") {
    raw.has_marks = true;
  } else {
    throw DataError("parse-error at line 1: header must be \"x,y\" or \"x,y,mark\"");
  }

  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    std::vector<bool> quoted;
    const std::vector<std::string> fields = split_csv(line, line_number, &quoted);
    if (fields.size() != (raw.has_marks ? 3u : 2u)) {
      throw DataError("parse-error at line " + std::to_string(line_number) +
                      ": expected " + std::to_string(raw.has_marks ? 3 : 2) + " fields");
    }
    Point p;
    if (!parse_double(trim(fields[0]), p.x) || !parse_double(trim(fields[1]), p.y)) {
      throw DataError("parse-error at line " + std::to_string(line_number) +
                      ": coordinates must be numeric");
    }
    raw.points.push_back(p);
    if (raw.has_marks) {
      raw.mark_tokens.push_back(quoted[2] ? fields[2] : trim(fields[2]));
      raw.mark_quoted.push_back(quoted[2]);
    }
  }
  return raw;
}

Marks build_marks(const RawPoints& raw, MarkType mark_type) {
  if (!raw.has_marks || mark_type == MarkType::none) {
    if (mark_type == MarkType::numeric || mark_type == MarkType::categorical) {
      throw DataError("parse-error: file has no mark column");
    }
    return std::monostate{};
  }

  std::vector<double> numeric(raw.mark_tokens.size());
  bool all_numeric = true;
  bool any_quoted = false;
  for (std::size_t i = 0; i < raw.mark_tokens.size(); ++i) {
    any_quoted = any_quoted || raw.mark_quoted[i];
    if (!parse_double(raw.mark_tokens[i], numeric[i])) all_numeric = false;
  }

  const bool want_categorical =
      mark_type == MarkType::categorical ||
      (mark_type == MarkType::automatic && (!all_numeric || any_quoted));
  if (!want_categorical) {
    if (!all_numeric) throw DataError("parse-error: non-numeric mark value");
    return NumericMarks{std::move(numeric)};
  }

  if (all_numeric && !any_quoted) {
    // Integer levels must form a contiguous 1..M set.
    CategoricalMarks cm;
    int max_level = 0;
    for (double v : numeric) {
      if (v != std::floor(v) || v < 1.0 || v > 1e6) {
        throw DataError("validation-error: categorical integer levels must be in 1..M");
      }
      max_level = std::max(max_level, static_cast<int>(v));
    }
    cm.level_count = max_level;
    std::vector<bool> seen(static_cast<std::size_t>(max_level), false);
    for (double v : numeric) {
      cm.levels.push_back(static_cast<int>(v));
      seen[static_cast<std::size_t>(v) - 1] = true;
    }
    for (bool s : seen) {
      if (!s) throw DataError("validation-error: categorical levels must be contiguous 1..M");
    }
    for (int level = 1; level <= max_level; ++level) {
      cm.labels.push_back(std::to_string(level));
    }
    return cm;
  }

  // String labels map to levels 1..M in sorted label order.
  std::map<std::string, int> level_of;
  for (const std::string& token : raw.mark_tokens) level_of[token] = 0;
  CategoricalMarks cm;
  cm.level_count = static_cast<int>(level_of.size());
  int next = 1;
  for (auto& [label, level] : level_of) {
    level = next++;
    cm.labels.push_back(label);
  }
  for (const std::string& token : raw.mark_tokens) cm.levels.push_back(level_of[token]);
  return cm;
}

MarkedPointPattern assemble_pattern(const RawPoints& raw, Marks marks, const Window& window) {
  for (std::size_t i = 0; i < raw.points.size(); ++i) {
    if (!window.contains(raw.points[i])) {
      throw DataError("validation-error: point at data row " + std::to_string(i + 1) +
                      " lies outside the declared window");
    }
  }
  return std::visit(
      [&](auto&& m) -> MarkedPointPattern {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return MarkedPointPattern(raw.points, window);
        } else {
          return MarkedPointPattern(raw.points, std::forward<decltype(m)>(m), window);
        }
      },
      std::move(marks));
}

}  // namespace

MarkedPointPattern parse_points(const std::filesystem::path& path, const Window& window,
                                MarkType mark_type) {
  const RawPoints raw = read_points_file(path);
  return assemble_pattern(raw, build_marks(raw, mark_type), window);
}

MarkedPointPattern parse_points_bbox(const std::filesystem::path& path, MarkType mark_type) {
  const RawPoints raw = read_points_file(path);
  if (raw.points.empty()) throw DataError("validation-error: no points for bbox window");
  double x0 = raw.points[0].x, x1 = x0, y0 = raw.points[0].y, y1 = y0;
  for (const Point& p : raw.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  if (!(x0 < x1) || !(y0 < y1)) {
    throw DataError("validation-error: degenerate bounding box window");
  }
  return assemble_pattern(raw, build_marks(raw, mark_type),
                          Window::rectangle(x0, x1, y0, y1));
}

void write_points(const MarkedPointPattern& pattern, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io-error: cannot write " + path.string());
  const bool numeric = pattern.has_numeric_marks();
  const bool categorical = pattern.has_categorical_marks();
  out << (numeric || categorical ? "x,y,mark\n" : "x,y\n");
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const Point& p = pattern.points()[i];
    out << format_double(p.x) << ',' << format_double(p.y);
    if (numeric) {
      out << ',' << format_double(pattern.numeric_marks()[i]);
    } else if (categorical) {
      const CategoricalMarks& cm = pattern.categorical_marks();
      out << ",\"" << cm.labels[static_cast<std::size_t>(cm.levels[i] - 1)] << '"';
    }
    out << '\n';
  }
}

AsciiGrid parse_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("parse-error: cannot open " + path.string());

  std::map<std::string, double> header;
  long ncols = -1, nrows = -1;
  std::string key;
  // Header keys are matched case-insensitively; NODATA_VALUE is optional.
  while (in >> key) {
    std::string upper;
    for (char c : key) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper != "NCOLS" && upper != "NROWS" && upper != "XLLCORNER" &&
        upper != "YLLCORNER" && upper != "CELLSIZE" && upper != "NODATA_VALUE") {
      // First data token: push it back by storing and breaking.
      double first;
      if (!parse_double(key, first)) {
        throw DataError("parse-error: unexpected grid header key " + key);
      }
      header["__first"] = first;
      break;
    }
    double value;
    if (!(in >> value)) throw DataError("parse-error: missing value for header " + key);
    header[upper] = value;
  }
  for (const char* required : {"NCOLS", "NROWS", "XLLCORNER", "YLLCORNER", "CELLSIZE"}) {
    if (!header.count(required)) {
      throw DataError(std::string("parse-error: missing grid header ") + required);
    }
  }
  ncols = static_cast<long>(header["NCOLS"]);
  nrows = static_cast<long>(header["NROWS"]);
  if (ncols < 1 || nrows < 1) throw DataError("parse-error: grid dimensions must be positive");

  AsciiGrid grid;
  grid.geometry.x0 = header["XLLCORNER"];
  grid.geometry.y0 = header["YLLCORNER"];
  grid.geometry.cell_size = header["CELLSIZE"];
  if (!(grid.geometry.cell_size > 0.0)) throw DataError("parse-error: CELLSIZE must be positive");
  grid.geometry.ncols = static_cast<int>(ncols);
  grid.geometry.nrows = static_cast<int>(nrows);
  grid.nodata_value = header.count("NODATA_VALUE") ? header["NODATA_VALUE"] : -9999.0;

  const std::size_t total = static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows);
  grid.values.reserve(total);
  if (header.count("__first")) grid.values.push_back(header["__first"]);
  double v;
  while (grid.values.size() < total && (in >> v)) grid.values.push_back(v);
  if (grid.values.size() != total) {
    throw DataError("parse-error: grid value count mismatch (expected " +
                    std::to_string(total) + ", got " + std::to_string(grid.values.size()) + ")");
  }
  if (in >> v) throw DataError("parse-error: trailing grid values");

  grid.nodata_mask.resize(total, false);
  for (std::size_t i = 0; i < total; ++i) {
    grid.nodata_mask[i] = grid.values[i] == grid.nodata_value;
  }
  return grid;
}

CovariateField grid_to_field(const AsciiGrid& grid, const Window& window) {
  const GridGeometry& g = grid.geometry;
  std::vector<double> values = grid.values;
  std::vector<std::size_t> missing;
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      const std::size_t idx = static_cast<std::size_t>(row) * g.ncols + col;
      if (!grid.nodata_mask[idx]) continue;
      if (window.contains(Point{g.x_center(col), g.y_center(row)})) {
        throw DataError("validation-error: NODATA cell inside the window at column " +
                        std::to_string(col) + ", row " + std::to_string(row));
      }
      missing.push_back(idx);
    }
  }
  // Fill exterior NODATA cells from the nearest valid cell so bilinear
  // interpolation near the window edge stays finite.
  for (std::size_t idx : missing) {
    const int row = static_cast<int>(idx) / g.ncols;
    const int col = static_cast<int>(idx) % g.ncols;
    bool filled = false;
    for (int radius = 1; radius < std::max(g.ncols, g.nrows) && !filled; ++radius) {
      for (int dr = -radius; dr <= radius && !filled; ++dr) {
        for (int dc = -radius; dc <= radius && !filled; ++dc) {
          if (std::max(std::abs(dr), std::abs(dc)) != radius) continue;
          const int rr = row + dr, cc = col + dc;
          if (rr < 0 || rr >= g.nrows || cc < 0 || cc >= g.ncols) continue;
          const std::size_t src = static_cast<std::size_t>(rr) * g.ncols + cc;
          if (!grid.nodata_mask[src]) {
            values[idx] = grid.values[src];
            filled = true;
          }
        }
      }
    }
    if (!filled) throw DataError("validation-error: grid contains no valid cells");
  }
  return CovariateField(g, std::move(values));
}

void write_grid(const CovariateField& field, const std::filesystem::path& path,
                double nodata_value) {
  std::ofstream out(path);
  if (!out) throw DataError("io-error: cannot write " + path.string());
  const GridGeometry& g = field.geometry();
  out << "NCOLS " << g.ncols << "\n";
  out << "NROWS " << g.nrows << "\n";
  out << "XLLCORNER " << format_double(g.x0) << "\n";
  out << "YLLCORNER " << format_double(g.y0) << "\n";
  out << "CELLSIZE " << format_double(g.cell_size) << "\n";
  out << "NODATA_VALUE " << format_double(nodata_value) << "\n";
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      if (col) out << ' ';
      out << format_double(field.value_at(col, row));
    }
    out << '\n';
  }
}

const char* statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::mean_at_points: return "mean";
    case StatisticKind::covariance: return "cov";
    case StatisticKind::pearson: return "pearson";
    case StatisticKind::kendall: return "kendall";
    case StatisticKind::schlather_e: return "schlather-E";
    case StatisticKind::multitype_mean_diffs: return "multitype-mean-diffs";
    case StatisticKind::multicovariate_means: return "multicovariate-means";
  }
  return "unknown";
}

const char* correction_name(Correction correction) {
  switch (correction) {
    case Correction::torus: return "torus";
    case Correction::variance: return "variance";
    case Correction::none: return "none";
  }
  return "unknown";
}

namespace {

nlohmann::ordered_json retained_summary(const std::vector<long>& retained) {
  nlohmann::ordered_json summary;
  if (retained.empty()) return summary;
  long lo = retained[0], hi = retained[0];
  double mean = 0.0;
  for (long r : retained) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    mean += static_cast<double>(r);
  }
  summary["n0"] = retained[0];
  summary["min"] = lo;
  summary["max"] = hi;
  summary["mean"] = mean / static_cast<double>(retained.size());
  return summary;
}

}  // namespace

nlohmann::ordered_json result_to_json(const TestResult& result, const std::string& test_name,
                                      bool include_replicates) {
  nlohmann::ordered_json j;
  j["test"] = test_name;
  j["statistic"] = statistic_name(result.config.statistic);
  j["correction"] = correction_name(result.config.correction);
  j["n_shifts"] = result.config.n_shifts;
  j["seed"] = result.config.seed;
  j["t0"] = result.t0;
  j["p_value"] = result.p_value;
  j["n_retained_summary"] = retained_summary(result.retained);
  if (include_replicates) {
    j["replicates"] = result.replicates;
    if (!result.standardized.empty()) j["standardized"] = result.standardized;
  }
  return j;
}

nlohmann::ordered_json envelope_result_to_json(const EnvelopeResult& result,
                                               const std::string& test_name,
                                               const TestConfig& config,
                                               bool include_replicates) {
  nlohmann::ordered_json j;
  j["test"] = test_name;
  j["statistic"] = statistic_name(config.statistic);
  j["correction"] = correction_name(config.correction);
  j["n_shifts"] = config.n_shifts;
  j["seed"] = config.seed;
  j["t0"] = result.t0;
  j["p_value"] = result.p_value;
  j["n_retained_summary"] = retained_summary(result.retained);
  nlohmann::ordered_json envelope;
  envelope["level"] = result.level;
  envelope["lower"] = result.lower;
  envelope["upper"] = result.upper;
  j["envelope"] = envelope;
  if (include_replicates) {
    j["replicates"] = result.replicates;
    j["erl"] = result.erl;
  }
  return j;
}

void write_json(const nlohmann::ordered_json& value, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io-error: cannot write " + path.string());
  out << value.dump(2) << '\n';
}

std::optional<Window> parse_window_spec(const std::string& spec) {
  if (spec == "bbox") return std::nullopt;
  if (!spec.empty() && spec[0] == '@') {
    const std::filesystem::path vertex_file = spec.substr(1);
    std::ifstream in(vertex_file);
    if (!in) throw DataError("parse-error: cannot open window file " + vertex_file.string());
    std::vector<Point> vertices;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (line_number == 1 && trimmed == "x,y") continue;
      const std::vector<std::string> fields = split_csv(trimmed, line_number);
      Point p;
      if (fields.size() != 2 || !parse_double(trim(fields[0]), p.x) ||
          !parse_double(trim(fields[1]), p.y)) {
        throw DataError("parse-error at line " + std::to_string(line_number) +
                        ": polygon vertex must be \"x,y\"");
      }
      vertices.push_back(p);
    }
    return Window::polygon(std::move(vertices));
  }
  const std::vector<std::string> parts = split_csv(spec, 1);
  if (parts.size() != 4) {
    throw DataError("parse-error: window must be \"bbox\", \"x0,x1,y0,y1\" or \"@file\"");
  }
  double x0, x1, y0, y1;
  if (!parse_double(trim(parts[0]), x0) || !parse_double(trim(parts[1]), x1) ||
      !parse_double(trim(parts[2]), y0) || !parse_double(trim(parts[3]), y1)) {
    throw DataError("parse-error: window coordinates must be numeric");
  }
  return Window::rectangle(x0, x1, y0, y1);
}

}  // namespace randshift
