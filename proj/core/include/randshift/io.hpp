#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "randshift/envelope.hpp"
#include "randshift/geometry.hpp"
#include "randshift/random_field.hpp"
#include "randshift/shift_test.hpp"

namespace randshift {

enum class MarkType { automatic, none, numeric, categorical };

/// CSV point file with header "x,y" or "x,y,mark". Categorical marks may
/// be quoted strings (mapped to levels 1..M in label-sorted order) or
/// contiguous integer levels. Errors carry the offending line number.
MarkedPointPattern parse_points(const std::filesystem::path& path, const Window& window,
                                MarkType mark_type = MarkType::automatic);

/// Bounding-box fallback: the window is the tight bounding box of the
/// points themselves (callers should warn that area-dependent corrections
/// see an underestimated window).
MarkedPointPattern parse_points_bbox(const std::filesystem::path& path,
                                     MarkType mark_type = MarkType::automatic);

void write_points(const MarkedPointPattern& pattern, const std::filesystem::path& path);

struct AsciiGrid {
  GridGeometry geometry;
  std::vector<double> values;      // NODATA cells hold nodata_value
  double nodata_value = -9999.0;
  std::vector<bool> nodata_mask;
};

/// ASCII grid: header lines NCOLS, NROWS, XLLCORNER, YLLCORNER, CELLSIZE,
/// NODATA_VALUE, then NROWS rows north first.
AsciiGrid parse_grid(const std::filesystem::path& path);

/// Validates that no NODATA cell center lies inside the window; NODATA
/// cells outside are filled from the nearest valid cell so interpolation
/// near the window edge stays finite.
CovariateField grid_to_field(const AsciiGrid& grid, const Window& window);

void write_grid(const CovariateField& field, const std::filesystem::path& path,
                double nodata_value = -9999.0);

const char* statistic_name(StatisticKind kind);
const char* correction_name(Correction correction);

/// Result JSON: {test, statistic, correction, n_shifts, seed, t0, p_value,
/// n_retained_summary, replicates?, envelope?}.
nlohmann::ordered_json result_to_json(const TestResult& result, const std::string& test_name,
                                      bool include_replicates);
nlohmann::ordered_json envelope_result_to_json(const EnvelopeResult& result,
                                               const std::string& test_name,
                                               const TestConfig& config,
                                               bool include_replicates);

void write_json(const nlohmann::ordered_json& value, const std::filesystem::path& path);

/// Window flag syntax: "bbox", "x0,x1,y0,y1", or "@vertices.csv" (polygon).
std::optional<Window> parse_window_spec(const std::string& spec);

}  // namespace randshift
