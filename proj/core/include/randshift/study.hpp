#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randshift/models.hpp"

namespace randshift {

enum class StudyKind { overall, preferential, marking, variance_order };

StudyKind parse_study_kind(const std::string& name);
std::string study_kind_name(StudyKind kind);

/// Batch study configuration. Desk-scale defaults (500 replications, 199
/// shifts) trade the reference 5000 x 999 protocol for laptop runtimes.
struct StudyConfig {
  StudyKind kind = StudyKind::overall;
  int n_replications = 500;
  int n_shifts = 199;
  double level = 0.05;
  std::vector<std::string> tests;   // roster ids; empty = default per kind
  std::vector<double> alphas;       // preferential/marking; empty = 0.0..1.0 step 0.2
  std::uint64_t seed = 0;
  int workers = 1;
  // variance-order only
  std::string variance_kind = "pc";  // pc | pmc-equal | pmc-unequal
  std::vector<double> scales = {0.05, 0.10, 0.20};
};

std::vector<std::string> default_roster(StudyKind kind);

struct CellResult {
  double rate = 0.0;
  double ci_low = 0.0;   // exact binomial 95%
  double ci_high = 0.0;
  int rejections = 0;
  int completed = 0;     // replicates entering the denominator
  int aborts = 0;        // degenerate-shift replicates, excluded
  std::uint64_t cell_seed = 0;
};

struct RejectionTable {
  std::string name;                       // e.g. "overall", "M9"
  std::vector<std::string> row_names;     // test ids
  std::vector<std::string> column_names;  // model names or alpha labels
  std::vector<std::vector<CellResult>> cells;  // [row][column]
};

struct VarianceCurvePoint {
  double window_side = 0.0;
  double scale = 0.0;
  double value = 0.0;  // |W| * sample variance of the statistic
};

struct VarianceCurve {
  std::string kind;  // pc | pmc-equal | pmc-unequal
  std::vector<VarianceCurvePoint> points;
};

struct StudyOutput {
  std::vector<RejectionTable> tables;
  std::optional<VarianceCurve> curve;
};

/// Exact binomial (Clopper-Pearson) confidence interval.
std::pair<double, double> clopper_pearson(int successes, int trials,
                                          double confidence = 0.95);

/// Fraction of n_reps independent scene-generate-then-test cycles with
/// p <= level, with the exact binomial 95% CI. Replicates aborting with a
/// degenerate-shift error are counted and excluded from the denominator.
CellResult rejection_rate(ModelId model, double alpha, const std::string& test_id,
                          int n_reps, int n_shifts, double level, std::uint64_t cell_seed,
                          int workers = 1);

/// |W| * sample variance of the P-C mean statistic (kind "pc") or the
/// PM-C Kendall statistic ("pmc-equal"/"pmc-unequal") over windows
/// [0,a]^2, a = 0.5..4 step 0.5, for each correlation scale.
VarianceCurve variance_order_study(const std::string& kind, std::span<const double> scales,
                                   int n_reps, std::uint64_t seed, int workers = 1);

/// Runs the configured study with per-cell derived seeds, caching finished
/// cells under out_dir (atomically written, keyed by a config hash) so an
/// interrupted study resumes. Emits CSV tables or curves plus a JSON
/// manifest; per-run timings go to a separate file so everything else is
/// byte-reproducible.
StudyOutput run_study(const StudyConfig& config, const std::filesystem::path& out_dir);

std::uint64_t study_config_hash(const StudyConfig& config);

}  // namespace randshift
