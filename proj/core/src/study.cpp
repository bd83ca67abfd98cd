#include "randshift/study.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "json.hpp"
#include "randshift/errors.hpp"
#include "randshift/io.hpp"
#include "randshift/point_process.hpp"
#include "randshift/rng.hpp"
#include "randshift/schlather_test.hpp"
#include "randshift/shift_test.hpp"
#include "randshift/statistics.hpp"
#include "randshift/variogram.hpp"

namespace randshift {

namespace {

using nlohmann::ordered_json;

void parallel_for(int n_items, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, n_items));
  if (workers == 1) {
    for (int i = 0; i < n_items; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items || stop.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool is_degenerate_shift(const DataError& e) {
  return std::string_view(e.what()).starts_with("degenerate-shift");
}

struct ParsedTestId {
  enum class Family { pc_shift, pmc_shift, pm_schlather, pc_schlather } family;
  Correction correction = Correction::variance;
  StatisticKind statistic = StatisticKind::mean_at_points;
};

ParsedTestId parse_test_id(const std::string& id) {
  if (id == "pm-schlather") return {ParsedTestId::Family::pm_schlather, Correction::none, StatisticKind::schlather_e};
  if (id == "pc-schlather") return {ParsedTestId::Family::pc_schlather, Correction::none, StatisticKind::schlather_e};
  if (id == "pc-torus") return {ParsedTestId::Family::pc_shift, Correction::torus, StatisticKind::mean_at_points};
  if (id == "pc-variance") return {ParsedTestId::Family::pc_shift, Correction::variance, StatisticKind::mean_at_points};
  const auto shift_variant = [&](const std::string& prefix,
                                 Correction corr) -> std::optional<ParsedTestId> {
    if (!id.starts_with(prefix)) return std::nullopt;
    const std::string stat = id.substr(prefix.size());
    ParsedTestId parsed{ParsedTestId::Family::pmc_shift, corr, StatisticKind::kendall};
    if (stat == "cov") parsed.statistic = StatisticKind::covariance;
    else if (stat == "pearson") parsed.statistic = StatisticKind::pearson;
    else if (stat == "kendall") parsed.statistic = StatisticKind::kendall;
    else return std::nullopt;
    return parsed;
  };
  if (auto p = shift_variant("pmc-torus-", Correction::torus)) return *p;
  if (auto p = shift_variant("pmc-variance-", Correction::variance)) return *p;
  throw DataError("unknown-test-id: " + id);
}

double run_test_on_scene(const GeneratedScene& scene, const ParsedTestId& test,
                         int n_shifts, std::uint64_t seed) {
  switch (test.family) {
    case ParsedTestId::Family::pm_schlather: {
      SchlatherConfig config;
      config.seed = seed;
      return schlather_test(scene.pattern, config).p_value;
    }
    case ParsedTestId::Family::pc_schlather: {
      std::vector<double> at_points;
      at_points.reserve(scene.pattern.size());
      for (const Point& p : scene.pattern.points()) {
        at_points.push_back(scene.covariate.eval(p));
      }
      SchlatherConfig config;
      config.seed = seed;
      return schlather_test(scene.pattern, at_points, config).p_value;
    }
    case ParsedTestId::Family::pc_shift:
    case ParsedTestId::Family::pmc_shift: {
      TestConfig config;
      config.n_shifts = n_shifts;
      config.correction = test.correction;
      config.statistic = test.statistic;
      config.seed = seed;
      return run_shift_test(scene.pattern, scene.covariate, config).p_value;
    }
  }
  throw DataError("unknown-test-id");
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string format_compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("io-error: cannot write " + tmp.string());
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

ordered_json cell_to_json(const CellResult& cell) {
  ordered_json j;
  j["rate"] = cell.rate;
  j["ci_low"] = cell.ci_low;
  j["ci_high"] = cell.ci_high;
  j["rejections"] = cell.rejections;
  j["completed"] = cell.completed;
  j["aborts"] = cell.aborts;
  j["cell_seed"] = cell.cell_seed;
  return j;
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult cell;
  cell.rate = j.at("rate").get<double>();
  cell.ci_low = j.at("ci_low").get<double>();
  cell.ci_high = j.at("ci_high").get<double>();
  cell.rejections = j.at("rejections").get<int>();
  cell.completed = j.at("completed").get<int>();
  cell.aborts = j.at("aborts").get<int>();
  cell.cell_seed = j.at("cell_seed").get<std::uint64_t>();
  return cell;
}

std::string alpha_label(double alpha) { return format_fixed(alpha, 1); }

}  // namespace

StudyKind parse_study_kind(const std::string& name) {
  if (name == "overall") return StudyKind::overall;
  if (name == "preferential") return StudyKind::preferential;
  if (name == "marking") return StudyKind::marking;
  if (name == "variance-order") return StudyKind::variance_order;
  throw DataError("unknown-study-kind: " + name);
}

std::string study_kind_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::overall: return "overall";
    case StudyKind::preferential: return "preferential";
    case StudyKind::marking: return "marking";
    case StudyKind::variance_order: return "variance-order";
  }
  return "unknown";
}

std::vector<std::string> default_roster(StudyKind kind) {
  switch (kind) {
    case StudyKind::overall:
      return {"pm-schlather", "pc-torus", "pc-variance", "pc-schlather",
              "pmc-torus-cov", "pmc-variance-cov", "pmc-torus-pearson",
              "pmc-variance-pearson", "pmc-torus-kendall", "pmc-variance-kendall"};
    case StudyKind::preferential:
    case StudyKind::marking:
      return {"pc-variance", "pmc-torus-cov", "pmc-variance-cov", "pmc-torus-pearson",
              "pmc-variance-pearson", "pmc-torus-kendall", "pmc-variance-kendall"};
    case StudyKind::variance_order:
      return {};
  }
  return {};
}

std::pair<double, double> clopper_pearson(int successes, int trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw DataError("clopper-pearson-invalid-counts");
  }
  const double tail = 0.5 * (1.0 - confidence);
  double lo = 0.0, hi = 1.0;
  if (successes > 0) {
    const boost::math::beta_distribution<double> lower(successes, trials - successes + 1);
    lo = boost::math::quantile(lower, tail);
  }
  if (successes < trials) {
    const boost::math::beta_distribution<double> upper(successes + 1, trials - successes);
    hi = boost::math::quantile(upper, 1.0 - tail);
  }
  return {lo, hi};
}

CellResult rejection_rate(ModelId model, double alpha, const std::string& test_id,
                          int n_reps, int n_shifts, double level, std::uint64_t cell_seed,
                          int workers) {
  if (n_reps < 50) throw DataError("study-replications-too-few (minimum 50)");
  const ParsedTestId test = parse_test_id(test_id);

  enum : char { kKeep = 0, kReject = 1, kAbort = 2 };
  std::vector<char> outcome(static_cast<std::size_t>(n_reps), kKeep);
  parallel_for(n_reps, workers, [&](int rep) {
    const std::uint64_t scene_seed =
        Rng::derive(cell_seed, {static_cast<std::uint64_t>(rep), 1});
    const std::uint64_t test_seed =
        Rng::derive(cell_seed, {static_cast<std::uint64_t>(rep), 2});
    const GeneratedScene scene = generate_model({model, alpha, scene_seed});
    try {
      const double p = run_test_on_scene(scene, test, n_shifts, test_seed);
      outcome[static_cast<std::size_t>(rep)] = p <= level ? kReject : kKeep;
    } catch (const DataError& e) {
      if (!is_degenerate_shift(e)) throw;
      outcome[static_cast<std::size_t>(rep)] = kAbort;
    }
  });

  CellResult cell;
  cell.cell_seed = cell_seed;
  for (char o : outcome) {
    if (o == kAbort) {
      ++cell.aborts;
    } else {
      ++cell.completed;
      if (o == kReject) ++cell.rejections;
    }
  }
  if (cell.completed == 0) throw DataError("study-cell-all-replicates-aborted");
  cell.rate = static_cast<double>(cell.rejections) / static_cast<double>(cell.completed);
  std::tie(cell.ci_low, cell.ci_high) = clopper_pearson(cell.rejections, cell.completed);
  return cell;
}

VarianceCurve variance_order_study(const std::string& kind, std::span<const double> scales,
                                   int n_reps, std::uint64_t seed, int workers) {
  if (kind != "pc" && kind != "pmc-equal" && kind != "pmc-unequal") {
    throw DataError("unknown-variance-order-kind: " + kind);
  }
  if (n_reps < 50) throw DataError("study-replications-too-few (minimum 50)");

  VarianceCurve curve;
  curve.kind = kind;
  constexpr double kIntensity = 100.0;
  for (double scale : scales) {
    for (int step = 1; step <= 8; ++step) {
      const double a = 0.5 * step;
      const std::uint64_t cell_seed =
          Rng::derive(seed, {Rng::hash_label("variance-order"), Rng::hash_label(kind),
                             std::bit_cast<std::uint64_t>(scale),
                             std::bit_cast<std::uint64_t>(a)});
      const Window window = Window::rectangle(0.0, a, 0.0, a);
      // Cell size tied to the correlation scale so that discretization
      // effects are identical across window sizes.
      const GridGeometry geometry =
          GridGeometry::with_cell_size(Rectangle{0.0, a, 0.0, a}, scale / 4.0);

      FieldSpec spherical;
      spherical.correlation = {CorrelationFamily::spherical, scale};
      FieldSpec exponential;
      exponential.correlation = {CorrelationFamily::exponential, scale};

      std::vector<double> statistics(static_cast<std::size_t>(n_reps), 0.0);
      parallel_for(n_reps, workers, [&](int rep) {
        const std::uint64_t field_seed =
            Rng::derive(cell_seed, {static_cast<std::uint64_t>(rep), 1});
        const std::uint64_t point_seed =
            Rng::derive(cell_seed, {static_cast<std::uint64_t>(rep), 2});
        const MarkedPointPattern pattern = simulate_poisson(kIntensity, window, point_seed);
        double value = 0.0;
        if (kind == "pc") {
          const CovariateField field = simulate_grf(spherical, geometry, field_seed);
          value = stat_mean_at_points(pattern, field);
        } else {
          auto [mark_field, covariate] =
              kind == "pmc-equal"
                  ? simulate_grf_pair(spherical, geometry, field_seed)
                  : std::pair{simulate_grf(spherical, geometry, field_seed),
                              simulate_grf(exponential, geometry,
                                           Rng::derive(cell_seed,
                                                       {static_cast<std::uint64_t>(rep), 3}))};
          std::vector<double> marks, values;
          marks.reserve(pattern.size());
          values.reserve(pattern.size());
          for (const Point& p : pattern.points()) {
            marks.push_back(mark_field.eval(p));
            values.push_back(covariate.eval(p));
          }
          value = stat_kendall(marks, values);
        }
        statistics[static_cast<std::size_t>(rep)] = value;
      });

      const double mean = std::accumulate(statistics.begin(), statistics.end(), 0.0) /
                          static_cast<double>(n_reps);
      double ss = 0.0;
      for (double t : statistics) ss += (t - mean) * (t - mean);
      const double sample_variance = ss / static_cast<double>(n_reps - 1);
      curve.points.push_back({a, scale, a * a * sample_variance});
    }
  }
  return curve;
}

std::uint64_t study_config_hash(const StudyConfig& config) {
  std::ostringstream canon;
  canon << study_kind_name(config.kind) << '|' << config.n_replications << '|'
        << config.n_shifts << '|' << format_compact(config.level) << '|';
  for (const std::string& t : config.tests) canon << t << ',';
  canon << '|';
  for (double a : config.alphas) canon << format_compact(a) << ',';
  canon << '|' << config.seed << '|' << config.variance_kind << '|';
  for (double s : config.scales) canon << format_compact(s) << ',';
  return Rng::hash_label(canon.str());
}

namespace {

struct CellTask {
  std::string table;
  std::string column;
  std::string test;
  ModelId model;
  double alpha;
};

std::string cell_file_name(const CellTask& task) {
  return task.table + "__" + task.column + "__" + task.test + ".json";
}

void write_table_csv(const RejectionTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "test";
  for (const std::string& col : table.column_names) out << ',' << col;
  out << '\n';
  for (std::size_t r = 0; r < table.row_names.size(); ++r) {
    out << table.row_names[r];
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
      const CellResult& cell = table.cells[r][c];
      out << ",\"" << format_fixed(cell.rate, 6) << ',' << format_fixed(cell.ci_low, 6)
          << ',' << format_fixed(cell.ci_high, 6) << '"';
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

void write_curve_csv(const VarianceCurve& curve, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "a,scale,value\n";
  for (const VarianceCurvePoint& p : curve.points) {
    out << format_compact(p.window_side) << ',' << format_compact(p.scale) << ','
        << format_compact(p.value) << '\n';
  }
  atomic_write(path, out.str());
}

}  // namespace

StudyOutput run_study(const StudyConfig& config, const std::filesystem::path& out_dir) {
  StudyConfig effective = config;
  if (effective.tests.empty()) effective.tests = default_roster(effective.kind);
  if (effective.alphas.empty()) effective.alphas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  for (double a : effective.alphas) {
    if (a < 0.0 || a > 1.0) throw DataError("study-alpha-out-of-range");
  }
  if (effective.n_replications < 50) throw DataError("study-replications-too-few (minimum 50)");

  std::filesystem::create_directories(out_dir / "cells");
  const std::uint64_t config_hash = study_config_hash(effective);

  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json existing = nlohmann::json::parse(in, nullptr, false);
    if (existing.is_discarded() || !existing.contains("config_hash") ||
        existing["config_hash"].get<std::uint64_t>() != config_hash) {
      throw DataError("stale-cache: " + out_dir.string() +
                      " was produced by a different study configuration");
    }
  }

  StudyOutput output;
  ordered_json manifest;
  manifest["config_hash"] = config_hash;
  ordered_json config_json;
  config_json["kind"] = study_kind_name(effective.kind);
  config_json["n_replications"] = effective.n_replications;
  config_json["n_shifts"] = effective.n_shifts;
  config_json["level"] = effective.level;
  config_json["tests"] = effective.tests;
  config_json["alphas"] = effective.alphas;
  config_json["seed"] = effective.seed;
  config_json["variance_kind"] = effective.variance_kind;
  config_json["scales"] = effective.scales;
  manifest["config"] = config_json;

  ordered_json timings;
  if (effective.kind == StudyKind::variance_order) {
    const auto start = std::chrono::steady_clock::now();
    output.curve = variance_order_study(effective.variance_kind, effective.scales,
                                        effective.n_replications, effective.seed,
                                        effective.workers);
    write_curve_csv(*output.curve, out_dir / "curve.csv");
    timings["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["curve"] = "curve.csv";
    atomic_write(manifest_path, manifest.dump(2) + "\n");
    atomic_write(out_dir / "timings.json", timings.dump(2) + "\n");
    return output;
  }

  // Rejection-rate study: lay out tables and their cells.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, ModelId>>>> layout;
  if (effective.kind == StudyKind::overall) {
    std::vector<std::pair<std::string, ModelId>> columns;
    for (int m = 1; m <= 8; ++m) {
      columns.emplace_back(model_id_name(static_cast<ModelId>(m)), static_cast<ModelId>(m));
    }
    layout.emplace_back("overall", std::move(columns));
  } else {
    const std::vector<ModelId> models = effective.kind == StudyKind::preferential
                                            ? std::vector<ModelId>{ModelId::M9, ModelId::M10}
                                            : std::vector<ModelId>{ModelId::M11, ModelId::M12};
    for (ModelId m : models) {
      std::vector<std::pair<std::string, ModelId>> columns;
      for (double a : effective.alphas) columns.emplace_back(alpha_label(a), m);
      layout.emplace_back(model_id_name(m), std::move(columns));
    }
  }

  ordered_json cells_json = ordered_json::array();
  double total_seconds = 0.0;
  for (const auto& [table_name, columns] : layout) {
    RejectionTable table;
    table.name = table_name;
    table.row_names = effective.tests;
    for (const auto& [label, model] : columns) {
      (void)model;
      table.column_names.push_back(label);
    }
    table.cells.assign(table.row_names.size(),
                       std::vector<CellResult>(table.column_names.size()));

    for (std::size_t r = 0; r < table.row_names.size(); ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const bool alpha_column = effective.kind != StudyKind::overall;
        const double alpha = alpha_column ? effective.alphas[c] : 0.0;
        CellTask task{table_name, table.column_names[c], table.row_names[r],
                      columns[c].second, alpha};
        const std::filesystem::path cell_path = out_dir / "cells" / cell_file_name(task);

        CellResult cell;
        double cell_seconds = 0.0;
        if (std::filesystem::exists(cell_path)) {
          std::ifstream in(cell_path);
          cell = cell_from_json(nlohmann::json::parse(in));
        } else {
          const std::uint64_t cell_seed = Rng::derive(
              effective.seed,
              {Rng::hash_label(model_id_name(task.model)), std::bit_cast<std::uint64_t>(alpha),
               Rng::hash_label(task.test)});
          const auto start = std::chrono::steady_clock::now();
          cell = rejection_rate(task.model, alpha, task.test, effective.n_replications,
                                effective.n_shifts, effective.level, cell_seed,
                                effective.workers);
          cell_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          atomic_write(cell_path, cell_to_json(cell).dump(2) + "\n");
        }
        total_seconds += cell_seconds;
        if (cell.aborts > 0 &&
            cell.aborts * 100 > cell.aborts + cell.completed) {
          std::fprintf(stderr, "study warning: cell %s/%s/%s aborted %d replicates\n",
                       task.table.c_str(), task.column.c_str(), task.test.c_str(),
                       cell.aborts);
        }
        table.cells[r][c] = cell;

        ordered_json cj;
        cj["table"] = task.table;
        cj["column"] = task.column;
        cj["test"] = task.test;
        cj["cell_seed"] = cell.cell_seed;
        cj["rejections"] = cell.rejections;
        cj["completed"] = cell.completed;
        cj["aborts"] = cell.aborts;
        cells_json.push_back(cj);
        timings[cell_file_name(task)] = cell_seconds;
      }
    }
    write_table_csv(table, out_dir / (table_name + ".csv"));
    output.tables.push_back(std::move(table));
  }
  manifest["cells"] = cells_json;
  timings["total_seconds"] = total_seconds;
  atomic_write(manifest_path, manifest.dump(2) + "\n");
  atomic_write(out_dir / "timings.json", timings.dump(2) + "\n");
  return output;
}

}  // namespace randshift
