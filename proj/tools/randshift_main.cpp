#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "randshift/errors.hpp"
#include "randshift/io.hpp"
#include "randshift/models.hpp"
#include "randshift/schlather_test.hpp"
#include "randshift/shift_test.hpp"
#include "randshift/study.hpp"

namespace {

using namespace randshift;

struct TestOptions {
  std::string points_path;
  std::string window_spec;
  std::vector<std::string> grid_paths;
  std::string correction = "variance";
  std::string statistic = "kendall";
  std::string mark_type = "auto";
  int n_shifts = 999;
  double shift_radius = 0.0;  // 0 = library default
  int n_sims = 99;            // pm only
  int min_points = 5;
  std::uint64_t seed = 0;
  std::string out_path;
  bool verbose = false;
};

Window window_or_bbox(const TestOptions& options, const std::string& points_path,
                      MarkType mark_type, MarkedPointPattern** out_pattern,
                      std::optional<MarkedPointPattern>& storage) {
  const std::optional<Window> window = parse_window_spec(options.window_spec);
  if (window) {
    storage.emplace(parse_points(points_path, *window, mark_type));
  } else {
    std::cerr << "warning: bounding-box window in use; area-dependent corrections "
                 "see an underestimated window\n";
    storage.emplace(parse_points_bbox(points_path, mark_type));
  }
  *out_pattern = &*storage;
  return storage->window();
}

MarkType parse_mark_type(const std::string& name) {
  if (name == "auto") return MarkType::automatic;
  if (name == "none") return MarkType::none;
  if (name == "numeric") return MarkType::numeric;
  if (name == "categorical") return MarkType::categorical;
  throw DataError("unknown mark type: " + name);
}

Correction parse_correction(const std::string& name) {
  if (name == "torus") return Correction::torus;
  if (name == "variance") return Correction::variance;
  throw DataError("unknown correction: " + name);
}

StatisticKind parse_statistic(const std::string& name) {
  if (name == "mean") return StatisticKind::mean_at_points;
  if (name == "cov") return StatisticKind::covariance;
  if (name == "pearson") return StatisticKind::pearson;
  if (name == "kendall") return StatisticKind::kendall;
  throw DataError("unknown statistic: " + name);
}

void emit(const nlohmann::ordered_json& json, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << json.dump(2) << '\n';
  } else {
    write_json(json, out_path);
  }
}

TestConfig make_config(const TestOptions& options, StatisticKind statistic) {
  TestConfig config;
  config.n_shifts = options.n_shifts;
  config.correction = parse_correction(options.correction);
  config.statistic = statistic;
  config.min_points = options.min_points;
  config.seed = options.seed;
  if (options.shift_radius > 0.0) {
    config.shift = ShiftDistribution::disc(options.shift_radius);
  }
  return config;
}

std::vector<CovariateField> load_fields(const TestOptions& options, const Window& window) {
  std::vector<CovariateField> fields;
  fields.reserve(options.grid_paths.size());
  for (const std::string& path : options.grid_paths) {
    fields.push_back(grid_to_field(parse_grid(path), window));
  }
  return fields;
}

int run_test_pc(const TestOptions& options) {
  std::optional<MarkedPointPattern> storage;
  MarkedPointPattern* pattern = nullptr;
  const Window window =
      window_or_bbox(options, options.points_path, parse_mark_type(options.mark_type),
                     &pattern, storage);
  const std::vector<CovariateField> fields = load_fields(options, window);
  if (fields.empty()) throw DataError("test pc needs at least one --grid");

  if (fields.size() == 1) {
    const TestResult result =
        run_shift_test(*pattern, fields[0], make_config(options, StatisticKind::mean_at_points));
    emit(result_to_json(result, "pc", options.verbose), options.out_path);
  } else {
    const TestConfig config = make_config(options, StatisticKind::multicovariate_means);
    const EnvelopeResult result = run_multicovariate_test(*pattern, fields, config);
    emit(envelope_result_to_json(result, "pc", config, options.verbose), options.out_path);
  }
  return 0;
}

int run_test_pmc(const TestOptions& options) {
  std::optional<MarkedPointPattern> storage;
  MarkedPointPattern* pattern = nullptr;
  const Window window =
      window_or_bbox(options, options.points_path, parse_mark_type(options.mark_type),
                     &pattern, storage);
  const std::vector<CovariateField> fields = load_fields(options, window);
  if (fields.empty()) throw DataError("test pmc needs at least one --grid");

  if (pattern->has_categorical_marks()) {
    const TestConfig config = make_config(options, StatisticKind::multitype_mean_diffs);
    const EnvelopeResult result = multitype_pmc_test(*pattern, fields, config);
    emit(envelope_result_to_json(result, "pmc", config, options.verbose), options.out_path);
    return 0;
  }
  if (!pattern->has_numeric_marks()) {
    throw DataError("test pmc needs a mark column");
  }
  if (fields.size() != 1) {
    throw DataError("test pmc with numeric marks takes exactly one --grid "
                    "(test covariates separately and use 'combine')");
  }
  const StatisticKind statistic = parse_statistic(options.statistic);
  if (statistic == StatisticKind::mean_at_points) {
    throw DataError("statistic 'mean' belongs to the pc test");
  }
  const TestResult result = run_shift_test(*pattern, fields[0], make_config(options, statistic));
  emit(result_to_json(result, "pmc", options.verbose), options.out_path);
  return 0;
}

int run_test_pm(const TestOptions& options) {
  std::optional<MarkedPointPattern> storage;
  MarkedPointPattern* pattern = nullptr;
  window_or_bbox(options, options.points_path, parse_mark_type(options.mark_type), &pattern,
                 storage);
  if (!pattern->has_numeric_marks()) throw DataError("test pm needs numeric marks");
  SchlatherConfig config;
  config.n_sims = options.n_sims;
  config.seed = options.seed;
  const TestResult result = schlather_test(*pattern, config);
  emit(result_to_json(result, "pm", options.verbose), options.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric random shift tests for spatial point patterns"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file with one 'key = value' per line");
  app.get_config_formatter_base()->valueSeparator('=');

  // ---- test ----------------------------------------------------------
  CLI::App* test = app.add_subcommand("test", "Run an independence test on data files");
  test->require_subcommand(1);
  test->fallthrough();
  TestOptions options;
  auto add_common = [&options](CLI::App* cmd, bool wants_grid, bool wants_shifts) {
    cmd->add_option("--points", options.points_path, "Point pattern CSV (x,y[,mark])")
        ->required();
    cmd->add_option("--window", options.window_spec,
                    "Window: \"x0,x1,y0,y1\", \"@polygon.csv\" or \"bbox\"")
        ->required();
    if (wants_grid) {
      cmd->add_option("--grid", options.grid_paths, "Covariate ASCII grid (repeatable)")
          ->required();
    }
    if (wants_shifts) {
      cmd->add_option("--correction", options.correction, "torus | variance")
          ->check(CLI::IsMember({"torus", "variance"}));
      cmd->add_option("--nshifts", options.n_shifts, "Number of random shifts");
      cmd->add_option("--shift-radius", options.shift_radius,
                      "Disc radius for shift vectors (default: half the shorter side)");
      cmd->add_option("--nmin", options.min_points, "Minimum retained points per replicate");
    }
    cmd->add_option("--mark-type", options.mark_type, "auto | none | numeric | categorical")
        ->check(CLI::IsMember({"auto", "none", "numeric", "categorical"}));
    cmd->add_option("--seed", options.seed, "Master seed");
    cmd->add_option("--out", options.out_path, "Result JSON path (default: stdout)");
    cmd->add_flag("--verbose", options.verbose, "Include replicate arrays in the result");
  };
  CLI::App* test_pc = test->add_subcommand("pc", "Points vs covariate(s)");
  test_pc->fallthrough();
  add_common(test_pc, true, true);
  CLI::App* test_pmc = test->add_subcommand("pmc", "Marks vs covariate(s)");
  test_pmc->fallthrough();
  add_common(test_pmc, true, true);
  test_pmc->add_option("--stat", options.statistic, "cov | pearson | kendall")
      ->check(CLI::IsMember({"cov", "pearson", "kendall"}));
  CLI::App* test_pm = test->add_subcommand("pm", "Points vs marks (simulation test)");
  test_pm->fallthrough();
  add_common(test_pm, false, false);
  test_pm->add_option("--nsims", options.n_sims, "Number of Gaussian simulations");

  // ---- simulate ------------------------------------------------------
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic scene");
  CLI::App* simulate_model = simulate->add_subcommand("model", "Simulate one of M1..M12");
  simulate->fallthrough();
  simulate_model->fallthrough();
  std::string model_name;
  double alpha = 0.0;
  std::uint64_t sim_seed = 0;
  std::string out_points, out_grid, out_meta;
  simulate_model->add_option("id", model_name, "Model id (M1..M12)")->required();
  simulate_model->add_option("--alpha", alpha, "Dependence parameter for M9..M12");
  simulate_model->add_option("--seed", sim_seed, "Seed");
  simulate_model->add_option("--out-points", out_points, "Points CSV path")->required();
  simulate_model->add_option("--out-grid", out_grid, "Covariate grid path")->required();
  simulate_model->add_option("--out-meta", out_meta, "Scene metadata JSON path");

  // ---- study ---------------------------------------------------------
  CLI::App* study = app.add_subcommand("study", "Run a batch simulation study");
  study->fallthrough();
  std::string study_kind;
  StudyConfig study_config;
  bool full_scale = false;
  std::string study_out;
  std::string tests_csv, alphas_csv, scales_csv;
  study->add_option("kind", study_kind, "overall | preferential | marking | variance-order")
      ->required();
  study->add_option("--reps", study_config.n_replications, "Replications per cell");
  study->add_option("--nshifts", study_config.n_shifts, "Shifts per test");
  study->add_option("--level", study_config.level, "Significance level");
  study->add_option("--tests", tests_csv, "Comma-separated roster of test ids");
  study->add_option("--alphas", alphas_csv, "Comma-separated alpha grid");
  study->add_option("--scales", scales_csv, "Comma-separated correlation scales");
  study->add_option("--kind-variance", study_config.variance_kind,
                    "variance-order flavor: pc | pmc-equal | pmc-unequal");
  study->add_option("--seed", study_config.seed, "Master seed");
  study->add_option("--workers", study_config.workers, "Worker threads")
      ->envname("RANDSHIFT_WORKERS");
  study->add_option("--out", study_out, "Output/cache directory");
  study->add_flag("--full", full_scale, "Reference scale (5000 reps, 999 shifts)");

  // ---- combine -------------------------------------------------------
  CLI::App* combine = app.add_subcommand("combine", "Combine p-values across tests");
  combine->fallthrough();
  bool use_bonferroni = false;
  std::vector<double> p_values;
  combine->add_flag("--bonferroni", use_bonferroni, "Bonferroni combination");
  combine->add_option("p", p_values, "p-values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 1;
  }

  try {
    if (test_pc->parsed()) return run_test_pc(options);
    if (test_pmc->parsed()) return run_test_pmc(options);
    if (test_pm->parsed()) return run_test_pm(options);

    if (simulate_model->parsed()) {
      const GeneratedScene scene =
          generate_model({parse_model_id(model_name), alpha, sim_seed});
      write_points(scene.pattern, out_points);
      write_grid(scene.covariate, out_grid);
      if (!out_meta.empty()) {
        nlohmann::ordered_json meta;
        meta["model"] = model_name;
        meta["alpha"] = alpha;
        meta["seed"] = sim_seed;
        meta["n_points"] = scene.pattern.size();
        meta["dependence"] = {{"points_marks", scene.truth.points_marks},
                              {"marks_covariate", scene.truth.marks_covariate},
                              {"points_covariate", scene.truth.points_covariate}};
        write_json(meta, out_meta);
      }
      return 0;
    }

    if (study->parsed()) {
      study_config.kind = parse_study_kind(study_kind);
      auto split_doubles = [](const std::string& csv) {
        std::vector<double> out;
        std::stringstream ss(csv);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        return out;
      };
      auto split_strings = [](const std::string& csv) {
        std::vector<std::string> out;
        std::stringstream ss(csv);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
      };
      if (!tests_csv.empty()) study_config.tests = split_strings(tests_csv);
      if (!alphas_csv.empty()) study_config.alphas = split_doubles(alphas_csv);
      if (!scales_csv.empty()) study_config.scales = split_doubles(scales_csv);
      if (full_scale) {
        if (study->count("--reps") == 0) study_config.n_replications = 5000;
        if (study->count("--nshifts") == 0) study_config.n_shifts = 999;
      }
      const std::filesystem::path out_dir =
          study_out.empty() ? std::filesystem::path("study-" + study_kind)
                            : std::filesystem::path(study_out);
      const StudyOutput output = run_study(study_config, out_dir);
      for (const RejectionTable& table : output.tables) {
        std::cout << (out_dir / (table.name + ".csv")).string() << '\n';
      }
      if (output.curve) std::cout << (out_dir / "curve.csv").string() << '\n';
      return 0;
    }

    if (combine->parsed()) {
      if (!use_bonferroni) throw DataError("combine requires --bonferroni");
      std::printf("%.17g\n", bonferroni_combine(p_values));
      return 0;
    }
  } catch (const DataError& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 3;
  }
  std::cerr << "error[usage]: no subcommand\n";
  return 1;
}
