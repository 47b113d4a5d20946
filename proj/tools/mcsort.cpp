// Command-line entry point: replication, simulation, sweeps, batch solving
// and the HTTP service.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mcsort/credit_rating.hpp"
#include "mcsort/dataset_csv.hpp"
#include "mcsort/error.hpp"
#include "mcsort/inference.hpp"
#include "mcsort/replication.hpp"
#include "mcsort/serialization.hpp"
#include "mcsort/service.hpp"
#include "mcsort/simulation.hpp"

namespace {

using namespace mcsort;

constexpr double kTableTolerance = 2e-4;

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid_input, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_input, path + ": " + e.what());
  }
}

// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::invalid_input, "cannot write " + path);
  fn(out);
}

void print_objective_table(const SelectionResult& selection,
                           const std::vector<credit_rating::ObjectiveRow>& published) {
  fmt::print("  {:<5} {:>8} {:>8} {:>8} {:>8}   {:>9}  {:>9}\n", "alt", "C1", "C2", "C3", "C4",
             "entropy", "max|diff|");
  for (const auto& s : selection.scores) {
    double diff = -1.0;
    for (const auto& [id, values] : published) {
      if (id != s.alternative_id) continue;
      diff = 0.0;
      for (std::size_t h = 0; h < values.size(); ++h) {
        diff = std::max(diff, std::abs(s.info[h] - values[h]));
      }
    }
    fmt::print("  {:<5} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}   {:>9.6f}  {:>9}\n", s.alternative_id,
               s.info[0], s.info[1], s.info[2], s.info[3], s.score,
               diff < 0 ? std::string("-") : fmt::format("{:.1e}", diff));
  }
}

int replicate(const std::string& strategy, bool monotone, std::optional<double> target, int jobs) {
  ReplicationOptions options;
  options.strategy.kind = parse_strategy(strategy);
  options.monotone_mode = monotone;
  options.target_accuracy = target;
  options.jobs = jobs;
  const auto report = replicate_credit_example(options);
  const bool paper_setting =
      !monotone && !target && options.strategy.kind == StrategyKind::ES;

  bool table_ok = true;
  for (std::size_t t = 0; t < report.steps.size(); ++t) {
    const auto& step = report.steps[t];
    fmt::print("t={} asked {} -> C{}\n", t, step.question.alternative_id, step.answer);
    if (t > 1 || !uses_info_vectors(options.strategy.kind)) continue;
    const auto published =
        t == 0 ? credit_rating::published_first_round() : credit_rating::published_second_round();
    print_objective_table(step.question.selection, published);
    if (!monotone) {
      const double dev = max_deviation(step.question.selection, published);
      fmt::print("  largest deviation from the published table: {:.2e} (tolerance {:.0e})\n", dev,
                 kTableTolerance);
      if (t == 0 && !(dev <= kTableTolerance)) table_ok = false;
    }
  }

  std::vector<std::string> sequence;
  for (const auto& s : report.steps) sequence.push_back(s.question.alternative_id);
  fmt::print("\nsequence: {}\n", fmt::join(sequence, ", "));

  const auto published =
      monotone ? credit_rating::published_monotone_thresholds() : credit_rating::published_thresholds();
  if (const auto& normalized = report.final.normalized) {
    fmt::print("normalized thresholds: {:.4f}\n", fmt::join(normalized->normalized_thresholds, " "));
    fmt::print("published thresholds:  {:.4f}\n", fmt::join(published, " "));
    for (std::size_t j = 0; j < normalized->normalized_utilities.size(); ++j) {
      fmt::print("  u{} (normalized): {:.4f}\n", j + 1,
                 fmt::join(normalized->normalized_utilities[j], " "));
    }
  } else {
    fmt::print("every marginal utility function is flat; no normalized model\n");
    fmt::print("published thresholds:  {:.4f}\n", fmt::join(published, " "));
  }
  fmt::print("max-margin objective J* = {:.10f}, epsilon = {:.6f}, slope change = {:.6f}\n",
             report.max_margin_objective, report.final.fitted.max_margin.epsilon,
             report.final.fitted.refined.slope_change);
  std::vector<std::string> final_row;
  for (const auto& a : report.final.assignments) {
    final_row.push_back(fmt::format("{}->C{}", a.alternative_id, a.category));
  }
  fmt::print("non-reference assignments: {}\n", fmt::join(final_row, " "));
  fmt::print("accuracy over all firms: {}/20 = {:.2f}", report.correct, *report.final.accuracy_all);
  if (!monotone) fmt::print(" (published {}/20)", credit_rating::kPublishedCorrect);
  fmt::print("\n");

  if (paper_setting && !table_ok) {
    fmt::print(stderr, "first-round objectives deviate from the published table\n");
    return 2;
  }
  return 0;
}

int simulate(GenerationConfig cfg, const std::string& out) {
  const auto data = generate_dataset(cfg);
  with_output(out, [&](std::ostream& os) { write_dataset_csv({data.matrix, data.labels}, os); });
  fmt::print(stderr, "{} alternatives, {} criteria, {} categories, {} noisy labels\n",
             data.matrix.alternatives(), data.matrix.criteria(), cfg.q, data.flipped.size());
  return 0;
}

int solve(const std::string& input, std::optional<int> categories, int subintervals, double alpha,
          bool monotone, const std::string& out) {
  auto dataset = read_dataset_csv(input);
  require(dataset.labels.has_value(), input + " has no label column");
  auto matrix = std::make_shared<const DecisionMatrix>(std::move(dataset.matrix));
  PreferenceInstance instance;
  instance.matrix = matrix;
  instance.scales = build_scales(*matrix, std::vector<int>(matrix->criteria(), subintervals));
  for (std::size_t i = 0; i < matrix->alternatives(); ++i) {
    instance.examples.push_back({matrix->id(i), (*dataset.labels)[i]});
  }
  instance.categories = categories.value_or(dataset.max_label());
  instance.alpha = alpha;
  instance.monotone_mode = monotone;
  const auto fitted = fit_and_refine(instance);
  auto j = fitted_to_json(fitted, *matrix);
  j["examples"] = examples_to_json(instance.examples);
  with_output(out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  fmt::print(stderr, "J* = {}, total slack = {}\n", fitted.max_margin.objective,
             fitted.refined.inconsistency);
  return 0;
}

int inconsistency(const GenerationConfig& cfg, int reps, int jobs, const std::string& out) {
  const auto result = inconsistency_study(cfg, reps, jobs);
  if (!out.empty()) {
    with_output(out, [&](std::ostream& os) {
      os << "repetition,ici\n";
      for (std::size_t k = 0; k < result.values.size(); ++k) {
        os << fmt::format("{},{}\n", k, result.values[k]);
      }
    });
  }
  fmt::print("n={} m={} q={} eta={} repetitions={} mean ICI={}\n", cfg.n, cfg.m, cfg.q, cfg.eta,
             reps, result.mean);
  return 0;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental preference elicitation for multi-criteria sorting"};
  app.require_subcommand(1);

  std::string strategy = "ES";
  bool monotone = false;
  std::optional<double> target;
  int jobs = 1;
  auto* rep = app.add_subcommand("replicate-example", "Run the bundled credit-rating example");
  rep->add_option("--strategy", strategy, "Question selection strategy");
  rep->add_flag("--monotone", monotone, "Restrict marginal utilities to be non-decreasing");
  rep->add_option("--target-acc", target, "Stop on accuracy over non-reference firms instead of T=8")
      ->check(CLI::Range(0.0, 1.0));
  rep->add_option("--jobs", jobs, "Parallel LP solves per selection")->check(CLI::PositiveNumber);

  GenerationConfig gen;
  std::string out;
  std::string config_path;
  auto add_generation = [&](CLI::App* sub) {
    sub->add_option("--n", gen.n, "Number of alternatives");
    sub->add_option("--m", gen.m, "Number of criteria");
    sub->add_option("--q", gen.q, "Number of categories");
    sub->add_option("--s", gen.subinterval_counts, "Subintervals per criterion (default 4 each)");
    sub->add_option("--eta", gen.eta, "Proportion of relabeled alternatives");
    sub->add_option("--seed", gen.seed, "Random seed");
    sub->add_option("--config", config_path, "JSON file with generation parameters");
  };
  auto* sim = app.add_subcommand("simulate", "Generate an artificial labeled dataset as CSV");
  add_generation(sim);
  sim->add_option("--out", out, "Output CSV (default stdout)");

  double alpha = 0.1;
  std::optional<int> T;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> strategies;
  auto* sw = app.add_subcommand("sweep", "Run an experiment grid and write CSV records");
  sw->add_option("--config", config_path, "Sweep JSON: {base, grid}")->required();
  sw->add_option("--out", out, "Output CSV (default stdout)");
  sw->add_option("--jobs", jobs, "Parallel run cells")->check(CLI::PositiveNumber);
  auto* sw_alpha = sw->add_option("--alpha", alpha, "Override alpha at every grid point");
  sw->add_option("--T", T, "Override the question budget");
  sw->add_option("--seed", seed, "Override the master seed");
  sw->add_option("--strategy", strategies, "Override the strategy list");

  std::string input;
  std::optional<int> categories;
  int subintervals = 4;
  auto* sol = app.add_subcommand("solve", "Fit a model on every labeled row of a CSV");
  sol->add_option("--input", input, "Labeled dataset CSV")->required();
  sol->add_option("--q", categories, "Number of categories (default: largest label)");
  sol->add_option("--s", subintervals, "Subintervals per criterion")->check(CLI::PositiveNumber);
  sol->add_option("--alpha", alpha, "Margin weight");
  sol->add_flag("--monotone", monotone, "Restrict marginal utilities to be non-decreasing");
  sol->add_option("--out", out, "Output model JSON (default stdout)");

  int reps = 50;
  auto* inc = app.add_subcommand("inconsistency", "Minimal inconsistency of generated datasets");
  add_generation(inc);
  inc->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
  inc->add_option("--jobs", jobs, "Parallel repetitions")->check(CLI::PositiveNumber);
  inc->add_option("--out", out, "Per-repetition CSV");

  std::string listen = env_or("MCSORT_LISTEN", "127.0.0.1:8080");
  std::string data_dir = env_or("MCSORT_DATA_DIR", "mcsort-data");
  bool async = false;
  auto* srv = app.add_subcommand("serve", "Start the HTTP service");
  srv->add_option("--listen", listen, "host:port (env MCSORT_LISTEN)");
  srv->add_option("--data-dir", data_dir, "Persistence directory (env MCSORT_DATA_DIR)");
  srv->add_option("--jobs", jobs, "Parallel LP solves per selection")->check(CLI::PositiveNumber);
  srv->add_flag("--async", async, "Select questions in the background; clients poll");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rep) return replicate(strategy, monotone, target, jobs);
    if (*sim || *inc) {
      if (!config_path.empty()) {
        const auto j = read_json_file(config_path);
        gen.n = j.value("n", gen.n);
        gen.m = j.value("m", gen.m);
        gen.q = j.value("q", gen.q);
        gen.eta = j.value("eta", gen.eta);
        gen.seed = j.value("seed", gen.seed);
        gen.subinterval_counts = j.value("subinterval_counts", gen.subinterval_counts);
      }
      if (*sim) return simulate(gen, out);
      return inconsistency(gen, reps, jobs, out);
    }
    if (*sw) {
      auto grid = grid_from_json(read_json_file(config_path));
      for (auto& point : grid) {
        if (sw_alpha->count() > 0) point.config.alpha = alpha;
        if (T) point.config.T = *T;
        if (seed) point.config.seed = *seed;
        if (!strategies.empty()) {
          point.config.strategies.clear();
          for (const auto& s : strategies) point.config.strategies.push_back({parse_strategy(s)});
        }
        point.config.validate();
      }
      with_output(out, [&](std::ostream& os) { sweep(grid, os, jobs); });
      return 0;
    }
    if (*sol) return solve(input, categories, subintervals, alpha, monotone, out);
    if (*srv) {
      const auto colon = listen.rfind(':');
      require(colon != std::string::npos, "--listen expects host:port");
      const int port = std::stoi(listen.substr(colon + 1));
      return serve({data_dir, jobs, async}, listen.substr(0, colon), port);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error ({}): {}\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
