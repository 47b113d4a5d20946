#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcsort/core_model.hpp"
#include "mcsort/strategy.hpp"

namespace mcsort {

struct GenerationConfig {
  int n = 100;
  int m = 4;
  int q = 3;
  std::vector<int> subinterval_counts;  // empty: 4 per criterion
  double eta = 0.05;
  std::uint64_t seed = 1;

  std::vector<int> resolved_subintervals() const;
  void validate() const;
};

struct GeneratedDataset {
  DecisionMatrix matrix;
  std::vector<int> labels;        // after noise
  std::vector<int> clean_labels;  // straight from the generating model
  UtilityModel truth;
  std::vector<std::size_t> flipped;  // alternatives whose label was changed
};

/// Uniform performances on [0,100], uniform breakpoint utilities, thresholds
/// at the h/q quantiles of the resulting utilities, then round(n*eta) labels
/// moved to a different category. Noise sets are nested across eta for a
/// fixed seed.
GeneratedDataset generate_dataset(const GenerationConfig& cfg);

/// Round half up, as used for every bracketed count.
long round_half_up(double x);

/// Independent stream seed for a position in the experiment grid.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// round(n*r) alternatives go to training; per-category quotas follow the
/// largest-remainder rule so each category keeps its share within one.
Split stratified_split(const std::vector<int>& labels, int categories, double train_fraction,
                       std::mt19937_64& rng);

/// Saving relative to labeling the whole training set: (TR - LA) / TR.
double cost_saving_rate(int training_size, int labeled);
/// (n1 - aq - round(lr*n1)) / n1.
double cost_saving(int n1, int answered, double initial_fraction);

enum class Criterion { budget, target };

struct ExperimentConfig {
  std::string name = "experiment";
  GenerationConfig generation;
  double train_fraction = 0.6;
  double initial_fraction = 0.2;
  Criterion criterion = Criterion::budget;
  int T = 30;
  int target_fits = 10;
  double alpha = 0.1;
  std::vector<Strategy> strategies;
  int datasets = 10;
  int runs = 10;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool monotone_mode = false;
  bool record_time = false;

  void validate() const;
};

struct RunRecord {
  std::string strategy;
  int dataset = 0;
  int run = 0;
  /// Test-set accuracy after each answered question, starting at t = 0.
  std::vector<double> accuracy;
  int answered = 0;
  std::optional<double> target;
  std::optional<double> cost_saving;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

/// One elicitation run on one dataset, split and strategy.
RunRecord run_cell(const ExperimentConfig& cfg, int dataset, int run, const Strategy& strategy);

std::vector<RunRecord> run_budget_experiment(const ExperimentConfig& cfg);
std::vector<RunRecord> run_target_experiment(const ExperimentConfig& cfg);

/// Mean test accuracy of models fitted on the full training set over
/// `cfg.target_fits` random splits.
double target_accuracy(const ExperimentConfig& cfg, const GeneratedDataset& data, int dataset,
                       int run);

struct InconsistencyResult {
  double mean = 0.0;
  std::vector<double> values;
};

/// Generates `repetitions` datasets, uses every label as an example and
/// records the minimal total slack. Repetition k uses the same stream for any
/// eta, so studies at different noise levels are paired.
InconsistencyResult inconsistency_study(const GenerationConfig& cfg, int repetitions, int jobs = 1);

struct GridPoint {
  std::string label;
  ExperimentConfig config;
};

inline constexpr const char* kSweepHeader =
    "experiment,param_point,strategy,dataset,run,iteration,metric,value,seed,wall_ms";

/// Runs every point and writes CSV rows ordered by (point, strategy, dataset,
/// run, iteration). Completed rows are written before an error propagates.
void sweep(const std::vector<GridPoint>& grid, std::ostream& out, int jobs = 1);

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

/// {"base": {...}, "grid": [{overrides}, ...]}. Each point's label lists its
/// overrides as key=value pairs joined by ';'.
std::vector<GridPoint> grid_from_json(const nlohmann::json& j);

}  // namespace mcsort
