#include "mcsort/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "mcsort/error.hpp"
#include "mcsort/inference.hpp"
#include "mcsort/parallel.hpp"
#include "mcsort/session.hpp"

namespace mcsort {

namespace {

// Stream tags keep the RNG streams of different purposes apart.
enum Stream : std::uint64_t { kDataset = 1, kSplit, kSelection, kTarget, kInconsistency };

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double accuracy_on(const UtilityModel& model, const DecisionMatrix& matrix,
                   const std::vector<int>& labels, const std::vector<std::size_t>& scope) {
  if (scope.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : scope) {
    if (assign_category(model, comprehensive_utility(model, matrix.row(i))) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scope.size());
}

GenerationConfig dataset_config(const ExperimentConfig& cfg, int dataset) {
  GenerationConfig g = cfg.generation;
  g.seed = derive_seed(cfg.seed, {kDataset, static_cast<std::uint64_t>(dataset)});
  return g;
}

std::vector<AssignmentExample> examples_for(const GeneratedDataset& data,
                                            const std::vector<std::size_t>& indices) {
  std::vector<AssignmentExample> out;
  for (std::size_t i : indices) out.push_back({data.matrix.id(i), data.labels[i]});
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::vector<int> GenerationConfig::resolved_subintervals() const {
  if (subinterval_counts.empty()) return std::vector<int>(static_cast<std::size_t>(m), 4);
  return subinterval_counts;
}

void GenerationConfig::validate() const {
  require(m >= 1, "m must be at least 1");
  require(q >= 2, "q must be at least 2");
  require(n >= q, "n must be at least q");
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  require(subinterval_counts.empty() || subinterval_counts.size() == static_cast<std::size_t>(m),
          "need one subinterval count per criterion");
  for (int s : subinterval_counts) require(s >= 1, "subinterval counts must be positive");
}

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : path) {
    state = out ^ (p * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    out = splitmix64(state);
  }
  return out;
}

GeneratedDataset generate_dataset(const GenerationConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> performance(0.0, 100.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<std::size_t>(cfg.n);
  const auto m = static_cast<std::size_t>(cfg.m);
  const int q = cfg.q;

  std::vector<std::string> ids;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(fmt::format("a{}", i + 1));
    for (std::size_t j = 0; j < m; ++j) rows[i][j] = performance(rng);
  }
  for (std::size_t j = 0; j < m; ++j) names.push_back(fmt::format("g{}", j + 1));

  GeneratedDataset out{DecisionMatrix(std::move(ids), std::move(names), std::move(rows)), {}, {},
                       {}, {}};
  auto& truth = out.truth;
  truth.scales = build_scales(out.matrix, cfg.resolved_subintervals());
  for (const auto& scale : truth.scales) {
    std::vector<double> u(scale.breakpoints.size());
    for (double& v : u) v = unit(rng);
    truth.breakpoint_utilities.push_back(std::move(u));
  }

  std::vector<double> utilities(n);
  for (std::size_t i = 0; i < n; ++i) {
    utilities[i] = comprehensive_utility(truth, out.matrix.row(i));
  }
  std::vector<double> sorted = utilities;
  std::sort(sorted.begin(), sorted.end());
  truth.thresholds.assign(static_cast<std::size_t>(q) + 1, 0.0);
  for (int h = 1; h < q; ++h) {
    const long k = std::clamp<long>(round_half_up(static_cast<double>(h) * cfg.n / q), 1,
                                    static_cast<long>(n) - 1);
    truth.thresholds[h] = 0.5 * (sorted[k - 1] + sorted[k]);
  }
  set_display_thresholds(truth);

  out.clean_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.clean_labels[i] = assign_category(truth, utilities[i]);
  out.labels = out.clean_labels;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto flips = static_cast<std::size_t>(round_half_up(static_cast<double>(n) * cfg.eta));
  std::uniform_int_distribution<int> shift(1, q - 1);
  for (std::size_t k = 0; k < flips; ++k) {
    const std::size_t i = order[k];
    out.labels[i] = (out.labels[i] - 1 + shift(rng)) % q + 1;
    out.flipped.push_back(i);
  }
  std::sort(out.flipped.begin(), out.flipped.end());
  return out;
}

Split stratified_split(const std::vector<int>& labels, int categories, double train_fraction,
                       std::mt19937_64& rng) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
  const auto n = labels.size();
  const long n1 = round_half_up(static_cast<double>(n) * train_fraction);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(categories));
  for (std::size_t i = 0; i < n; ++i) {
    require(labels[i] >= 1 && labels[i] <= categories, "label out of range");
    members[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  }
  std::vector<long> quota(members.size());
  std::vector<double> remainder(members.size());
  long assigned = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const double exact = static_cast<double>(members[c].size()) * static_cast<double>(n1) /
                         static_cast<double>(n);
    quota[c] = static_cast<long>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> by_remainder(members.size());
  std::iota(by_remainder.begin(), by_remainder.end(), 0);
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n1 && k < by_remainder.size(); ++k) {
    ++quota[by_remainder[k]];
    ++assigned;
  }
  Split split;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto group = members[c];
    std::shuffle(group.begin(), group.end(), rng);
    const auto take = static_cast<std::size_t>(quota[c]);
    split.train.insert(split.train.end(), group.begin(), group.begin() + static_cast<long>(take));
    split.test.insert(split.test.end(), group.begin() + static_cast<long>(take), group.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

double cost_saving_rate(int training_size, int labeled) {
  require(training_size > 0, "training set must be nonempty");
  return static_cast<double>(training_size - labeled) / static_cast<double>(training_size);
}

double cost_saving(int n1, int answered, double initial_fraction) {
  const int initial = static_cast<int>(round_half_up(initial_fraction * n1));
  return cost_saving_rate(n1, answered + initial);
}

void ExperimentConfig::validate() const {
  generation.validate();
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
  require(initial_fraction > 0.0 && initial_fraction < 1.0, "initial fraction must lie in (0, 1)");
  require(T >= 0, "T must be non-negative");
  require(target_fits >= 1, "target_fits must be at least 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(!strategies.empty(), "at least one strategy is required");
  require(datasets >= 1 && runs >= 1, "datasets and runs must be at least 1");
  require(jobs >= 1, "jobs must be at least 1");
}

double target_accuracy(const ExperimentConfig& cfg, const GeneratedDataset& data, int dataset,
                       int run) {
  auto matrix = std::make_shared<const DecisionMatrix>(data.matrix);
  const auto scales = build_scales(data.matrix, cfg.generation.resolved_subintervals());
  double total = 0.0;
  for (int k = 0; k < cfg.target_fits; ++k) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {kTarget, static_cast<std::uint64_t>(dataset),
                                               static_cast<std::uint64_t>(run),
                                               static_cast<std::uint64_t>(k)}));
    const auto split = stratified_split(data.labels, cfg.generation.q, cfg.train_fraction, rng);
    PreferenceInstance instance;
    instance.matrix = matrix;
    instance.scales = scales;
    instance.examples = examples_for(data, split.train);
    instance.categories = cfg.generation.q;
    instance.alpha = cfg.alpha;
    instance.monotone_mode = cfg.monotone_mode;
    const auto fitted = fit_and_refine(instance);
    total += accuracy_on(fitted.refined.model, data.matrix, data.labels, split.test);
  }
  return total / cfg.target_fits;
}

RunRecord run_cell(const ExperimentConfig& cfg, int dataset, int run, const Strategy& strategy) {
  const auto started = std::chrono::steady_clock::now();
  const auto data = generate_dataset(dataset_config(cfg, dataset));
  const auto d = static_cast<std::uint64_t>(dataset);
  const auto r = static_cast<std::uint64_t>(run);

  std::mt19937_64 rng(derive_seed(cfg.seed, {kSplit, d, r}));
  const auto split = stratified_split(data.labels, cfg.generation.q, cfg.train_fraction, rng);
  const int n1 = static_cast<int>(split.train.size());
  auto shuffled = split.train;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto initial_count = static_cast<std::size_t>(
      std::max(1L, round_half_up(cfg.initial_fraction * static_cast<double>(n1))));
  require(initial_count <= shuffled.size(), "training set is too small for the initial examples");
  std::vector<std::size_t> initial(shuffled.begin(),
                                   shuffled.begin() + static_cast<long>(initial_count));
  std::sort(initial.begin(), initial.end());

  RunRecord rec;
  rec.strategy = std::string(to_string(strategy.kind));
  rec.dataset = dataset;
  rec.run = run;
  rec.seed = cfg.seed;

  SessionConfig sc;
  sc.strategy = strategy;
  sc.alpha = cfg.alpha;
  sc.subinterval_counts = cfg.generation.resolved_subintervals();
  sc.categories = cfg.generation.q;
  sc.rng_seed = derive_seed(cfg.seed, {kSelection, d, r, static_cast<std::uint64_t>(strategy.kind)});
  sc.monotone_mode = cfg.monotone_mode;
  sc.labels = data.labels;
  sc.candidate_pool = split.train;
  if (cfg.criterion == Criterion::budget) {
    sc.termination = BudgetT{cfg.T};
  } else {
    rec.target = target_accuracy(cfg, data, dataset, run);
    sc.termination = TargetAccuracy{*rec.target, split.test};
  }

  auto matrix = std::make_shared<const DecisionMatrix>(data.matrix);
  auto session = Session::start(matrix, examples_for(data, initial), sc);
  try {
    for (;;) {
      rec.accuracy.push_back(
          accuracy_on(session.current_model().refined.model, data.matrix, data.labels, split.test));
      const auto question = session.next_question();
      if (!question) break;
      session.submit_answer(question->alternative_id, data.labels[question->alternative_index]);
    }
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{} on dataset {} run {} at t={}: {}", rec.strategy, dataset,
                                      run, session.iteration(), e.what()));
  }
  rec.answered = session.iteration();
  if (cfg.criterion == Criterion::budget) {
    // Training candidates ran out before T: the model no longer changes.
    while (rec.accuracy.size() < static_cast<std::size_t>(cfg.T) + 1) {
      rec.accuracy.push_back(rec.accuracy.back());
    }
  } else {
    rec.cost_saving = cost_saving(n1, rec.answered, cfg.initial_fraction);
  }
  if (cfg.record_time) {
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

namespace {

std::vector<RunRecord> run_all(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t per_strategy = static_cast<std::size_t>(cfg.datasets) * cfg.runs;
  std::vector<RunRecord> out(cfg.strategies.size() * per_strategy);
  parallel_for(out.size(), cfg.jobs, [&](std::size_t k) {
    const auto& strategy = cfg.strategies[k / per_strategy];
    const auto cell = k % per_strategy;
    out[k] = run_cell(cfg, static_cast<int>(cell / cfg.runs), static_cast<int>(cell % cfg.runs),
                      strategy);
  });
  return out;
}

}  // namespace

std::vector<RunRecord> run_budget_experiment(const ExperimentConfig& cfg) {
  require(cfg.criterion == Criterion::budget, "experiment is not budget-terminated");
  return run_all(cfg);
}

std::vector<RunRecord> run_target_experiment(const ExperimentConfig& cfg) {
  require(cfg.criterion == Criterion::target, "experiment is not target-terminated");
  return run_all(cfg);
}

InconsistencyResult inconsistency_study(const GenerationConfig& cfg, int repetitions, int jobs) {
  cfg.validate();
  require(repetitions >= 1, "repetitions must be at least 1");
  InconsistencyResult out;
  out.values.resize(static_cast<std::size_t>(repetitions));
  parallel_for(out.values.size(), jobs, [&](std::size_t k) {
    GenerationConfig g = cfg;
    g.seed = derive_seed(cfg.seed, {kInconsistency, k});
    const auto data = generate_dataset(g);
    PreferenceInstance instance;
    instance.matrix = std::make_shared<const DecisionMatrix>(data.matrix);
    instance.scales = build_scales(data.matrix, g.resolved_subintervals());
    std::vector<std::size_t> all(data.matrix.alternatives());
    std::iota(all.begin(), all.end(), 0);
    instance.examples = examples_for(data, all);
    instance.categories = g.q;
    out.values[k] = min_inconsistency(instance);
  });
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) /
             static_cast<double>(out.values.size());
  return out;
}

void sweep(const std::vector<GridPoint>& grid, std::ostream& out, int jobs) {
  out << kSweepHeader << '\n';
  struct Cell {
    std::size_t point;
    std::size_t strategy;
    int dataset;
    int run;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& cfg = grid[p].config;
    cfg.validate();
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
      for (int d = 0; d < cfg.datasets; ++d) {
        for (int r = 0; r < cfg.runs; ++r) cells.push_back({p, s, d, r});
      }
    }
  }
  std::vector<std::optional<RunRecord>> results(cells.size());
  std::exception_ptr error;
  try {
    parallel_for(cells.size(), jobs, [&](std::size_t k) {
      const auto& c = cells[k];
      const auto& cfg = grid[c.point].config;
      results[k] = run_cell(cfg, c.dataset, c.run, cfg.strategies[c.strategy]);
    });
  } catch (...) {
    error = std::current_exception();
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!results[k]) continue;
    const auto& rec = *results[k];
    const auto& point = grid[cells[k].point];
    const auto prefix = fmt::format("{},{},{},{},{}", csv_field(point.config.name),
                                    csv_field(point.label), rec.strategy, rec.dataset, rec.run);
    auto row = [&](std::size_t iteration, const char* metric, double value) {
      out << fmt::format("{},{},{},{},{},{}\n", prefix, iteration, metric, value, rec.seed,
                         rec.wall_ms);
    };
    for (std::size_t t = 0; t < rec.accuracy.size(); ++t) row(t, "accuracy", rec.accuracy[t]);
    if (rec.target) row(0, "target_accuracy", *rec.target);
    if (rec.cost_saving) row(static_cast<std::size_t>(rec.answered), "cost_saving", *rec.cost_saving);
  }
  out.flush();
  if (error) std::rethrow_exception(error);
}

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::invalid_input, fmt::format("field '{}' has the wrong type", key));
  }
}

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  require(j.is_object(), "experiment config must be an object");
  static const char* const known[] = {
      "name",  "n",         "m",          "q",          "subinterval_counts", "eta",
      "train_fraction",     "initial_fraction",         "criterion",          "T",
      "target_fits",        "alpha",      "strategies", "temperature",        "datasets",
      "runs",  "seed",      "jobs",       "monotone",   "record_time"};
  for (const auto& [key, value] : j.items()) {
    require(std::find(std::begin(known), std::end(known), key) != std::end(known),
            "unknown experiment field '" + key + "'");
  }
  ExperimentConfig cfg;
  read(j, "name", cfg.name);
  read(j, "n", cfg.generation.n);
  read(j, "m", cfg.generation.m);
  read(j, "q", cfg.generation.q);
  read(j, "subinterval_counts", cfg.generation.subinterval_counts);
  read(j, "eta", cfg.generation.eta);
  read(j, "train_fraction", cfg.train_fraction);
  read(j, "initial_fraction", cfg.initial_fraction);
  std::string criterion = "budget";
  read(j, "criterion", criterion);
  require(criterion == "budget" || criterion == "target",
          "criterion must be 'budget' or 'target'");
  cfg.criterion = criterion == "budget" ? Criterion::budget : Criterion::target;
  read(j, "T", cfg.T);
  read(j, "target_fits", cfg.target_fits);
  read(j, "alpha", cfg.alpha);
  std::vector<std::string> strategies{"ES", "RAND"};
  read(j, "strategies", strategies);
  double temperature = 1.0;
  read(j, "temperature", temperature);
  for (const auto& s : strategies) cfg.strategies.push_back({parse_strategy(s), temperature});
  read(j, "datasets", cfg.datasets);
  read(j, "runs", cfg.runs);
  read(j, "seed", cfg.seed);
  read(j, "jobs", cfg.jobs);
  read(j, "monotone", cfg.monotone_mode);
  read(j, "record_time", cfg.record_time);
  cfg.validate();
  return cfg;
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> strategies;
  for (const auto& s : cfg.strategies) strategies.emplace_back(to_string(s.kind));
  return {{"name", cfg.name},
          {"n", cfg.generation.n},
          {"m", cfg.generation.m},
          {"q", cfg.generation.q},
          {"subinterval_counts", cfg.generation.resolved_subintervals()},
          {"eta", cfg.generation.eta},
          {"train_fraction", cfg.train_fraction},
          {"initial_fraction", cfg.initial_fraction},
          {"criterion", cfg.criterion == Criterion::budget ? "budget" : "target"},
          {"T", cfg.T},
          {"target_fits", cfg.target_fits},
          {"alpha", cfg.alpha},
          {"strategies", strategies},
          {"temperature", cfg.strategies.empty() ? 1.0 : cfg.strategies.front().temperature},
          {"datasets", cfg.datasets},
          {"runs", cfg.runs},
          {"seed", cfg.seed},
          {"jobs", cfg.jobs},
          {"monotone", cfg.monotone_mode},
          {"record_time", cfg.record_time}};
}

std::vector<GridPoint> grid_from_json(const nlohmann::json& j) {
  require(j.is_object(), "sweep config must be an object");
  const auto base = j.contains("base") ? j.at("base") : nlohmann::json::object();
  require(base.is_object(), "'base' must be an object");
  require(j.contains("grid") && j.at("grid").is_array(), "sweep config needs a 'grid' array");
  std::vector<GridPoint> out;
  for (const auto& overrides : j.at("grid")) {
    require(overrides.is_object(), "grid entries must be objects");
    auto merged = base;
    merged.merge_patch(overrides);
    std::string label;
    for (const auto& [key, value] : overrides.items()) {
      if (!label.empty()) label += ';';
      label += key + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
    }
    out.push_back({label.empty() ? "base" : label, experiment_from_json(merged)});
  }
  return out;
}

}  // namespace mcsort
