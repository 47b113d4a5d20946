#include "mcsort/strategy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mcsort/error.hpp"
#include "mcsort/parallel.hpp"

namespace mcsort {

namespace {

constexpr std::array<std::pair<StrategyKind, std::string_view>, 11> kNames{{
    {StrategyKind::SM, "SM"},
    {StrategyKind::ER, "ER"},
    {StrategyKind::ES, "ES"},
    {StrategyKind::LR, "LR"},
    {StrategyKind::LS, "LS"},
    {StrategyKind::MR, "MR"},
    {StrategyKind::MS, "MS"},
    {StrategyKind::RAND, "RAND"},
    {StrategyKind::PES, "PES"},
    {StrategyKind::PLS, "PLS"},
    {StrategyKind::PMS, "PMS"},
}};

enum class Metric { entropy, least_confidence, margin };

Metric metric_of(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::ER:
    case StrategyKind::ES:
    case StrategyKind::PES: return Metric::entropy;
    case StrategyKind::LR:
    case StrategyKind::LS:
    case StrategyKind::PLS: return Metric::least_confidence;
    default: return Metric::margin;
  }
}

double apply(Metric metric, const ProbabilityVector& p) {
  switch (metric) {
    case Metric::entropy: return ia_entropy(p);
    case Metric::least_confidence: return ia_least_confidence(p);
    case Metric::margin: return ia_margin(p);
  }
  return 0.0;
}

bool relu_based(StrategyKind kind) {
  return kind == StrategyKind::ER || kind == StrategyKind::LR || kind == StrategyKind::MR;
}

SelectionResult finish(std::vector<CandidateScore> scores, std::size_t chosen) {
  SelectionResult out;
  out.chosen = scores[chosen].alternative_id;
  out.chosen_index = scores[chosen].alternative_index;
  out.scores = std::move(scores);
  return out;
}

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> candidates) {
  std::vector<std::size_t> out(candidates.begin(), candidates.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  fail(ErrorCode::invalid_input, fmt::format("unknown strategy '{}'", name));
}

bool uses_info_vectors(StrategyKind kind) {
  return kind != StrategyKind::RAND && !uses_fitted_model(kind);
}

bool uses_fitted_model(StrategyKind kind) {
  return kind == StrategyKind::PES || kind == StrategyKind::PLS || kind == StrategyKind::PMS;
}

std::vector<InfoVector> info_vectors(const PreferenceInstance& instance,
                                     std::span<const std::size_t> candidates, int jobs) {
  instance.validate();
  const auto q = static_cast<std::size_t>(instance.categories);
  const auto& matrix = *instance.matrix;
  for (std::size_t i : candidates) {
    require(i < matrix.alternatives(), "candidate index out of range");
    for (const auto& e : instance.examples) {
      require(e.alternative_id != matrix.id(i),
              "candidate '" + matrix.id(i) + "' is already a reference alternative");
    }
  }
  std::vector<InfoVector> out(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out[c].alternative_id = matrix.id(candidates[c]);
    out[c].values.assign(q, 0.0);
  }
  parallel_for(candidates.size() * q, jobs, [&](std::size_t k) {
    const std::size_t c = k / q;
    const int h = static_cast<int>(k % q) + 1;
    try {
      const auto outcome = fit(instance.with_example({out[c].alternative_id, h}));
      out[c].values[h - 1] = outcome.objective;
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("candidate '{}' as category {}: {}",
                                        out[c].alternative_id, h, e.what()));
    }
  });
  return out;
}

ProbabilityVector transform_relu(std::span<const double> v) {
  ProbabilityVector p;
  p.probabilities.reserve(v.size());
  double total = 0.0;
  for (double x : v) total += std::max(x, 0.0);
  if (!(total > 0.0)) {
    p.probabilities.assign(v.size(), 1.0 / static_cast<double>(v.size()));
    return p;
  }
  for (double x : v) p.probabilities.push_back(std::max(x, 0.0) / total);
  return p;
}

ProbabilityVector transform_softmax(std::span<const double> v, double temperature) {
  require(temperature > 0.0, "temperature must be positive");
  ProbabilityVector p;
  if (v.empty()) return p;
  const double peak = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) {
    p.probabilities.push_back(std::exp(temperature * (x - peak)));
    total += p.probabilities.back();
  }
  for (double& x : p.probabilities) x /= total;
  return p;
}

double ia_sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double ia_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (double x : p.probabilities) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double ia_least_confidence(const ProbabilityVector& p) {
  require(!p.probabilities.empty(), "empty probability vector");
  return 1.0 - *std::max_element(p.probabilities.begin(), p.probabilities.end());
}

double ia_margin(const ProbabilityVector& p) {
  require(p.probabilities.size() >= 2, "margin metric needs at least two categories");
  std::vector<double> sorted = p.probabilities;
  std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end(), std::greater<>());
  return sorted[1] - sorted[0];
}

std::vector<double> consistency_degree(const UtilityModel& model, double u_value) {
  const int q = model.categories();
  const auto& b = model.thresholds;
  const double eps = model.epsilon;
  std::vector<double> phi(static_cast<std::size_t>(q));
  phi[0] = b[1] - eps - u_value;
  for (int h = 2; h < q; ++h) phi[h - 1] = std::min(u_value - b[h - 1], b[h] - eps - u_value);
  phi[q - 1] = u_value - b[q - 1];
  return phi;
}

std::size_t argmax_first(std::span<const double> scores) {
  require(!scores.empty(), "no scores to maximize");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best] + 1e-12) best = k;
  }
  return best;
}

SelectionResult select_from_vectors(const Strategy& strategy, const DecisionMatrix& matrix,
                                    std::span<const InfoVector> vectors) {
  require(!vectors.empty(), "no candidates to select from");
  require(uses_info_vectors(strategy.kind),
          fmt::format("strategy {} does not score information vectors", to_string(strategy.kind)));
  std::vector<CandidateScore> scores;
  for (const auto& v : vectors) {
    CandidateScore s;
    s.alternative_id = v.alternative_id;
    s.alternative_index = matrix.index_of(v.alternative_id);
    s.info = v.values;
    if (strategy.kind == StrategyKind::SM) {
      s.score = ia_sum(v.values);
    } else {
      const auto p = relu_based(strategy.kind) ? transform_relu(v.values)
                                               : transform_softmax(v.values);
      s.score = apply(metric_of(strategy.kind), p);
      s.probabilities = p.probabilities;
    }
    scores.push_back(std::move(s));
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.alternative_index < b.alternative_index;
  });
  std::vector<double> values;
  for (const auto& s : scores) values.push_back(s.score);
  const auto chosen = argmax_first(values);
  return finish(std::move(scores), chosen);
}

SelectionResult select(const Strategy& strategy, const PreferenceInstance& instance,
                       std::span<const std::size_t> candidates, const UtilityModel* model,
                       std::mt19937_64& rng, int jobs) {
  require(!candidates.empty(), "candidate set is empty");
  const auto ordered = sorted_unique(candidates);
  const auto& matrix = *instance.matrix;

  if (uses_info_vectors(strategy.kind)) {
    const auto vectors = info_vectors(instance, ordered, jobs);
    return select_from_vectors(strategy, matrix, vectors);
  }

  std::vector<CandidateScore> scores;
  for (std::size_t i : ordered) scores.push_back({matrix.id(i), i, 0.0, {}, {}});

  if (strategy.kind == StrategyKind::RAND) {
    std::uniform_int_distribution<std::size_t> pick(0, ordered.size() - 1);
    const std::size_t chosen = pick(rng);
    return finish(std::move(scores), chosen);
  }

  require(model != nullptr,
          fmt::format("strategy {} requires a fitted model", to_string(strategy.kind)));
  require(strategy.temperature > 0.0, "temperature must be positive");
  std::vector<double> values;
  for (auto& s : scores) {
    const double u = comprehensive_utility(*model, matrix.row(s.alternative_index));
    s.info = consistency_degree(*model, u);
    const auto p = transform_softmax(s.info, strategy.temperature);
    s.score = apply(metric_of(strategy.kind), p);
    s.probabilities = p.probabilities;
    values.push_back(s.score);
  }
  const auto chosen = argmax_first(values);
  return finish(std::move(scores), chosen);
}

}  // namespace mcsort
