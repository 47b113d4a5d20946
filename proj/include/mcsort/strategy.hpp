#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcsort/core_model.hpp"
#include "mcsort/inference.hpp"

namespace mcsort {

/// Optimal max-margin objectives obtained by hypothetically assigning one
/// candidate to each category in turn.
struct InfoVector {
  std::string alternative_id;
  std::vector<double> values;
};

struct ProbabilityVector {
  std::vector<double> probabilities;
};

enum class StrategyKind { SM, ER, ES, LR, LS, MR, MS, RAND, PES, PLS, PMS };

struct Strategy {
  StrategyKind kind = StrategyKind::ES;
  double temperature = 1.0;  // P-strategies only
};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

/// True for strategies that score candidates from information vectors.
bool uses_info_vectors(StrategyKind kind);
/// True for the consistency-degree strategies that need a fitted model.
bool uses_fitted_model(StrategyKind kind);

struct CandidateScore {
  std::string alternative_id;
  std::size_t alternative_index = 0;
  double score = 0.0;
  std::vector<double> info;           // empty unless the strategy computed v_i
  std::vector<double> probabilities;  // empty for SM and RAND
};

struct SelectionResult {
  std::string chosen;
  std::size_t chosen_index = 0;
  std::vector<CandidateScore> scores;  // ordered by alternative index
};

/// Solves q max-margin programs per candidate. Solves are independent and
/// may run on `jobs` threads; the result does not depend on scheduling.
std::vector<InfoVector> info_vectors(const PreferenceInstance& instance,
                                     std::span<const std::size_t> candidates, int jobs = 1);

ProbabilityVector transform_relu(std::span<const double> v);
ProbabilityVector transform_softmax(std::span<const double> v, double temperature = 1.0);

double ia_sum(std::span<const double> v);
double ia_entropy(const ProbabilityVector& p);
double ia_least_confidence(const ProbabilityVector& p);
double ia_margin(const ProbabilityVector& p);

std::vector<double> consistency_degree(const UtilityModel& model, double u_value);

/// Index of the largest score; scores within 1e-12 of each other tie and the
/// earliest position wins.
std::size_t argmax_first(std::span<const double> scores);

/// Picks the next question. `model` is required for PES/PLS/PMS; `rng` is
/// consumed only by RAND.
SelectionResult select(const Strategy& strategy, const PreferenceInstance& instance,
                       std::span<const std::size_t> candidates, const UtilityModel* model,
                       std::mt19937_64& rng, int jobs = 1);

/// Scores precomputed information vectors (no LP solves).
SelectionResult select_from_vectors(const Strategy& strategy, const DecisionMatrix& matrix,
                                    std::span<const InfoVector> vectors);

}  // namespace mcsort
