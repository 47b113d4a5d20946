#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mcsort/core_model.hpp"

namespace mcsort::credit_rating {

/// Twenty firms on three criteria with four rating categories, the classic
/// illustrative instance for incremental elicitation.
DecisionMatrix matrix();

/// Reference ratings for a1..a20, in matrix order.
std::vector<int> labels();

/// Starting assignment examples.
std::vector<AssignmentExample> initial_examples();

/// The decision maker's answers, in the order the questions are asked.
std::vector<AssignmentExample> answers();

/// Published objective values of the hypothetical assignments of each
/// candidate to C1..C4, before the first and second questions.
using ObjectiveRow = std::pair<std::string, std::array<double, 4>>;
std::vector<ObjectiveRow> published_first_round();
std::vector<ObjectiveRow> published_second_round();

/// Published entropy-based information amounts for the same two rounds.
using InformationRow = std::pair<std::string, double>;
std::vector<InformationRow> published_first_round_information();
std::vector<InformationRow> published_second_round_information();

/// Published normalized thresholds b_0..b_4 after the last answer.
std::array<double, 5> published_thresholds();
std::array<double, 5> published_monotone_thresholds();
inline constexpr int kPublishedCorrect = 13;

inline constexpr int kCategories = 4;
inline constexpr int kSubintervals = 4;
inline constexpr int kBudget = 8;
inline constexpr double kAlpha = 0.1;

}  // namespace mcsort::credit_rating
