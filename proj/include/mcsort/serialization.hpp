#pragma once

#include <json.hpp>

#include "mcsort/core_model.hpp"
#include "mcsort/inference.hpp"
#include "mcsort/session.hpp"
#include "mcsort/strategy.hpp"

namespace mcsort {

using Json = nlohmann::json;

Json matrix_to_json(const DecisionMatrix& matrix);
DecisionMatrix matrix_from_json(const Json& j);

/// Per-criterion breakpoints with raw and normalized utilities, thresholds and
/// the margin. `normalized` may be null when the model cannot be normalized.
Json model_to_json(const UtilityModel& model, const DecisionMatrix& matrix,
                   const NormalizedModel* normalized);

/// Refined model plus both stages' diagnostics.
Json fitted_to_json(const FittedModel& fitted, const DecisionMatrix& matrix);

Json selection_to_json(const SelectionResult& selection);
Json question_to_json(const Question& question, const DecisionMatrix& matrix);
Json final_to_json(const FinalResult& result, const DecisionMatrix& matrix);

/// Labels as an {id: category} object.
Json labels_to_json(const std::vector<int>& labels, const DecisionMatrix& matrix);
std::vector<int> labels_from_json(const Json& j, const DecisionMatrix& matrix);

std::vector<AssignmentExample> examples_from_json(const Json& j);
Json examples_to_json(const std::vector<AssignmentExample>& examples);

/// Alternatives are referenced by id. A scalar `subinterval_counts` applies
/// to every criterion.
SessionConfig config_from_json(const Json& j, const DecisionMatrix& matrix);
Json config_to_json(const SessionConfig& config, const DecisionMatrix& matrix);

/// Complete session state, including the matrix and the RNG state.
Json session_snapshot(const Session& session);
Session session_restore(const Json& j);

}  // namespace mcsort
