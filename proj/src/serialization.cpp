#include "mcsort/serialization.hpp"

#include <fmt/format.h>

#include "mcsort/error.hpp"

namespace mcsort {

namespace {

const Json& member(const Json& j, const char* key) {
  require(j.is_object(), fmt::format("expected an object containing '{}'", key));
  auto it = j.find(key);
  require(it != j.end(), fmt::format("missing field '{}'", key));
  return *it;
}

template <class T>
T get(const Json& j, const char* key) {
  const Json& v = member(j, key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::invalid_input, fmt::format("field '{}' has the wrong type", key));
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

std::size_t index_of_id(const Json& v, const DecisionMatrix& matrix) {
  require(v.is_string(), "alternatives are referenced by string id");
  return matrix.index_of(v.get<std::string>());
}

std::vector<std::size_t> indices_from_json(const Json& j, const DecisionMatrix& matrix) {
  require(j.is_array(), "expected an array of alternative ids");
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(index_of_id(v, matrix));
  return out;
}

Json ids_to_json(const std::vector<std::size_t>& indices, const DecisionMatrix& matrix) {
  Json out = Json::array();
  for (std::size_t i : indices) out.push_back(matrix.id(i));
  return out;
}

Json slacks_to_json(const std::vector<Slack>& slacks) {
  Json out = Json::array();
  for (const auto& s : slacks) out.push_back({{"plus", s.plus}, {"minus", s.minus}});
  return out;
}

Json score_to_json(const CandidateScore& s) {
  return {{"alternative", s.alternative_id},
          {"index", s.alternative_index},
          {"score", s.score},
          {"info", s.info},
          {"probabilities", s.probabilities}};
}

CandidateScore score_from_json(const Json& j) {
  CandidateScore s;
  s.alternative_id = get<std::string>(j, "alternative");
  s.alternative_index = get<std::size_t>(j, "index");
  s.score = get<double>(j, "score");
  s.info = get<std::vector<double>>(j, "info");
  s.probabilities = get<std::vector<double>>(j, "probabilities");
  return s;
}

std::vector<CandidateScore> scores_from_json(const Json& j) {
  require(j.is_array(), "scores must be an array");
  std::vector<CandidateScore> out;
  for (const auto& s : j) out.push_back(score_from_json(s));
  return out;
}

SessionStatus status_from_string(const std::string& s) {
  for (auto status : {SessionStatus::selecting, SessionStatus::awaiting_answer,
                      SessionStatus::finished}) {
    if (to_string(status) == s) return status;
  }
  fail(ErrorCode::invalid_input, "unknown session status '" + s + "'");
}

}  // namespace

Json matrix_to_json(const DecisionMatrix& matrix) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < matrix.alternatives(); ++i) {
    const auto r = matrix.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"ids", matrix.ids()}, {"criteria", matrix.criterion_names()}, {"rows", rows}};
}

DecisionMatrix matrix_from_json(const Json& j) {
  return DecisionMatrix(get<std::vector<std::string>>(j, "ids"),
                        get<std::vector<std::string>>(j, "criteria"),
                        get<std::vector<std::vector<double>>>(j, "rows"));
}

Json model_to_json(const UtilityModel& model, const DecisionMatrix& matrix,
                   const NormalizedModel* normalized) {
  Json criteria = Json::array();
  for (std::size_t j = 0; j < model.scales.size(); ++j) {
    Json c = {{"name", matrix.criterion_names().at(j)},
              {"breakpoints", model.scales[j].breakpoints},
              {"utilities", model.breakpoint_utilities[j]}};
    if (normalized != nullptr) c["normalized"] = normalized->normalized_utilities[j];
    criteria.push_back(std::move(c));
  }
  Json out = {{"criteria", criteria},
              {"thresholds", model.thresholds},
              {"epsilon", model.epsilon},
              {"monotone", model.monotone_mode}};
  if (normalized != nullptr) {
    out["normalized"] = {{"thresholds", normalized->normalized_thresholds},
                         {"epsilon", normalized->epsilon_s},
                         {"offset", normalized->offset},
                         {"scale", normalized->scale}};
  } else {
    out["normalized"] = nullptr;
  }
  return out;
}

Json fitted_to_json(const FittedModel& fitted, const DecisionMatrix& matrix) {
  const auto normalized = try_normalize(fitted.refined.model);
  Json out = model_to_json(fitted.refined.model, matrix, normalized ? &*normalized : nullptr);
  out["objective"] = fitted.refined.objective;
  out["inconsistency"] = fitted.refined.inconsistency;
  out["slacks"] = slacks_to_json(fitted.refined.slacks);
  out["slope_change"] = fitted.refined.slope_change;
  out["max_margin"] = {{"objective", fitted.max_margin.objective},
                       {"epsilon", fitted.max_margin.epsilon},
                       {"inconsistency", fitted.max_margin.inconsistency},
                       {"thresholds", fitted.max_margin.model.thresholds}};
  Json assignments = Json::object();
  const auto categories = assign_all(fitted.refined.model, matrix);
  for (std::size_t i = 0; i < categories.size(); ++i) assignments[matrix.id(i)] = categories[i];
  out["assignments"] = assignments;
  return out;
}

Json selection_to_json(const SelectionResult& selection) {
  Json scores = Json::array();
  for (const auto& s : selection.scores) scores.push_back(score_to_json(s));
  return {{"chosen", selection.chosen}, {"chosen_index", selection.chosen_index},
          {"scores", scores}};
}

Json question_to_json(const Question& question, const DecisionMatrix& matrix) {
  const auto row = matrix.row(question.alternative_index);
  return {{"iteration", question.iteration},
          {"alternative", question.alternative_id},
          {"performances", std::vector<double>(row.begin(), row.end())},
          {"selection", selection_to_json(question.selection)}};
}

Json final_to_json(const FinalResult& result, const DecisionMatrix& matrix) {
  Json assignments = Json::object();
  for (const auto& a : result.assignments) assignments[a.alternative_id] = a.category;
  Json out = {{"model", fitted_to_json(result.fitted, matrix)},
              {"assignments", assignments},
              {"iterations", result.iterations},
              {"early", result.early}};
  out["accuracy_all"] = result.accuracy_all ? Json(*result.accuracy_all) : Json(nullptr);
  out["accuracy_nonref"] = result.accuracy_nonref ? Json(*result.accuracy_nonref) : Json(nullptr);
  return out;
}

Json labels_to_json(const std::vector<int>& labels, const DecisionMatrix& matrix) {
  Json out = Json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) out[matrix.id(i)] = labels[i];
  return out;
}

std::vector<int> labels_from_json(const Json& j, const DecisionMatrix& matrix) {
  require(j.is_object(), "labels must be an object mapping alternative id to category");
  std::vector<int> out(matrix.alternatives(), 0);
  for (const auto& [id, v] : j.items()) {
    require(v.is_number_integer(), "label of '" + id + "' must be an integer");
    out[matrix.index_of(id)] = v.get<int>();
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(out[i] != 0, "labels do not cover alternative '" + matrix.id(i) + "'");
  }
  return out;
}

std::vector<AssignmentExample> examples_from_json(const Json& j) {
  require(j.is_array(), "examples must be an array");
  std::vector<AssignmentExample> out;
  for (const auto& e : j) {
    out.push_back({get<std::string>(e, "alternative"), get<int>(e, "category")});
  }
  return out;
}

Json examples_to_json(const std::vector<AssignmentExample>& examples) {
  Json out = Json::array();
  for (const auto& e : examples) {
    out.push_back({{"alternative", e.alternative_id}, {"category", e.category}});
  }
  return out;
}

SessionConfig config_from_json(const Json& j, const DecisionMatrix& matrix) {
  require(j.is_object(), "config must be an object");
  SessionConfig c;
  c.strategy.kind = parse_strategy(get_or<std::string>(j, "strategy", "ES"));
  c.strategy.temperature = get_or<double>(j, "temperature", 1.0);
  c.alpha = get_or<double>(j, "alpha", 0.1);
  c.categories = get<int>(j, "categories");
  const Json& counts = member(j, "subinterval_counts");
  if (counts.is_number_integer()) {
    c.subinterval_counts.assign(matrix.criteria(), counts.get<int>());
  } else {
    c.subinterval_counts = get<std::vector<int>>(j, "subinterval_counts");
  }
  c.rng_seed = get_or<std::uint64_t>(j, "seed", 0);
  c.monotone_mode = get_or<bool>(j, "monotone", false);
  c.jobs = get_or<int>(j, "jobs", 1);
  if (j.contains("labels") && !j.at("labels").is_null()) {
    c.labels = labels_from_json(j.at("labels"), matrix);
  }
  if (j.contains("candidate_pool") && !j.at("candidate_pool").is_null()) {
    c.candidate_pool = indices_from_json(j.at("candidate_pool"), matrix);
  }
  const Json& term = member(j, "termination");
  const auto type = get<std::string>(term, "type");
  if (type == "budget") {
    c.termination = BudgetT{get<int>(term, "T")};
  } else if (type == "target") {
    TargetAccuracy t;
    t.target = get<double>(term, "target");
    if (term.contains("evaluation")) t.evaluation = indices_from_json(term.at("evaluation"), matrix);
    c.termination = std::move(t);
  } else {
    fail(ErrorCode::invalid_input, "termination type must be 'budget' or 'target'");
  }
  return c;
}

Json config_to_json(const SessionConfig& c, const DecisionMatrix& matrix) {
  Json out = {{"strategy", std::string(to_string(c.strategy.kind))},
              {"temperature", c.strategy.temperature},
              {"alpha", c.alpha},
              {"categories", c.categories},
              {"subinterval_counts", c.subinterval_counts},
              {"seed", c.rng_seed},
              {"monotone", c.monotone_mode},
              {"jobs", c.jobs}};
  if (const auto* budget = std::get_if<BudgetT>(&c.termination)) {
    out["termination"] = {{"type", "budget"}, {"T", budget->T}};
  } else {
    const auto& t = std::get<TargetAccuracy>(c.termination);
    out["termination"] = {{"type", "target"},
                          {"target", t.target},
                          {"evaluation", ids_to_json(t.evaluation, matrix)}};
  }
  out["labels"] = c.labels ? labels_to_json(*c.labels, matrix) : Json(nullptr);
  out["candidate_pool"] = c.candidate_pool ? ids_to_json(*c.candidate_pool, matrix) : Json(nullptr);
  return out;
}

Json session_snapshot(const Session& session) {
  const auto& matrix = session.matrix();
  Json history = Json::array();
  for (const auto& r : session.history()) {
    Json scores = Json::array();
    for (const auto& s : r.scores) scores.push_back(score_to_json(s));
    history.push_back(
        {{"iteration", r.iteration}, {"asked", r.asked}, {"answer", r.answer}, {"scores", scores}});
  }
  Json pending = nullptr;
  if (session.pending()) {
    const auto& q = *session.pending();
    pending = {{"iteration", q.iteration},
               {"alternative", q.alternative_id},
               {"selection", selection_to_json(q.selection)}};
  }
  return {{"matrix", matrix_to_json(matrix)},
          {"config", config_to_json(session.config(), matrix)},
          {"examples", examples_to_json(session.examples())},
          {"initial_count", session.initial_example_count()},
          {"history", history},
          {"pending", pending},
          {"status", std::string(to_string(session.status()))},
          {"early", session.finished_early()},
          {"rng", session.rng_state()}};
}

Session session_restore(const Json& j) {
  Session::Restored data;
  auto matrix = std::make_shared<const DecisionMatrix>(matrix_from_json(member(j, "matrix")));
  data.config = config_from_json(member(j, "config"), *matrix);
  data.examples = examples_from_json(member(j, "examples"));
  data.initial_count = get<std::size_t>(j, "initial_count");
  for (const auto& r : member(j, "history")) {
    AnswerRecord rec;
    rec.iteration = get<int>(r, "iteration");
    rec.asked = get<std::string>(r, "asked");
    rec.answer = get<int>(r, "answer");
    rec.scores = scores_from_json(member(r, "scores"));
    data.history.push_back(std::move(rec));
  }
  const Json& pending = member(j, "pending");
  if (!pending.is_null()) {
    Question q;
    q.iteration = get<int>(pending, "iteration");
    q.alternative_id = get<std::string>(pending, "alternative");
    q.alternative_index = matrix->index_of(q.alternative_id);
    const Json& sel = member(pending, "selection");
    q.selection.chosen = get<std::string>(sel, "chosen");
    q.selection.chosen_index = get<std::size_t>(sel, "chosen_index");
    q.selection.scores = scores_from_json(member(sel, "scores"));
    data.pending = std::move(q);
  }
  data.status = status_from_string(get<std::string>(j, "status"));
  data.early_finish = get_or<bool>(j, "early", false);
  data.rng_state = get<std::string>(j, "rng");
  data.matrix = std::move(matrix);
  return Session::restore(std::move(data));
}

}  // namespace mcsort
