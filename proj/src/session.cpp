#include "mcsort/session.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "mcsort/error.hpp"

namespace mcsort {

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::selecting: return "selecting";
    case SessionStatus::awaiting_answer: return "awaiting_answer";
    case SessionStatus::finished: return "finished";
  }
  return "selecting";
}

namespace {

void validate_config(const SessionConfig& config, const DecisionMatrix& matrix) {
  const std::size_t n = matrix.alternatives();
  require(config.categories >= 2, "at least two categories required");
  require(config.alpha > 0.0 && config.alpha < 1.0, "alpha must lie strictly inside (0, 1)");
  require(config.subinterval_counts.size() == matrix.criteria(),
          fmt::format("expected {} subinterval counts, got {}", matrix.criteria(),
                      config.subinterval_counts.size()));
  require(config.jobs >= 1, "jobs must be at least 1");
  require(config.strategy.temperature > 0.0, "temperature must be positive");
  if (config.labels) {
    require(config.labels->size() == n,
            fmt::format("labels cover {} alternatives, matrix has {}", config.labels->size(), n));
    for (int label : *config.labels) {
      require(label >= 1 && label <= config.categories,
              fmt::format("label {} outside 1..{}", label, config.categories));
    }
  }
  if (config.candidate_pool) {
    for (std::size_t i : *config.candidate_pool) require(i < n, "candidate pool index out of range");
  }
  if (const auto* budget = std::get_if<BudgetT>(&config.termination)) {
    require(budget->T >= 0, "question budget must be non-negative");
  } else {
    const auto& target = std::get<TargetAccuracy>(config.termination);
    require(target.target > 0.0 && target.target <= 1.0, "target accuracy must lie in (0, 1]");
    require(config.labels.has_value(), "target-accuracy termination requires labels");
    for (std::size_t i : target.evaluation) require(i < n, "evaluation index out of range");
  }
}

PreferenceInstance make_instance(std::shared_ptr<const DecisionMatrix> matrix,
                                 std::vector<AssignmentExample> examples,
                                 const SessionConfig& config) {
  PreferenceInstance instance;
  instance.scales = build_scales(*matrix, config.subinterval_counts);
  instance.matrix = std::move(matrix);
  instance.examples = std::move(examples);
  instance.categories = config.categories;
  instance.alpha = config.alpha;
  instance.monotone_mode = config.monotone_mode;
  instance.validate();
  std::vector<std::string> seen;
  for (const auto& e : instance.examples) {
    require(std::find(seen.begin(), seen.end(), e.alternative_id) == seen.end(),
            "alternative '" + e.alternative_id + "' appears in more than one example");
    seen.push_back(e.alternative_id);
  }
  return instance;
}

}  // namespace

Session Session::start(std::shared_ptr<const DecisionMatrix> matrix,
                       std::vector<AssignmentExample> initial_examples, SessionConfig config) {
  require(matrix != nullptr, "session needs a decision matrix");
  require(!initial_examples.empty(), "at least one initial assignment example is required");
  validate_config(config, *matrix);
  Session s;
  s.initial_count_ = initial_examples.size();
  s.instance_ = make_instance(std::move(matrix), std::move(initial_examples), config);
  s.config_ = std::move(config);
  s.rng_.seed(s.config_.rng_seed);
  if (s.candidates().empty() || s.budget_exhausted()) s.status_ = SessionStatus::finished;
  return s;
}

bool Session::is_reference(std::size_t alternative) const {
  const auto& id = instance_.matrix->id(alternative);
  return std::any_of(instance_.examples.begin(), instance_.examples.end(),
                     [&](const AssignmentExample& e) { return e.alternative_id == id; });
}

std::vector<std::size_t> Session::candidates() const {
  std::vector<std::size_t> pool;
  if (config_.candidate_pool) {
    pool = *config_.candidate_pool;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  } else {
    pool.resize(instance_.matrix->alternatives());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  }
  std::erase_if(pool, [&](std::size_t i) { return is_reference(i); });
  return pool;
}

bool Session::budget_exhausted() const {
  const auto* budget = std::get_if<BudgetT>(&config_.termination);
  return budget != nullptr && iteration() >= budget->T;
}

std::optional<Question> Session::next_question() {
  if (status_ == SessionStatus::finished) return std::nullopt;
  if (status_ == SessionStatus::awaiting_answer) {
    fail(ErrorCode::state_conflict,
         "a question about '" + pending_->alternative_id + "' is awaiting an answer");
  }
  const auto pool = candidates();
  if (pool.empty() || budget_exhausted()) {
    status_ = SessionStatus::finished;
    return std::nullopt;
  }
  if (const auto* target = std::get_if<TargetAccuracy>(&config_.termination)) {
    const auto& model = current_model().refined.model;
    const auto& labels = *config_.labels;
    std::size_t scored = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < instance_.matrix->alternatives(); ++i) {
      const bool in_scope = target->evaluation.empty()
                                ? !is_reference(i)
                                : std::find(target->evaluation.begin(), target->evaluation.end(),
                                            i) != target->evaluation.end();
      if (!in_scope) continue;
      ++scored;
      const double u = comprehensive_utility(model, instance_.matrix->row(i));
      if (assign_category(model, u) == labels[i]) ++correct;
    }
    if (scored == 0 ||
        static_cast<double>(correct) / static_cast<double>(scored) >= target->target) {
      status_ = SessionStatus::finished;
      return std::nullopt;
    }
  }

  const UtilityModel* model = nullptr;
  if (uses_fitted_model(config_.strategy.kind)) model = &current_model().refined.model;
  auto rng = rng_;
  auto selection = select(config_.strategy, instance_, pool, model, rng, config_.jobs);
  rng_ = rng;

  Question q;
  q.iteration = iteration();
  q.alternative_id = selection.chosen;
  q.alternative_index = selection.chosen_index;
  q.selection = std::move(selection);
  pending_ = q;
  status_ = SessionStatus::awaiting_answer;
  return q;
}

void Session::submit_answer(const std::string& alternative_id, int category) {
  if (status_ != SessionStatus::awaiting_answer) {
    fail(ErrorCode::state_conflict,
         fmt::format("no question is pending (session is {})", to_string(status_)));
  }
  if (alternative_id != pending_->alternative_id) {
    fail(ErrorCode::state_conflict, fmt::format("answer for '{}' but the pending question is '{}'",
                                                alternative_id, pending_->alternative_id));
  }
  require(category >= 1 && category <= config_.categories,
          fmt::format("category {} outside 1..{}", category, config_.categories));

  AnswerRecord record;
  record.iteration = iteration();
  record.asked = alternative_id;
  record.answer = category;
  record.scores = pending_->selection.scores;
  instance_.examples.push_back({alternative_id, category});
  history_.push_back(std::move(record));
  pending_.reset();
  final_.reset();
  status_ = SessionStatus::selecting;
}

const FittedModel& Session::current_model() {
  const int key = static_cast<int>(instance_.examples.size());
  if (!model_cache_ || model_cache_->first != key) {
    auto fitted = fit_and_refine(instance_);
    model_cache_.emplace(key, std::move(fitted));
  }
  return model_cache_->second;
}

void Session::require_labels_cover(std::span<const int> labels) const {
  require(labels.size() == instance_.matrix->alternatives(),
          fmt::format("labels cover {} alternatives, matrix has {}", labels.size(),
                      instance_.matrix->alternatives()));
}

double Session::evaluate_accuracy(std::span<const int> labels, AccuracyScope scope) {
  require_labels_cover(labels);
  const auto& model = current_model().refined.model;
  std::size_t scored = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (scope == AccuracyScope::nonreference && is_reference(i)) continue;
    ++scored;
    const double u = comprehensive_utility(model, instance_.matrix->row(i));
    if (assign_category(model, u) == labels[i]) ++correct;
  }
  require(scored > 0, "no alternatives in the accuracy scope");
  return static_cast<double>(correct) / static_cast<double>(scored);
}

FinalResult Session::finalize(bool early) {
  if (final_) return *final_;
  if (status_ != SessionStatus::finished && !early) {
    fail(ErrorCode::state_conflict,
         fmt::format("session is {}; request early finalization to stop now", to_string(status_)));
  }
  FinalResult out;
  out.fitted = current_model();
  out.normalized = try_normalize(out.fitted.refined.model);
  out.iterations = iteration();
  out.early = early_finish_ || (early && status_ != SessionStatus::finished);
  const auto& model = out.fitted.refined.model;
  std::size_t nonref = 0;
  std::size_t nonref_correct = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < instance_.matrix->alternatives(); ++i) {
    const int h = assign_category(model, comprehensive_utility(model, instance_.matrix->row(i)));
    const bool reference = is_reference(i);
    if (!reference) out.assignments.push_back({instance_.matrix->id(i), h});
    if (config_.labels) {
      const bool hit = (*config_.labels)[i] == h;
      correct += hit ? 1 : 0;
      if (!reference) {
        ++nonref;
        nonref_correct += hit ? 1 : 0;
      }
    }
  }
  if (config_.labels) {
    out.accuracy_all =
        static_cast<double>(correct) / static_cast<double>(instance_.matrix->alternatives());
    if (nonref > 0) {
      out.accuracy_nonref = static_cast<double>(nonref_correct) / static_cast<double>(nonref);
    }
  }
  early_finish_ = out.early;
  pending_.reset();
  status_ = SessionStatus::finished;
  final_ = out;
  return out;
}

std::string Session::rng_state() const {
  std::ostringstream out;
  out << rng_;
  return out.str();
}

Session Session::restore(Restored data) {
  require(data.matrix != nullptr, "snapshot has no decision matrix");
  require(!data.examples.empty(), "snapshot has no assignment examples");
  require(data.initial_count >= 1 && data.initial_count <= data.examples.size(),
          "snapshot initial example count is inconsistent");
  require(data.examples.size() == data.initial_count + data.history.size(),
          "snapshot history does not match its examples");
  validate_config(data.config, *data.matrix);
  require((data.status == SessionStatus::awaiting_answer) == data.pending.has_value(),
          "snapshot pending question does not match its status");
  Session s;
  s.initial_count_ = data.initial_count;
  s.instance_ = make_instance(std::move(data.matrix), std::move(data.examples), data.config);
  s.config_ = std::move(data.config);
  s.history_ = std::move(data.history);
  s.pending_ = std::move(data.pending);
  s.status_ = data.status;
  s.early_finish_ = data.early_finish;
  if (s.pending_) {
    const auto index = s.instance_.matrix->find(s.pending_->alternative_id);
    require(index.has_value() && !s.is_reference(*index),
            "snapshot pending question is not a candidate");
  }
  std::istringstream in(data.rng_state);
  in >> s.rng_;
  require(!in.fail(), "snapshot RNG state is malformed");
  return s;
}

}  // namespace mcsort
