#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcsort/core_model.hpp"
#include "mcsort/inference.hpp"
#include "mcsort/strategy.hpp"

namespace mcsort {

/// Stop after T answered questions. T = 0 asks nothing.
struct BudgetT {
  int T = 1;
};

/// Stop once the current model reaches `target` accuracy against the session
/// labels. `evaluation` lists the alternatives scored; empty means every
/// alternative outside the reference set.
struct TargetAccuracy {
  double target = 1.0;
  std::vector<std::size_t> evaluation;
};

using Termination = std::variant<BudgetT, TargetAccuracy>;

struct SessionConfig {
  Strategy strategy;
  double alpha = 0.1;
  std::vector<int> subinterval_counts;
  int categories = 2;
  Termination termination = BudgetT{};
  std::uint64_t rng_seed = 0;
  bool monotone_mode = false;
  int jobs = 1;
  /// Ground truth per alternative (matrix order). Required by TargetAccuracy,
  /// otherwise only used to report accuracy in the final result.
  std::optional<std::vector<int>> labels;
  /// Restricts which alternatives may be asked about.
  std::optional<std::vector<std::size_t>> candidate_pool;
};

enum class SessionStatus { selecting, awaiting_answer, finished };
std::string_view to_string(SessionStatus status);

enum class AccuracyScope { nonreference, all };

struct Question {
  int iteration = 0;
  std::string alternative_id;
  std::size_t alternative_index = 0;
  SelectionResult selection;
};

struct AnswerRecord {
  int iteration = 0;
  std::string asked;
  int answer = 0;
  std::vector<CandidateScore> scores;
};

struct FinalResult {
  FittedModel fitted;
  /// Empty when every marginal utility function is flat.
  std::optional<NormalizedModel> normalized;
  /// Non-reference alternatives in matrix order.
  std::vector<AssignmentExample> assignments;
  std::optional<double> accuracy_all;
  std::optional<double> accuracy_nonref;
  int iterations = 0;
  bool early = false;
};

/// Incremental elicitation state machine: selecting -> awaiting_answer ->
/// selecting ... -> finished. Not thread-safe; callers serialize access.
class Session {
 public:
  static Session start(std::shared_ptr<const DecisionMatrix> matrix,
                       std::vector<AssignmentExample> initial_examples, SessionConfig config);

  SessionStatus status() const { return status_; }
  int iteration() const { return static_cast<int>(history_.size()); }
  const SessionConfig& config() const { return config_; }
  const DecisionMatrix& matrix() const { return *instance_.matrix; }
  std::shared_ptr<const DecisionMatrix> matrix_ptr() const { return instance_.matrix; }
  const PreferenceInstance& instance() const { return instance_; }
  const std::vector<AssignmentExample>& examples() const { return instance_.examples; }
  std::size_t initial_example_count() const { return initial_count_; }
  const std::vector<AnswerRecord>& history() const { return history_; }
  const std::optional<Question>& pending() const { return pending_; }
  bool is_reference(std::size_t alternative) const;
  /// Alternatives that may still be asked about, in matrix order.
  std::vector<std::size_t> candidates() const;

  /// Runs the termination check and, if the session continues, selects the
  /// next question. Returns nullopt once finished. On error the state is
  /// left unchanged.
  std::optional<Question> next_question();

  /// Records the decision maker's answer to the pending question. Rejected
  /// answers leave the state unchanged.
  void submit_answer(const std::string& alternative_id, int category);

  /// M-1 followed by M-3 on the current examples; cached per iteration.
  const FittedModel& current_model();

  /// Fraction of scoped alternatives whose current assignment equals the
  /// label. `labels` is indexed by alternative.
  double evaluate_accuracy(std::span<const int> labels, AccuracyScope scope);

  /// Fits on every accumulated example and sorts the non-reference set.
  /// Allowed before termination only when `early` is set, which also
  /// finishes the session.
  FinalResult finalize(bool early = false);

  std::string rng_state() const;
  bool finished_early() const { return early_finish_; }

  struct Restored;
  static Session restore(Restored data);

 private:
  Session() = default;
  void require_labels_cover(std::span<const int> labels) const;
  bool budget_exhausted() const;

  PreferenceInstance instance_;
  SessionConfig config_;
  std::size_t initial_count_ = 0;
  std::vector<AnswerRecord> history_;
  std::optional<Question> pending_;
  SessionStatus status_ = SessionStatus::selecting;
  bool early_finish_ = false;
  std::mt19937_64 rng_;
  std::optional<std::pair<int, FittedModel>> model_cache_;
  std::optional<FinalResult> final_;
};

/// Everything needed to rebuild a session exactly.
struct Session::Restored {
  std::shared_ptr<const DecisionMatrix> matrix;
  SessionConfig config;
  std::vector<AssignmentExample> examples;
  std::size_t initial_count = 0;
  std::vector<AnswerRecord> history;
  std::optional<Question> pending;
  SessionStatus status = SessionStatus::selecting;
  std::string rng_state;
  bool early_finish = false;
};

}  // namespace mcsort
