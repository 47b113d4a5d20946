#include "mcsort/replication.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcsort/credit_rating.hpp"

namespace mcsort {

ReplicationReport replicate_credit_example(const ReplicationOptions& options) {
  auto matrix = std::make_shared<const DecisionMatrix>(credit_rating::matrix());
  const auto labels = credit_rating::labels();
  SessionConfig config;
  config.strategy = options.strategy;
  config.alpha = credit_rating::kAlpha;
  config.subinterval_counts.assign(matrix->criteria(), credit_rating::kSubintervals);
  config.categories = credit_rating::kCategories;
  config.monotone_mode = options.monotone_mode;
  config.jobs = options.jobs;
  config.labels = labels;
  if (options.target_accuracy) {
    config.termination = TargetAccuracy{*options.target_accuracy, {}};
  } else {
    config.termination = BudgetT{credit_rating::kBudget};
  }

  auto session = Session::start(matrix, credit_rating::initial_examples(), config);
  ReplicationReport report;
  while (auto question = session.next_question()) {
    const int answer = labels[question->alternative_index];
    session.submit_answer(question->alternative_id, answer);
    report.steps.push_back({std::move(*question), answer});
  }
  report.final = session.finalize();
  report.max_margin_objective = report.final.fitted.max_margin.objective;
  report.correct = static_cast<int>(std::lround(*report.final.accuracy_all * labels.size()));
  return report;
}

double max_deviation(const SelectionResult& selection,
                     const std::vector<std::pair<std::string, std::array<double, 4>>>& published,
                     std::vector<std::string>* missing) {
  double worst = 0.0;
  for (const auto& [id, values] : published) {
    auto it = std::find_if(selection.scores.begin(), selection.scores.end(),
                           [&](const CandidateScore& s) { return s.alternative_id == id; });
    if (it == selection.scores.end() || it->info.size() != values.size()) {
      if (missing != nullptr) missing->push_back(id);
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t h = 0; h < values.size(); ++h) {
      worst = std::max(worst, std::fabs(it->info[h] - values[h]));
    }
  }
  return worst;
}

}  // namespace mcsort
