#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mcsort/session.hpp"
#include "mcsort/strategy.hpp"

namespace mcsort {

struct ReplicationOptions {
  Strategy strategy;
  bool monotone_mode = false;
  /// Stop on accuracy over the non-reference firms instead of the budget.
  std::optional<double> target_accuracy;
  int jobs = 1;
};

struct ReplicationStep {
  Question question;
  int answer = 0;
};

struct ReplicationReport {
  std::vector<ReplicationStep> steps;
  FinalResult final;
  int correct = 0;  // over all twenty firms
  double max_margin_objective = 0.0;
};

/// Runs the credit-rating example with a simulated decision maker who
/// answers every question with the firm's reference rating.
ReplicationReport replicate_credit_example(const ReplicationOptions& options);

/// Largest absolute difference between computed and published objective
/// rows; `missing` collects published ids absent from the selection.
double max_deviation(const SelectionResult& selection,
                     const std::vector<std::pair<std::string, std::array<double, 4>>>& published,
                     std::vector<std::string>* missing = nullptr);

}  // namespace mcsort
