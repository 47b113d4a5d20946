#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "mcsort/core_model.hpp"
#include "mcsort/lp.hpp"

namespace mcsort {

/// Everything the max-margin model needs for one solve.
struct PreferenceInstance {
  std::shared_ptr<const DecisionMatrix> matrix;
  std::vector<CriterionScale> scales;
  std::vector<AssignmentExample> examples;
  int categories = 2;
  double alpha = 0.1;
  bool monotone_mode = false;
  double epsilon_floor = 0.0;

  void validate() const;
  /// Copy with one extra example appended.
  PreferenceInstance with_example(AssignmentExample example) const;
};

/// Column positions of the max-margin variables inside the LP.
struct MaxMarginLayout {
  std::vector<std::size_t> utility_offset;  // first breakpoint variable per criterion
  std::vector<std::size_t> threshold;       // b_1..b_{q-1}
  std::size_t epsilon = 0;
  std::vector<std::size_t> delta_plus;
  std::vector<std::size_t> delta_minus;
};

struct MaxMarginProgram {
  lp::LinearProgram lp;
  MaxMarginLayout layout;
};

struct Slack {
  double plus = 0.0;
  double minus = 0.0;
};

struct InferenceOutcome {
  UtilityModel model;
  double objective = 0.0;
  double epsilon = 0.0;
  std::vector<Slack> slacks;
  double inconsistency = 0.0;

  bool consistent() const { return inconsistency == 0.0; }
};

/// Result of the slope-change minimization run on top of a max-margin optimum.
struct RefinedOutcome {
  UtilityModel model;
  double objective = 0.0;  // max-margin objective of the refined solution
  double epsilon = 0.0;
  std::vector<Slack> slacks;
  double inconsistency = 0.0;
  double slope_change = 0.0;
};

/// Both stages, as used for final sorting.
struct FittedModel {
  InferenceOutcome max_margin;
  RefinedOutcome refined;
};

inline constexpr double kDefaultInconsistencyMargin = 1e-4;

MaxMarginProgram build_max_margin(const PreferenceInstance& instance);

InferenceOutcome fit(const PreferenceInstance& instance);

RefinedOutcome refine_complexity(const PreferenceInstance& instance,
                                 const InferenceOutcome& outcome);

FittedModel fit_and_refine(const PreferenceInstance& instance);

/// Minimal total slack with the margin pinned to `margin`. The outcome's
/// objective is that total.
InferenceOutcome fit_min_inconsistency(const PreferenceInstance& instance,
                                       double margin = kDefaultInconsistencyMargin);
double min_inconsistency(const PreferenceInstance& instance,
                         double margin = kDefaultInconsistencyMargin);

/// Sum over interior breakpoints of |slope change| of the marginal utilities.
double total_slope_change(const UtilityModel& model);

/// The max-margin objective of a given model on the instance, with each
/// slack set to the smallest value satisfying its constraint.
double max_margin_objective(const PreferenceInstance& instance, const UtilityModel& model);

}  // namespace mcsort
