#include "mcsort/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "mcsort/error.hpp"

namespace mcsort {

void PreferenceInstance::validate() const {
  require(matrix != nullptr, "instance has no decision matrix");
  require(scales.size() == matrix->criteria(), "one scale per criterion required");
  require(categories >= 2, "at least two categories required");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie strictly inside (0, 1)");
  require(epsilon_floor >= 0.0, "epsilon floor must be non-negative");
  require(!examples.empty(), "at least one assignment example is required");
  for (const auto& e : examples) {
    require(matrix->find(e.alternative_id).has_value(),
            "example references unknown alternative '" + e.alternative_id + "'");
    require(e.category >= 1 && e.category <= categories,
            fmt::format("category {} of '{}' outside 1..{}", e.category, e.alternative_id,
                        categories));
  }
}

PreferenceInstance PreferenceInstance::with_example(AssignmentExample example) const {
  PreferenceInstance copy = *this;
  copy.examples.push_back(std::move(example));
  return copy;
}

namespace {

// Comprehensive utility of one alternative as LP terms over breakpoint variables.
lp::Terms utility_terms(const PreferenceInstance& inst, const MaxMarginLayout& layout,
                        std::size_t alternative) {
  lp::Terms terms;
  const auto row = inst.matrix->row(alternative);
  for (std::size_t j = 0; j < inst.scales.size(); ++j) {
    const auto at = locate(inst.scales[j], row[j]);
    const std::size_t base = layout.utility_offset[j] + at.index;
    if (at.weight < 1.0) terms.emplace_back(base, 1.0 - at.weight);
    if (at.weight > 0.0) terms.emplace_back(base + 1, at.weight);
  }
  return terms;
}

lp::Terms with(lp::Terms terms, std::initializer_list<std::pair<std::size_t, double>> extra) {
  terms.insert(terms.end(), extra.begin(), extra.end());
  return terms;
}

double example_weight(const PreferenceInstance& inst) {
  return (1.0 - inst.alpha) / static_cast<double>(inst.examples.size());
}

// Shared constraint set of the max-margin family. The epsilon bounds are
// supplied by the caller.
MaxMarginProgram build_constraints(const PreferenceInstance& inst, double epsilon_lower,
                                   double epsilon_upper) {
  inst.validate();
  MaxMarginProgram out;
  auto& lp = out.lp;
  auto& layout = out.layout;
  const std::size_t m = inst.scales.size();
  const int q = inst.categories;
  const double threshold_cap = 2.0 * static_cast<double>(m);

  for (std::size_t j = 0; j < m; ++j) {
    layout.utility_offset.push_back(lp.variable_count());
    for (std::size_t l = 0; l < inst.scales[j].breakpoints.size(); ++l) {
      lp.add_variable(fmt::format("u_{}_{}", j + 1, l + 1), 0.0, 1.0);
    }
  }
  for (int h = 1; h < q; ++h) {
    layout.threshold.push_back(lp.add_variable(fmt::format("b_{}", h), 0.0, threshold_cap));
  }
  layout.epsilon = lp.add_variable("eps", epsilon_lower, epsilon_upper);
  for (std::size_t k = 0; k < inst.examples.size(); ++k) {
    layout.delta_plus.push_back(lp.add_variable(fmt::format("dplus_{}", k + 1), 0.0, lp::infinity));
    layout.delta_minus.push_back(
        lp.add_variable(fmt::format("dminus_{}", k + 1), 0.0, lp::infinity));
  }

  for (std::size_t k = 0; k < inst.examples.size(); ++k) {
    const auto& ex = inst.examples[k];
    const auto terms = utility_terms(inst, layout, inst.matrix->index_of(ex.alternative_id));
    const int c = ex.category;
    if (c > 1) {
      // U - b_{c-1} + delta+ >= 0
      lp.add_constraint(with(terms, {{layout.threshold[c - 2], -1.0}, {layout.delta_plus[k], 1.0}}),
                        lp::Relation::greater_equal, 0.0);
    }
    if (c < q) {
      // U - b_c + eps - delta- <= 0
      lp.add_constraint(with(terms, {{layout.threshold[c - 1], -1.0},
                                     {layout.epsilon, 1.0},
                                     {layout.delta_minus[k], -1.0}}),
                        lp::Relation::less_equal, 0.0);
    }
  }
  for (int h = 2; h < q; ++h) {
    lp.add_constraint({{layout.threshold[h - 1], 1.0},
                       {layout.threshold[h - 2], -1.0},
                       {layout.epsilon, -1.0}},
                      lp::Relation::greater_equal, 0.0);
  }
  if (inst.monotone_mode) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t base = layout.utility_offset[j];
      for (std::size_t l = 0; l + 1 < inst.scales[j].breakpoints.size(); ++l) {
        lp.add_constraint({{base + l + 1, 1.0}, {base + l, -1.0}}, lp::Relation::greater_equal,
                          0.0);
      }
    }
  }
  return out;
}

lp::Terms max_margin_objective_terms(const PreferenceInstance& inst, const MaxMarginLayout& layout) {
  lp::Terms objective{{layout.epsilon, inst.alpha}};
  const double w = example_weight(inst);
  for (std::size_t k = 0; k < inst.examples.size(); ++k) {
    objective.emplace_back(layout.delta_plus[k], -w);
    objective.emplace_back(layout.delta_minus[k], -w);
  }
  return objective;
}

UtilityModel extract_model(const PreferenceInstance& inst, const MaxMarginLayout& layout,
                           const std::vector<double>& x) {
  UtilityModel model;
  model.scales = inst.scales;
  model.monotone_mode = inst.monotone_mode;
  for (std::size_t j = 0; j < inst.scales.size(); ++j) {
    const std::size_t count = inst.scales[j].breakpoints.size();
    const auto first = x.begin() + static_cast<long>(layout.utility_offset[j]);
    model.breakpoint_utilities.emplace_back(first, first + static_cast<long>(count));
  }
  model.thresholds.assign(static_cast<std::size_t>(inst.categories) + 1, 0.0);
  for (int h = 1; h < inst.categories; ++h) model.thresholds[h] = x[layout.threshold[h - 1]];
  model.epsilon = x[layout.epsilon];
  set_display_thresholds(model);
  return model;
}

std::vector<Slack> extract_slacks(const MaxMarginLayout& layout, const std::vector<double>& x,
                                  double& total) {
  std::vector<Slack> slacks;
  total = 0.0;
  for (std::size_t k = 0; k < layout.delta_plus.size(); ++k) {
    Slack s{x[layout.delta_plus[k]], x[layout.delta_minus[k]]};
    total += s.plus + s.minus;
    slacks.push_back(s);
  }
  return slacks;
}

[[noreturn]] void solver_error(const char* model, const lp::LpSolution& sol) {
  fail(ErrorCode::solver_failure,
       fmt::format("{} model: solver returned {}{}{}", model, lp::to_string(sol.status),
                   sol.message.empty() ? "" : ": ", sol.message));
}

}  // namespace

MaxMarginProgram build_max_margin(const PreferenceInstance& instance) {
  const double cap = static_cast<double>(instance.scales.size()) / (instance.categories - 1);
  require(instance.epsilon_floor <= cap, "epsilon floor exceeds the margin cap m/(q-1)");
  auto program = build_constraints(instance, instance.epsilon_floor, cap);
  program.lp.set_objective(max_margin_objective_terms(instance, program.layout),
                           lp::Sense::maximize);
  return program;
}

InferenceOutcome fit(const PreferenceInstance& instance) {
  const auto program = build_max_margin(instance);
  const auto sol = lp::solve(program.lp);
  if (!sol.optimal()) solver_error("max-margin", sol);
  InferenceOutcome out;
  out.model = extract_model(instance, program.layout, sol.values);
  out.objective = sol.objective_value;
  out.epsilon = sol.values[program.layout.epsilon];
  out.slacks = extract_slacks(program.layout, sol.values, out.inconsistency);
  return out;
}

RefinedOutcome refine_complexity(const PreferenceInstance& instance,
                                 const InferenceOutcome& outcome) {
  auto program = build_max_margin(instance);
  auto& lp = program.lp;
  const auto& layout = program.layout;

  // Optimal-value preservation. The max-margin objective can never exceed J*,
  // so a one-sided constraint with a round-off allowance is equivalent.
  const double allowance = 1e-9 * (1.0 + std::fabs(outcome.objective));
  lp.add_constraint(max_margin_objective_terms(instance, layout), lp::Relation::greater_equal,
                    outcome.objective - allowance);

  lp::Terms objective;
  for (std::size_t j = 0; j < instance.scales.size(); ++j) {
    const auto& bp = instance.scales[j].breakpoints;
    const std::size_t base = layout.utility_offset[j];
    for (std::size_t l = 1; l + 1 < bp.size(); ++l) {
      const double left = 1.0 / (bp[l] - bp[l - 1]);
      const double right = 1.0 / (bp[l + 1] - bp[l]);
      // slope change = right * (u_{l+1} - u_l) - left * (u_l - u_{l-1})
      const lp::Terms change{{base + l + 1, right}, {base + l, -right - left}, {base + l - 1, left}};
      const std::size_t gamma =
          lp.add_variable(fmt::format("gamma_{}_{}", j + 1, l + 1), 0.0, lp::infinity);
      lp.add_constraint(with(change, {{gamma, -1.0}}), lp::Relation::less_equal, 0.0);
      lp::Terms negated;
      for (const auto& [k, a] : change) negated.emplace_back(k, -a);
      lp.add_constraint(with(negated, {{gamma, -1.0}}), lp::Relation::less_equal, 0.0);
      objective.emplace_back(gamma, 1.0);
    }
  }
  lp.set_objective(objective, lp::Sense::minimize);

  const auto sol = lp::solve(lp);
  if (!sol.optimal()) {
    fail(ErrorCode::internal,
         fmt::format("complexity model unexpectedly {} (J* = {}, {} examples){}{}",
                     lp::to_string(sol.status), outcome.objective, instance.examples.size(),
                     sol.message.empty() ? "" : ": ", sol.message));
  }
  RefinedOutcome out;
  out.model = extract_model(instance, layout, sol.values);
  out.epsilon = sol.values[layout.epsilon];
  out.slacks = extract_slacks(layout, sol.values, out.inconsistency);
  out.objective =instance.alpha * out.epsilon - example_weight(instance) * out.inconsistency;
  out.slope_change = sol.objective_value;
  return out;
}

FittedModel fit_and_refine(const PreferenceInstance& instance) {
  FittedModel out;
  out.max_margin = fit(instance);
  out.refined = refine_complexity(instance, out.max_margin);
  return out;
}

InferenceOutcome fit_min_inconsistency(const PreferenceInstance& instance, double margin) {
  require(margin > 0.0, "inconsistency margin must be positive");
  auto program = build_constraints(instance, margin, margin);
  lp::Terms objective;
  for (std::size_t k = 0; k < instance.examples.size(); ++k) {
    objective.emplace_back(program.layout.delta_plus[k], 1.0);
    objective.emplace_back(program.layout.delta_minus[k], 1.0);
  }
  program.lp.set_objective(objective, lp::Sense::minimize);
  const auto sol = lp::solve(program.lp);
  if (!sol.optimal()) solver_error("minimum-inconsistency", sol);
  InferenceOutcome out;
  out.model = extract_model(instance, program.layout, sol.values);
  out.epsilon = margin;
  out.slacks = extract_slacks(program.layout, sol.values, out.inconsistency);
  out.objective = sol.objective_value;
  return out;
}

double min_inconsistency(const PreferenceInstance& instance, double margin) {
  return fit_min_inconsistency(instance, margin).objective;
}

double total_slope_change(const UtilityModel& model) {
  double total = 0.0;
  for (std::size_t j = 0; j < model.scales.size(); ++j) {
    const auto& bp = model.scales[j].breakpoints;
    const auto& u = model.breakpoint_utilities[j];
    for (std::size_t l = 1; l + 1 < bp.size(); ++l) {
      const double right = (u[l + 1] - u[l]) / (bp[l + 1] - bp[l]);
      const double left = (u[l] - u[l - 1]) / (bp[l] - bp[l - 1]);
      total += std::fabs(right - left);
    }
  }
  return total;
}

double max_margin_objective(const PreferenceInstance& instance, const UtilityModel& model) {
  const int q = instance.categories;
  double slack = 0.0;
  for (const auto& ex : instance.examples) {
    const double u =
        comprehensive_utility(model, instance.matrix->row(instance.matrix->index_of(ex.alternative_id)));
    if (ex.category > 1) slack += std::max(0.0, model.thresholds[ex.category - 1] - u);
    if (ex.category < q) slack += std::max(0.0, u - model.thresholds[ex.category] + model.epsilon);
  }
  return instance.alpha * model.epsilon - example_weight(instance) * slack;
}

}  // namespace mcsort
