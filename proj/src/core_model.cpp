#include "mcsort/core_model.hpp"

#include <algorithm>
#include <cmath>

#include "mcsort/error.hpp"

namespace mcsort {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::state_conflict: return "state_conflict";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::degenerate_model: return "degenerate_model";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

DecisionMatrix::DecisionMatrix(std::vector<std::string> alternative_ids,
                               std::vector<std::string> criterion_names,
                               std::vector<std::vector<double>> performances)
    : ids_(std::move(alternative_ids)), names_(std::move(criterion_names)) {
  require(!ids_.empty(), "decision matrix needs at least one alternative");
  require(!names_.empty(), "decision matrix needs at least one criterion");
  require(performances.size() == ids_.size(), "performance row count does not match ids");
  values_.reserve(ids_.size() * names_.size());
  for (std::size_t i = 0; i < performances.size(); ++i) {
    require(performances[i].size() == names_.size(),
            "row " + std::to_string(i + 1) + " has " + std::to_string(performances[i].size()) +
                " values, expected " + std::to_string(names_.size()));
    for (double v : performances[i]) {
      require(std::isfinite(v), "non-finite performance level for " + ids_[i]);
      values_.push_back(v);
    }
    auto [it, inserted] = index_.emplace(ids_[i], i);
    require(inserted, "duplicate alternative id '" + ids_[i] + "'");
  }
}

std::vector<double> DecisionMatrix::column(std::size_t j) const {
  std::vector<double> out(alternatives());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, j);
  return out;
}

std::optional<std::size_t> DecisionMatrix::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t DecisionMatrix::index_of(const std::string& id) const {
  auto found = find(id);
  require(found.has_value(), "unknown alternative '" + id + "'");
  return *found;
}

std::vector<CriterionScale> build_scales(const DecisionMatrix& matrix,
                                         std::span<const int> subinterval_counts) {
  require(matrix.alternatives() > 0 && matrix.criteria() > 0, "empty decision matrix");
  require(subinterval_counts.size() == matrix.criteria(),
          "need one subinterval count per criterion");
  std::vector<CriterionScale> scales;
  scales.reserve(matrix.criteria());
  for (std::size_t j = 0; j < matrix.criteria(); ++j) {
    const int s = subinterval_counts[j];
    require(s >= 1, "subinterval count must be positive");
    auto col = matrix.column(j);
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    CriterionScale scale;
    scale.subinterval_count = s;
    if (*lo == *hi) {
      scale.breakpoints = {*lo};
    } else {
      scale.breakpoints.resize(static_cast<std::size_t>(s) + 1);
      for (int l = 0; l <= s; ++l) {
        scale.breakpoints[l] = *lo + (static_cast<double>(l) / s) * (*hi - *lo);
      }
      scale.breakpoints.back() = *hi;
    }
    scales.push_back(std::move(scale));
  }
  return scales;
}

Interpolation locate(const CriterionScale& scale, double x) {
  const auto& bp = scale.breakpoints;
  if (bp.size() == 1 || x <= bp.front()) return {0, 0.0};
  const std::size_t last_interval = bp.size() - 2;
  if (x >= bp.back()) return {last_interval, 1.0};
  auto it = std::upper_bound(bp.begin(), bp.end(), x);
  std::size_t l = static_cast<std::size_t>(it - bp.begin()) - 1;
  l = std::min(l, last_interval);
  return {l, (x - bp[l]) / (bp[l + 1] - bp[l])};
}

double marginal_utility(const CriterionScale& scale, std::span<const double> utilities,
                        double x) {
  const auto at = locate(scale, x);
  if (at.weight == 0.0) return utilities[at.index];
  if (at.weight == 1.0) return utilities[at.index + 1];
  return utilities[at.index] + at.weight * (utilities[at.index + 1] - utilities[at.index]);
}

double comprehensive_utility(const UtilityModel& model, std::span<const double> row) {
  require(row.size() == model.scales.size(), "performance row length does not match model");
  double total = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    total += marginal_utility(model.scales[j], model.breakpoint_utilities[j], row[j]);
  }
  return total;
}

int assign_category(std::span<const double> thresholds, double u_value) {
  const int q = static_cast<int>(thresholds.size()) - 1;
  int h = 1;
  while (h < q && u_value >= thresholds[h] - kBoundaryTolerance) ++h;
  return h;
}

int assign_category(const UtilityModel& model, double u_value) {
  return assign_category(model.thresholds, u_value);
}

namespace {

struct Extremes {
  double low_sum = 0.0;
  double high_sum = 0.0;
  std::vector<double> low;
};

Extremes extremes(const UtilityModel& model) {
  Extremes e;
  for (const auto& u : model.breakpoint_utilities) {
    auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    e.low.push_back(*lo);
    e.low_sum += *lo;
    e.high_sum += *hi;
  }
  return e;
}

}  // namespace

void set_display_thresholds(UtilityModel& model) {
  const auto e = extremes(model);
  model.thresholds.front() = e.low_sum;
  model.thresholds.back() = e.high_sum + model.epsilon;
}

NormalizedModel normalize(const UtilityModel& model) {
  const auto e = extremes(model);
  const double denominator = e.high_sum - e.low_sum;
  if (!(denominator > kFlatTolerance)) {
    fail(ErrorCode::degenerate_model, "every marginal utility function is flat; cannot normalize");
  }
  NormalizedModel out;
  out.offset = e.low_sum;
  out.scale = denominator;
  out.epsilon_s = model.epsilon / denominator;
  for (std::size_t j = 0; j < model.breakpoint_utilities.size(); ++j) {
    std::vector<double> f;
    f.reserve(model.breakpoint_utilities[j].size());
    for (double u : model.breakpoint_utilities[j]) f.push_back((u - e.low[j]) / denominator);
    out.normalized_utilities.push_back(std::move(f));
  }
  const int q = model.categories();
  out.normalized_thresholds.resize(model.thresholds.size());
  out.normalized_thresholds[0] = 0.0;
  for (int h = 1; h < q; ++h) {
    out.normalized_thresholds[h] = (model.thresholds[h] - e.low_sum) / denominator;
  }
  out.normalized_thresholds[q] = 1.0 + out.epsilon_s;
  return out;
}

std::optional<NormalizedModel> try_normalize(const UtilityModel& model) {
  const auto e = extremes(model);
  if (!(e.high_sum - e.low_sum > kFlatTolerance)) return std::nullopt;
  return normalize(model);
}

std::vector<int> assign_all(const UtilityModel& model, const DecisionMatrix& matrix) {
  std::vector<int> out(matrix.alternatives());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = assign_category(model, comprehensive_utility(model, matrix.row(i)));
  }
  return out;
}

}  // namespace mcsort
