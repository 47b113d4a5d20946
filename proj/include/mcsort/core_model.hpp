#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mcsort {

/// n alternatives evaluated on m criteria. Row-major performance grid.
class DecisionMatrix {
 public:
  DecisionMatrix() = default;
  DecisionMatrix(std::vector<std::string> alternative_ids,
                 std::vector<std::string> criterion_names,
                 std::vector<std::vector<double>> performances);

  std::size_t alternatives() const { return ids_.size(); }
  std::size_t criteria() const { return names_.size(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& criterion_names() const { return names_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }

  double at(std::size_t i, std::size_t j) const { return values_[i * names_.size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * names_.size(), names_.size()};
  }
  std::vector<double> column(std::size_t j) const;

  /// Position of an alternative, or nullopt when the id is unknown.
  std::optional<std::size_t> find(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Equally spaced characteristic points over a criterion's observed range.
/// A constant column yields a single breakpoint.
struct CriterionScale {
  std::vector<double> breakpoints;
  int subinterval_count = 1;

  double lower() const { return breakpoints.front(); }
  double upper() const { return breakpoints.back(); }
  bool degenerate() const { return breakpoints.size() == 1; }
};

/// Adjacent-breakpoint interpolation weights for one performance level:
/// value = (1 - weight) * u[index] + weight * u[index + 1].
struct Interpolation {
  std::size_t index = 0;
  double weight = 0.0;
};

Interpolation locate(const CriterionScale& scale, double x);

struct UtilityModel {
  std::vector<CriterionScale> scales;
  std::vector<std::vector<double>> breakpoint_utilities;
  /// b_0..b_q. Only b_1..b_{q-1} drive assignment; b_0 and b_q are display values.
  std::vector<double> thresholds;
  double epsilon = 0.0;
  bool monotone_mode = false;

  int categories() const { return static_cast<int>(thresholds.size()) - 1; }
};

struct NormalizedModel {
  std::vector<std::vector<double>> normalized_utilities;
  std::vector<double> normalized_thresholds;
  double epsilon_s = 0.0;
  /// Affine map U -> (U - offset) / scale taking comprehensive utilities into
  /// the normalized space.
  double offset = 0.0;
  double scale = 1.0;
};

struct AssignmentExample {
  std::string alternative_id;
  int category = 1;

  bool operator==(const AssignmentExample&) const = default;
};

std::vector<CriterionScale> build_scales(const DecisionMatrix& matrix,
                                         std::span<const int> subinterval_counts);

double marginal_utility(const CriterionScale& scale, std::span<const double> utilities,
                        double x);

double comprehensive_utility(const UtilityModel& model, std::span<const double> row);

/// Utilities within this distance below a threshold count as reaching it, so
/// that alternatives the LP placed exactly on a boundary stay in the category
/// the constraint intended.
inline constexpr double kBoundaryTolerance = 1e-9;
/// Smallest utility range that normalization accepts.
inline constexpr double kFlatTolerance = 1e-9;

/// Half-open intervals [b_{h-1}, b_h); anything below b_1 is category 1 and
/// anything at or above b_{q-1} is category q.
int assign_category(const UtilityModel& model, double u_value);
int assign_category(std::span<const double> thresholds, double u_value);

/// Sets b_0 = sum of per-criterion minima and b_q = sum of maxima + epsilon.
void set_display_thresholds(UtilityModel& model);

NormalizedModel normalize(const UtilityModel& model);
/// Empty instead of throwing when every marginal utility is flat.
std::optional<NormalizedModel> try_normalize(const UtilityModel& model);

/// Category of every alternative of the matrix under the model.
std::vector<int> assign_all(const UtilityModel& model, const DecisionMatrix& matrix);

}  // namespace mcsort
