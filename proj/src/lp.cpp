#include "mcsort/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mcsort/error.hpp"

namespace mcsort::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::solver_failure: return "solver_failure";
  }
  return "solver_failure";
}

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper) {
  variables_.push_back({std::move(name), lower, upper});
  return variables_.size() - 1;
}

void LinearProgram::add_constraint(Terms terms, Relation relation, double rhs) {
  constraints_.push_back({std::move(terms), relation, rhs});
}

void LinearProgram::set_objective(Terms terms, Sense sense) {
  objective_ = std::move(terms);
  sense_ = sense;
}

std::size_t LinearProgram::find_variable(const std::string& name) const {
  for (std::size_t k = 0; k < variables_.size(); ++k) {
    if (variables_[k].name == name) return k;
  }
  fail(ErrorCode::invalid_input, "no LP variable named '" + name + "'");
}

void LinearProgram::validate() const {
  for (const auto& v : variables_) {
    require(!std::isnan(v.lower) && !std::isnan(v.upper) && v.lower <= v.upper,
            "variable '" + v.name + "' has inconsistent bounds");
    require(v.lower < infinity && v.upper > -infinity,
            "variable '" + v.name + "' has an empty domain");
  }
  auto check_terms = [&](const Terms& terms) {
    for (const auto& [k, a] : terms) {
      require(k < variables_.size(), "term references an undeclared variable");
      require(std::isfinite(a), "non-finite coefficient");
    }
  };
  for (const auto& c : constraints_) {
    check_terms(c.terms);
    require(std::isfinite(c.rhs), "non-finite right-hand side");
  }
  check_terms(objective_);
}

double LinearProgram::evaluate_objective(const std::vector<double>& x) const {
  double total = 0.0;
  for (const auto& [k, a] : objective_) total += a * x[k];
  return total;
}

namespace {

enum class At : unsigned char { basic, lower, upper };

constexpr std::size_t kRefactorInterval = 50;

// Column of the internal standard form: x_var = shift + sign * x_col.
struct ColumnOrigin {
  std::size_t variable;
  double sign;
};

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolverOptions& options) : lp_(lp), opt_(options) {
    build();
  }

  LpSolution run();

 private:
  void build();
  bool refactor();
  std::vector<double> reduced_costs(const std::vector<double>& cost) const;
  // Returns optimal / unbounded / solver_failure (iteration cap).
  Status iterate(const std::vector<double>& cost);
  void pivot(std::size_t r, std::size_t s);
  bool drive_out_artificials();
  LpSolution extract(Status status);

  double& t(std::size_t i, std::size_t j) { return tableau_[i * cols_ + j]; }
  double t(std::size_t i, std::size_t j) const { return tableau_[i * cols_ + j]; }

  const LinearProgram& lp_;
  SolverOptions opt_;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t first_artificial_ = 0;
  std::vector<double> a_;  // original standard-form matrix, row-major
  std::vector<double> b_;
  std::vector<double> cap_;
  std::vector<double> cost_;  // phase-2 costs (minimization)
  double cost_constant_ = 0.0;
  std::vector<ColumnOrigin> origin_;  // only for structural columns
  std::vector<double> shift_;         // per original variable
  std::size_t structural_ = 0;

  std::vector<double> tableau_;
  std::vector<double> xb_;
  std::vector<std::size_t> basis_;
  std::vector<At> at_;
  std::size_t iterations_ = 0;
};

void Simplex::build() {
  const auto& vars = lp_.variables();
  shift_.assign(vars.size(), 0.0);
  std::vector<std::vector<std::pair<std::size_t, double>>> var_cols(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const auto& v = vars[k];
    if (std::isfinite(v.lower)) {
      shift_[k] = v.lower;
      var_cols[k].push_back({origin_.size(), 1.0});
      origin_.push_back({k, 1.0});
      cap_.push_back(v.upper - v.lower);
    } else if (std::isfinite(v.upper)) {
      shift_[k] = v.upper;
      var_cols[k].push_back({origin_.size(), -1.0});
      origin_.push_back({k, -1.0});
      cap_.push_back(infinity);
    } else {
      var_cols[k].push_back({origin_.size(), 1.0});
      origin_.push_back({k, 1.0});
      cap_.push_back(infinity);
      var_cols[k].push_back({origin_.size(), -1.0});
      origin_.push_back({k, -1.0});
      cap_.push_back(infinity);
    }
  }
  structural_ = origin_.size();

  const auto& cons = lp_.constraints();
  rows_ = cons.size();
  std::size_t slacks = 0;
  for (const auto& c : cons) slacks += c.relation == Relation::equal ? 0 : 1;
  first_artificial_ = structural_ + slacks;
  cols_ = first_artificial_ + rows_;
  cap_.resize(cols_, infinity);

  a_.assign(rows_ * cols_, 0.0);
  b_.assign(rows_, 0.0);
  std::size_t slack = structural_;
  // Rows whose slack enters with +1 after sign normalization start with the
  // slack basic; the others need an artificial.
  std::vector<std::size_t> start(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto& c = cons[i];
    double rhs = c.rhs;
    for (const auto& [k, coef] : c.terms) {
      rhs -= coef * shift_[k];
      for (const auto& [col, sign] : var_cols[k]) a_[i * cols_ + col] += coef * sign;
    }
    std::size_t own_slack = cols_;
    if (c.relation == Relation::less_equal) a_[i * cols_ + (own_slack = slack++)] = 1.0;
    if (c.relation == Relation::greater_equal) a_[i * cols_ + (own_slack = slack++)] = -1.0;
    if (rhs < 0.0) {
      for (std::size_t j = 0; j < first_artificial_; ++j) a_[i * cols_ + j] = -a_[i * cols_ + j];
      rhs = -rhs;
    }
    a_[i * cols_ + first_artificial_ + i] = 1.0;
    b_[i] = rhs;
    const bool slack_feasible = own_slack != cols_ && a_[i * cols_ + own_slack] == 1.0;
    start[i] = slack_feasible ? own_slack : first_artificial_ + i;
    if (slack_feasible) cap_[first_artificial_ + i] = 0.0;
  }

  cost_.assign(cols_, 0.0);
  const double direction = lp_.sense() == Sense::maximize ? -1.0 : 1.0;
  for (const auto& [k, coef] : lp_.objective()) {
    cost_constant_ += direction * coef * shift_[k];
    for (const auto& [col, sign] : var_cols[k]) cost_[col] += direction * coef * sign;
  }

  tableau_ = a_;
  xb_ = b_;
  basis_ = start;
  at_.assign(cols_, At::lower);
  for (std::size_t i = 0; i < rows_; ++i) at_[start[i]] = At::basic;
}

// Recomputes B^-1 A and the basic values from the original data.
bool Simplex::refactor() {
  if (rows_ == 0) return true;
  Eigen::MatrixXd basis(rows_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t r = 0; r < rows_; ++r) basis(i, r) = a_[i * cols_ + basis_[r]];
  }
  Eigen::VectorXd rhs(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    double v = b_[i];
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at_[j] == At::upper) v -= a_[i * cols_ + j] * cap_[j];
    }
    rhs(i) = v;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
  if (!lu.isInvertible()) return false;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> full(
      a_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> solved = lu.solve(full);
  Eigen::VectorXd values = lu.solve(rhs);
  std::copy(solved.data(), solved.data() + rows_ * cols_, tableau_.begin());
  for (std::size_t i = 0; i < rows_; ++i) xb_[i] = values(static_cast<Eigen::Index>(i));
  return true;
}

std::vector<double> Simplex::reduced_costs(const std::vector<double>& cost) const {
  std::vector<double> d = cost;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double cb = cost[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &tableau_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) d[j] -= cb * row[j];
  }
  return d;
}

void Simplex::pivot(std::size_t r, std::size_t s) {
  double* pivot_row = &tableau_[r * cols_];
  const double inv = 1.0 / pivot_row[s];
  for (std::size_t j = 0; j < cols_; ++j) pivot_row[j] *= inv;
  pivot_row[s] = 1.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * cols_];
    const double f = row[s];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * pivot_row[j];
    row[s] = 0.0;
  }
}

Status Simplex::iterate(const std::vector<double>& cost) {
  std::size_t degenerate_streak = 0;
  std::size_t since_refactor = 0;
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return Status::solver_failure;
    const auto d = reduced_costs(cost);
    const bool bland = degenerate_streak > 50;

    std::size_t entering = cols_;
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at_[j] == At::basic || cap_[j] == 0.0) continue;
      double score = 0.0;
      if (at_[j] == At::lower && d[j] < -opt_.optimality_tolerance) score = -d[j];
      if (at_[j] == At::upper && d[j] > opt_.optimality_tolerance) score = d[j];
      if (score == 0.0) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (score > best) {
        best = score;
        entering = j;
      }
    }
    if (entering == cols_) return Status::optimal;

    const double dir = at_[entering] == At::lower ? 1.0 : -1.0;
    // Harris ratio test: bound the step with the feasibility tolerance, then
    // take the largest pivot among the rows that block within that step.
    const double tol = opt_.feasibility_tolerance;
    auto ratio = [&](std::size_t i, double alpha, bool relaxed, bool& to_upper) {
      to_upper = false;
      if (alpha > opt_.pivot_tolerance) return (std::max(xb_[i], 0.0) + (relaxed ? tol : 0.0)) / alpha;
      if (alpha < -opt_.pivot_tolerance && std::isfinite(cap_[basis_[i]])) {
        to_upper = true;
        return (std::max(cap_[basis_[i]] - xb_[i], 0.0) + (relaxed ? tol : 0.0)) / -alpha;
      }
      return infinity;
    };
    double bound = infinity;
    for (std::size_t i = 0; i < rows_; ++i) {
      bool to_upper = false;
      bound = std::min(bound, ratio(i, dir * t(i, entering), true, to_upper));
    }
    double theta = cap_[entering];
    std::size_t leave = rows_;
    bool leave_to_upper = false;
    if (!(cap_[entering] <= bound)) {
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double alpha = dir * t(i, entering);
        bool to_upper = false;
        const double limit = ratio(i, alpha, false, to_upper);
        if (!(limit <= bound)) continue;
        bool take = leave == rows_;
        if (!take) {
          take = bland ? basis_[i] < basis_[leave]
                       : std::fabs(alpha) > std::fabs(leave_alpha) ||
                             (std::fabs(alpha) == std::fabs(leave_alpha) && basis_[i] < basis_[leave]);
        }
        if (take) {
          theta = limit;
          leave = i;
          leave_to_upper = to_upper;
          leave_alpha = alpha;
        }
      }
      if (leave == rows_) theta = infinity;
    }
    if (!std::isfinite(theta)) return Status::unbounded;

    ++iterations_;
    degenerate_streak = theta < 1e-12 ? degenerate_streak + 1 : 0;
    for (std::size_t i = 0; i < rows_; ++i) xb_[i] -= theta * dir * t(i, entering);

    if (leave == rows_) {
      at_[entering] = at_[entering] == At::lower ? At::upper : At::lower;
      continue;
    }
    const double start = at_[entering] == At::lower ? 0.0 : cap_[entering];
    const std::size_t leaving = basis_[leave];
    at_[leaving] = leave_to_upper ? At::upper : At::lower;
    pivot(leave, entering);
    basis_[leave] = entering;
    at_[entering] = At::basic;
    xb_[leave] = start + dir * theta;
    if (++since_refactor >= kRefactorInterval) {
      since_refactor = 0;
      if (!refactor()) return Status::solver_failure;
    }
  }
}

bool Simplex::drive_out_artificials() {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (basis_[r] < first_artificial_) continue;
    std::size_t best = cols_;
    double best_abs = 1e-7;
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (at_[j] == At::basic || cap_[j] == 0.0) continue;
      if (std::fabs(t(r, j)) > best_abs) {
        best_abs = std::fabs(t(r, j));
        best = j;
      }
    }
    if (best == cols_) continue;  // redundant row; the artificial stays basic, fixed at zero
    const double value = at_[best] == At::upper ? cap_[best] : 0.0;
    at_[basis_[r]] = At::lower;
    pivot(r, best);
    basis_[r] = best;
    at_[best] = At::basic;
    xb_[r] = value;
  }
  for (std::size_t j = first_artificial_; j < cols_; ++j) cap_[j] = 0.0;
  return refactor();
}

LpSolution Simplex::extract(Status status) {
  LpSolution out;
  out.status = status;
  out.iterations = iterations_;
  if (status != Status::optimal) return out;

  const auto& vars = lp_.variables();
  out.values.assign(vars.size(), 0.0);
  for (std::size_t k = 0; k < vars.size(); ++k) out.values[k] = shift_[k];
  std::vector<double> column_value(cols_);
  for (std::size_t j = 0; j < cols_; ++j) column_value[j] = at_[j] == At::upper ? cap_[j] : 0.0;
  for (std::size_t i = 0; i < rows_; ++i) column_value[basis_[i]] = xb_[i];
  for (std::size_t j = 0; j < structural_; ++j) {
    out.values[origin_[j].variable] += origin_[j].sign * column_value[j];
  }
  for (std::size_t k = 0; k < vars.size(); ++k) {
    double& v = out.values[k];
    const auto& var = vars[k];
    auto near = [v](double bound) {
      return std::isfinite(bound) && std::fabs(v - bound) <= 1e-12 * (1.0 + std::fabs(bound));
    };
    if (near(var.lower)) v = var.lower;
    if (near(var.upper)) v = var.upper;
    if (v < var.lower - 1e-9 || v > var.upper + 1e-9) {
      out.status = Status::solver_failure;
      out.message = fmt::format("variable '{}' = {} violates its bounds", var.name, v);
      return out;
    }
    v = std::clamp(v, var.lower, var.upper);
  }
  const auto& cons = lp_.constraints();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    double lhs = 0.0;
    for (const auto& [k, a] : cons[i].terms) lhs += a * out.values[k];
    const double r = lhs - cons[i].rhs;
    const bool violated = (cons[i].relation == Relation::less_equal && r > 1e-8) ||
                          (cons[i].relation == Relation::greater_equal && r < -1e-8) ||
                          (cons[i].relation == Relation::equal && std::fabs(r) > 1e-8);
    if (violated) {
      out.status = Status::solver_failure;
      out.message = fmt::format("constraint {} residual {} exceeds tolerance", i, r);
      return out;
    }
  }
  out.objective_value = lp_.evaluate_objective(out.values);
  return out;
}

LpSolution Simplex::run() {
  std::vector<double> phase_one(cols_, 0.0);
  for (std::size_t j = first_artificial_; j < cols_; ++j) phase_one[j] = 1.0;

  double scale = 1.0;
  for (double v : b_) scale = std::max(scale, std::fabs(v));

  auto status = iterate(phase_one);
  if (status != Status::optimal) {
    auto out = extract(Status::solver_failure);
    out.message = "phase one did not converge";
    return out;
  }
  if (!refactor()) {
    auto out = extract(Status::solver_failure);
    out.message = "singular basis after phase one";
    return out;
  }
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (basis_[i] >= first_artificial_) infeasibility += std::fabs(xb_[i]);
  }
  if (infeasibility > opt_.feasibility_tolerance * scale) return extract(Status::infeasible);
  if (!drive_out_artificials()) {
    auto out = extract(Status::solver_failure);
    out.message = "singular basis after removing artificials";
    return out;
  }

  for (int round = 0; round < 4; ++round) {
    status = iterate(cost_);
    if (status != Status::optimal) break;
    if (!refactor()) {
      status = Status::solver_failure;
      break;
    }
    // Resume only if the refreshed tableau reveals a genuinely improving column.
    const auto d = reduced_costs(cost_);
    bool improvable = false;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at_[j] == At::basic || cap_[j] == 0.0) continue;
      if ((at_[j] == At::lower && d[j] < -1e-9) || (at_[j] == At::upper && d[j] > 1e-9)) {
        improvable = true;
      }
    }
    bool primal_ok = true;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (xb_[i] < -1e-9 || xb_[i] > cap_[basis_[i]] + 1e-9) primal_ok = false;
    }
    if (!primal_ok) {
      status = Status::solver_failure;
      break;
    }
    if (!improvable) break;
  }
  auto out = extract(status);
  if (status == Status::solver_failure && out.message.empty()) {
    out.message = "simplex did not converge";
  }
  return out;
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  Simplex simplex(lp, options);
  return simplex.run();
}

std::string to_lp_text(const LinearProgram& lp) {
  std::ostringstream out;
  auto write_terms = [&](const Terms& terms) {
    bool first = true;
    for (const auto& [k, a] : terms) {
      if (a == 0.0) continue;
      out << (a < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
      out << fmt::format("{} {}", std::fabs(a), lp.variables()[k].name);
      first = false;
    }
    if (first) out << "0";
  };
  out << (lp.sense() == Sense::maximize ? "Maximize\n obj: " : "Minimize\n obj: ");
  write_terms(lp.objective());
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.constraints().size(); ++i) {
    const auto& c = lp.constraints()[i];
    out << " c" << i + 1 << ": ";
    write_terms(c.terms);
    const char* rel = c.relation == Relation::less_equal      ? " <= "
                      : c.relation == Relation::greater_equal ? " >= "
                                                              : " = ";
    out << rel << fmt::format("{}", c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : lp.variables()) {
    auto bound = [](double x) {
      if (x == infinity) return std::string("+inf");
      if (x == -infinity) return std::string("-inf");
      return fmt::format("{}", x);
    };
    out << ' ' << bound(v.lower) << " <= " << v.name << " <= " << bound(v.upper) << '\n';
  }
  out << "End\n";
  return out.str();
}

}  // namespace mcsort::lp
