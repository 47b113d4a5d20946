#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mcsort::lp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, greater_equal, equal };
enum class Sense { maximize, minimize };
enum class Status { optimal, infeasible, unbounded, solver_failure };

const char* to_string(Status status);

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = infinity;
};

/// Sparse row: (variable index, coefficient) pairs.
using Terms = std::vector<std::pair<std::size_t, double>>;

struct Constraint {
  Terms terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  std::size_t add_variable(std::string name, double lower, double upper);
  void add_constraint(Terms terms, Relation relation, double rhs);
  void set_objective(Terms terms, Sense sense);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Terms& objective() const { return objective_; }
  Sense sense() const { return sense_; }

  std::size_t variable_count() const { return variables_.size(); }
  std::size_t find_variable(const std::string& name) const;

  /// Checks bounds and variable references; throws invalid_input.
  void validate() const;

  double evaluate_objective(const std::vector<double>& x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Terms objective_;
  Sense sense_ = Sense::maximize;
};

struct LpSolution {
  Status status = Status::solver_failure;
  double objective_value = 0.0;
  /// One entry per LinearProgram variable, in declaration order.
  std::vector<double> values;
  std::size_t iterations = 0;
  std::string message;

  bool optimal() const { return status == Status::optimal; }
};

struct SolverOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double pivot_tolerance = 1e-9;
  std::size_t max_iterations = 50000;
};

/// Deterministic two-phase primal simplex over bounded variables. The final
/// vertex is recomputed from the original data by factorizing the optimal
/// basis, so objective values are accurate to round-off.
LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// CPLEX-style LP text, for cross-checking with external solvers.
std::string to_lp_text(const LinearProgram& lp);

}  // namespace mcsort::lp
