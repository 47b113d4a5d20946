#include <cstring>
#include <random>

#include <doctest.h>

#include "mcsort/lp.hpp"
#include "test_support.hpp"

using namespace mcsort;
using mcsort::testing::error_code_of;

namespace {

// max c.x s.t. A x <= b, 0 <= x <= 10, with A >= 0 and b > 0 so x = 0 is feasible.
struct RandomProgram {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> c;
};

RandomProgram random_program(std::mt19937_64& rng, int n, int rows) {
  std::uniform_real_distribution<double> coef(0.0, 5.0);
  std::uniform_real_distribution<double> rhs(1.0, 20.0);
  std::uniform_real_distribution<double> obj(-1.0, 3.0);
  RandomProgram p;
  p.a.assign(rows, std::vector<double>(n));
  for (auto& row : p.a) {
    for (double& v : row) v = coef(rng);
  }
  for (int i = 0; i < rows; ++i) p.b.push_back(rhs(rng));
  for (int j = 0; j < n; ++j) p.c.push_back(obj(rng));
  return p;
}

lp::LinearProgram build(const RandomProgram& p) {
  lp::LinearProgram prog;
  for (std::size_t j = 0; j < p.c.size(); ++j) prog.add_variable("x" + std::to_string(j), 0.0, 10.0);
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    lp::Terms t;
    for (std::size_t j = 0; j < p.c.size(); ++j) t.emplace_back(j, p.a[i][j]);
    prog.add_constraint(t, lp::Relation::less_equal, p.b[i]);
  }
  lp::Terms obj;
  for (std::size_t j = 0; j < p.c.size(); ++j) obj.emplace_back(j, p.c[j]);
  prog.set_objective(obj, lp::Sense::maximize);
  return prog;
}

}  // namespace

TEST_SUITE("lp") {
  TEST_CASE("maximize a bounded variable with no constraints") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", 0.0, 1.0);
    p.set_objective({{x, 1.0}}, lp::Sense::maximize);
    const auto s = lp::solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == 1.0);
  }

  TEST_CASE("a constraint tighter than the bound binds") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", 0.0, 1.0);
    p.add_constraint({{x, 1.0}}, lp::Relation::less_equal, 0.5);
    p.set_objective({{x, 1.0}}, lp::Sense::maximize);
    const auto s = lp::solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("greater-equal constraint is tight at the minimum") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", 0.0, 3.0);
    const auto y = p.add_variable("y", 0.0, 3.0);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, lp::Relation::greater_equal, 2.0);
    p.set_objective({{x, 1.0}, {y, 1.0}}, lp::Sense::minimize);
    const auto s = lp::solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("the better objective coefficient takes the shared capacity") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", 0.0, 1.0);
    const auto y = p.add_variable("y", 0.0, lp::infinity);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, lp::Relation::less_equal, 3.0);
    p.set_objective({{x, 1.0}, {y, 2.0}}, lp::Sense::maximize);
    const auto s = lp::solve(p);
    REQUIRE(s.optimal());
    CHECK(s.values[x] == 0.0);
    CHECK(s.values[y] == doctest::Approx(3.0));
    CHECK(s.objective_value == doctest::Approx(6.0));
  }

  TEST_CASE("equality constraints and negative and free bounds") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", -3.0, 4.0);
    const auto y = p.add_variable("y", -lp::infinity, lp::infinity);
    const auto z = p.add_variable("z", -lp::infinity, 2.0);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, lp::Relation::equal, 1.0);
    p.add_constraint({{y, 1.0}, {z, -1.0}}, lp::Relation::equal, 0.0);
    p.set_objective({{x, 1.0}}, lp::Sense::minimize);
    const auto s = lp::solve(p);
    REQUIRE(s.optimal());
    // x = -3 forces y = 4, but z = y is capped at 2, so y = 2 and x = -1.
    CHECK(s.values[x] == doctest::Approx(-1.0));
    CHECK(s.values[y] == doctest::Approx(2.0));
    CHECK(s.values[z] == doctest::Approx(2.0));
  }

  TEST_CASE("infeasible and unbounded programs are reported") {
    lp::LinearProgram inf;
    const auto x = inf.add_variable("x", 0.0, 1.0);
    inf.add_constraint({{x, 1.0}}, lp::Relation::greater_equal, 2.0);
    inf.set_objective({{x, 1.0}}, lp::Sense::maximize);
    CHECK(lp::solve(inf).status == lp::Status::infeasible);

    lp::LinearProgram unb;
    const auto y = unb.add_variable("y", 0.0, lp::infinity);
    unb.set_objective({{y, 1.0}}, lp::Sense::maximize);
    CHECK(lp::solve(unb).status == lp::Status::unbounded);
  }

  TEST_CASE("malformed programs are rejected") {
    lp::LinearProgram p;
    p.add_variable("x", 2.0, 1.0);
    CHECK(error_code_of([&] { lp::solve(p); }) == ErrorCode::invalid_input);
    lp::LinearProgram q;
    q.add_variable("x", 0.0, 1.0);
    q.add_constraint({{5, 1.0}}, lp::Relation::less_equal, 1.0);
    CHECK(error_code_of([&] { lp::solve(q); }) == ErrorCode::invalid_input);
  }

  TEST_CASE("strong duality on random programs") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
      const int n = 2 + k % 5;
      const int rows = 1 + k % 4;
      const auto p = random_program(rng, n, rows);
      const auto primal = lp::solve(build(p));
      REQUIRE(primal.optimal());
      // min b.y + 10 sum(z) s.t. A'y + z >= c, y, z >= 0
      lp::LinearProgram dual;
      for (int i = 0; i < rows; ++i) dual.add_variable("y" + std::to_string(i), 0.0, lp::infinity);
      for (int j = 0; j < n; ++j) dual.add_variable("z" + std::to_string(j), 0.0, lp::infinity);
      for (int j = 0; j < n; ++j) {
        lp::Terms t;
        for (int i = 0; i < rows; ++i) t.emplace_back(i, p.a[i][j]);
        t.emplace_back(rows + j, 1.0);
        dual.add_constraint(t, lp::Relation::greater_equal, p.c[j]);
      }
      lp::Terms obj;
      for (int i = 0; i < rows; ++i) obj.emplace_back(i, p.b[i]);
      for (int j = 0; j < n; ++j) obj.emplace_back(rows + j, 10.0);
      dual.set_objective(obj, lp::Sense::minimize);
      const auto d = lp::solve(dual);
      REQUIRE(d.optimal());
      CHECK(primal.objective_value == doctest::Approx(d.objective_value).epsilon(1e-9));
    }
  }

  TEST_CASE("no random feasible point beats the reported optimum") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> box(0.0, 10.0);
    for (int k = 0; k < 10; ++k) {
      const auto p = random_program(rng, 3, 2);
      const auto s = lp::solve(build(p));
      REQUIRE(s.optimal());
      int feasible = 0;
      for (int trial = 0; trial < 10000; ++trial) {
        double x[3] = {box(rng), box(rng), box(rng)};
        // Shrink toward the origin until feasible; the origin always is.
        for (int shrink = 0; shrink < 60; ++shrink) {
          bool ok = true;
          for (std::size_t i = 0; i < p.a.size(); ++i) {
            double lhs = 0.0;
            for (int j = 0; j < 3; ++j) lhs += p.a[i][j] * x[j];
            ok = ok && lhs <= p.b[i];
          }
          if (ok) break;
          for (double& v : x) v *= 0.5;
        }
        ++feasible;
        double value = 0.0;
        for (int j = 0; j < 3; ++j) value += p.c[j] * x[j];
        CHECK(value <= s.objective_value + 1e-9);
      }
      CHECK(feasible == 10000);
    }
  }

  TEST_CASE("repeated solves are bit-identical") {
    const auto inst = mcsort::testing::credit_instance(credit_rating::initial_examples());
    const auto program = build_max_margin(inst);
    const auto first = lp::solve(program.lp);
    REQUIRE(first.optimal());
    for (int k = 0; k < 100; ++k) {
      const auto again = lp::solve(program.lp);
      REQUIRE(again.status == first.status);
      CHECK(std::memcmp(&again.objective_value, &first.objective_value, sizeof(double)) == 0);
      CHECK(again.values == first.values);
    }
  }

  TEST_CASE("LP text export names every variable and constraint") {
    lp::LinearProgram p;
    const auto x = p.add_variable("x", 0.0, 1.0);
    const auto y = p.add_variable("y", -lp::infinity, lp::infinity);
    p.add_constraint({{x, 1.0}, {y, -2.0}}, lp::Relation::greater_equal, 0.5);
    p.set_objective({{x, 1.0}}, lp::Sense::maximize);
    const auto text = lp::to_lp_text(p);
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("c1: 1 x - 2 y >= 0.5") != std::string::npos);
    CHECK(text.find("-inf <= y <= +inf") != std::string::npos);
  }
}
