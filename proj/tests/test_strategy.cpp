#include <cmath>
#include <map>
#include <random>

#include <doctest.h>

#include "mcsort/strategy.hpp"
#include "test_support.hpp"

using namespace mcsort;
using mcsort::testing::credit_instance;
using mcsort::testing::error_code_of;

namespace {

std::vector<std::size_t> non_reference(const PreferenceInstance& inst) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < inst.matrix->alternatives(); ++i) {
    bool reference = false;
    for (const auto& e : inst.examples) reference |= e.alternative_id == inst.matrix->id(i);
    if (!reference) out.push_back(i);
  }
  return out;
}

std::vector<InfoVector> published_vectors() {
  std::vector<InfoVector> out;
  for (const auto& [id, v] : credit_rating::published_first_round()) {
    out.push_back({id, std::vector<double>(v.begin(), v.end())});
  }
  return out;
}

}  // namespace

TEST_SUITE("strategy") {
  TEST_CASE("softmax of (0, ln 2) is (1/3, 2/3)") {
    const std::vector<double> v{0.0, std::log(2.0)};
    const auto p = transform_softmax(v);
    CHECK(p.probabilities[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p.probabilities[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    // The temperature scales the exponent: e^(2 ln 2) = 4 gives (1/5, 4/5).
    CHECK(transform_softmax(v, 2.0).probabilities[1] == doctest::Approx(0.8).epsilon(1e-14));
    const std::vector<double> w{0.0, 2.0 * std::log(2.0)};
    CHECK(transform_softmax(w, 0.5).probabilities[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("softmax is unaffected by a common shift") {
    const std::vector<double> v{1000.0, 1001.0, 999.5};
    const std::vector<double> w{0.0, 1.0, -0.5};
    const auto p = transform_softmax(v);
    const auto q = transform_softmax(w);
    for (int h = 0; h < 3; ++h) CHECK(p.probabilities[h] == doctest::Approx(q.probabilities[h]));
  }

  TEST_CASE("relu normalizes the positive parts") {
    const std::vector<double> v{0.2, -0.1, 0.3};
    const auto p = transform_relu(v);
    CHECK(p.probabilities[0] == doctest::Approx(0.4));
    CHECK(p.probabilities[1] == 0.0);
    CHECK(p.probabilities[2] == doctest::Approx(0.6));
    const std::vector<double> none{-1.0, 0.0, -2.0, -0.5};
    for (double x : transform_relu(none).probabilities) CHECK(x == 0.25);
  }

  TEST_CASE("information metrics on small vectors") {
    CHECK(ia_entropy({{0.5, 0.5}}) == doctest::Approx(std::log(2.0)));
    CHECK(ia_entropy({{1.0, 0.0, 0.0}}) == 0.0);
    CHECK(ia_least_confidence({{0.4, 0.2, 0.2, 0.2}}) == doctest::Approx(0.6));
    CHECK(ia_margin({{0.7, 0.2, 0.1}}) == doctest::Approx(-0.5));
    CHECK(ia_margin({{0.1, 0.7, 0.2}}) == doctest::Approx(-0.5));
    const std::vector<double> v{0.1, 0.2, 0.3};
    CHECK(ia_sum(v) == doctest::Approx(0.6));
    CHECK(error_code_of([] { ia_margin({{1.0}}); }) == ErrorCode::invalid_input);
  }

  TEST_CASE("consistency degree against each category") {
    UtilityModel model;
    model.thresholds = {0.0, 0.3, 0.6, 1.0};
    model.epsilon = 0.01;
    const auto phi = consistency_degree(model, 0.4);
    REQUIRE(phi.size() == 3);
    CHECK(phi[0] == doctest::Approx(-0.11));
    CHECK(phi[1] == doctest::Approx(0.1));
    CHECK(phi[2] == doctest::Approx(-0.2));
  }

  TEST_CASE("argmax ties within 1e-12 go to the earliest position") {
    const std::vector<double> s{0.5, 0.5 + 5e-13, 0.4};
    CHECK(argmax_first(s) == 0);
    const std::vector<double> t{0.5, 0.5 + 1e-9, 0.4};
    CHECK(argmax_first(t) == 1);
  }

  TEST_CASE("strategy names round trip") {
    for (auto k : {StrategyKind::SM, StrategyKind::ER, StrategyKind::ES, StrategyKind::LR,
                   StrategyKind::LS, StrategyKind::MR, StrategyKind::MS, StrategyKind::RAND,
                   StrategyKind::PES, StrategyKind::PLS, StrategyKind::PMS}) {
      CHECK(parse_strategy(to_string(k)) == k);
    }
    CHECK(error_code_of([] { parse_strategy("XYZ"); }) == ErrorCode::invalid_input);
  }

  TEST_CASE("entropy strategy on the published first-round vectors picks a17") {
    const auto m = credit_rating::matrix();
    const auto vectors = published_vectors();
    const auto sel = select_from_vectors({StrategyKind::ES}, m, vectors);
    CHECK(sel.chosen == "a17");
    CHECK(sel.chosen_index == 16);
    REQUIRE(sel.scores.size() == 16);
    // Published information amount of a17.
    for (const auto& s : sel.scores) {
      if (s.alternative_id == "a17") CHECK(s.score == doctest::Approx(1.386293).epsilon(5e-7));
    }
  }

  TEST_CASE("sum strategy scores by the total of the vector") {
    const auto m = credit_rating::matrix();
    const auto vectors = published_vectors();
    const auto sel = select_from_vectors({StrategyKind::SM}, m, vectors);
    std::string best;
    double best_total = -1.0;
    for (const auto& v : vectors) {
      const double total = v.values[0] + v.values[1] + v.values[2] + v.values[3];
      if (total > best_total + 1e-12) {
        best_total = total;
        best = v.alternative_id;
      }
      for (const auto& s : sel.scores) {
        if (s.alternative_id == v.alternative_id) CHECK(s.score == doctest::Approx(total));
      }
    }
    CHECK(sel.chosen == best);
  }

  TEST_CASE("information vectors do not depend on the thread count") {
    const auto inst = credit_instance(credit_rating::initial_examples());
    const auto candidates = non_reference(inst);
    const auto one = info_vectors(inst, candidates, 1);
    const auto four = info_vectors(inst, candidates, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t k = 0; k < one.size(); ++k) {
      CHECK(one[k].alternative_id == four[k].alternative_id);
      CHECK(one[k].values == four[k].values);
    }
  }

  TEST_CASE("reference alternatives cannot be candidates") {
    const auto inst = credit_instance(credit_rating::initial_examples());
    const std::vector<std::size_t> bad{2};  // a3 is a reference
    CHECK(error_code_of([&] { info_vectors(inst, bad); }) == ErrorCode::invalid_input);
    std::mt19937_64 rng(1);
    const std::vector<std::size_t> none;
    CHECK(error_code_of([&] { select({StrategyKind::ES}, inst, none, nullptr, rng); }) ==
          ErrorCode::invalid_input);
  }

  TEST_CASE("probabilistic strategies need a fitted model") {
    const auto inst = credit_instance(credit_rating::initial_examples());
    const auto candidates = non_reference(inst);
    std::mt19937_64 rng(1);
    CHECK(error_code_of([&] { select({StrategyKind::PES}, inst, candidates, nullptr, rng); }) ==
          ErrorCode::invalid_input);
    const auto fitted = fit_and_refine(inst);
    const auto sel = select({StrategyKind::PES}, inst, candidates, &fitted.refined.model, rng);
    REQUIRE(sel.scores.size() == candidates.size());
    for (const auto& s : sel.scores) {
      CHECK(s.info.size() == 4);
      CHECK(s.probabilities.size() == 4);
      CHECK(s.score <= std::log(4.0) + 1e-12);
    }
  }

  TEST_CASE("random strategy is uniform over candidates") {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 11; ++i) {
      ids.push_back("r" + std::to_string(i));
      rows.push_back({static_cast<double>(i)});
    }
    PreferenceInstance inst;
    inst.matrix = std::make_shared<const DecisionMatrix>(ids, std::vector<std::string>{"g"}, rows);
    inst.scales = build_scales(*inst.matrix, std::vector<int>{1});
    inst.examples = {{"r0", 1}};
    inst.categories = 2;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i < 11; ++i) candidates.push_back(i);
    std::mt19937_64 rng(2024);
    std::map<std::string, int> counts;
    for (int k = 0; k < 10000; ++k) {
      ++counts[select({StrategyKind::RAND}, inst, candidates, nullptr, rng).chosen];
    }
    CHECK(counts.size() == 10);
    for (const auto& [id, c] : counts) {
      CHECK(c >= 850);
      CHECK(c <= 1150);
    }
  }
}
