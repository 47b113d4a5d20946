#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <fmt/format.h>

#include "mcsort/core_model.hpp"
#include "mcsort/inference.hpp"
#include "mcsort/simulation.hpp"
#include "mcsort/strategy.hpp"

namespace mcsort::properties {
namespace {

std::shared_ptr<const DecisionMatrix> random_matrix(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> perf(0.0, 100.0);
  std::vector<std::string> ids;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ids.push_back(fmt::format("x{}", i));
    for (int j = 0; j < m; ++j) rows[i].push_back(perf(rng));
  }
  for (int j = 0; j < m; ++j) names.push_back(fmt::format("c{}", j));
  return std::make_shared<const DecisionMatrix>(std::move(ids), std::move(names), std::move(rows));
}

PreferenceInstance random_instance(std::mt19937_64& rng, bool monotone) {
  std::uniform_int_distribution<int> pick_m(1, 3);
  std::uniform_int_distribution<int> pick_q(2, 4);
  std::uniform_int_distribution<int> pick_s(1, 4);
  std::uniform_int_distribution<int> pick_n(4, 10);
  const int m = pick_m(rng);
  const int q = pick_q(rng);
  const int n = pick_n(rng);
  PreferenceInstance inst;
  inst.matrix = random_matrix(rng, n, m);
  std::vector<int> s(static_cast<std::size_t>(m));
  for (int& v : s) v = pick_s(rng);
  inst.scales = build_scales(*inst.matrix, s);
  std::uniform_int_distribution<int> pick_c(1, q);
  for (int i = 0; i < n; ++i) inst.examples.push_back({inst.matrix->id(i), pick_c(rng)});
  inst.categories = q;
  inst.alpha = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
  inst.monotone_mode = monotone;
  return inst;
}

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

Outcome normalization(int models, std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < models; ++k) {
    const int m = std::uniform_int_distribution<int>(1, 5)(rng);
    const int q = std::uniform_int_distribution<int>(2, 6)(rng);
    const auto matrix = random_matrix(rng, 25, m);
    std::vector<int> s(static_cast<std::size_t>(m));
    for (int& v : s) v = std::uniform_int_distribution<int>(1, 6)(rng);
    UtilityModel model;
    model.scales = build_scales(*matrix, s);
    double low = 0.0;
    double high = 0.0;
    for (const auto& scale : model.scales) {
      std::vector<double> u(scale.breakpoints.size());
      for (double& v : u) v = unit(rng);
      low += *std::min_element(u.begin(), u.end());
      high += *std::max_element(u.begin(), u.end());
      model.breakpoint_utilities.push_back(std::move(u));
    }
    std::vector<double> cuts(static_cast<std::size_t>(q - 1));
    for (double& c : cuts) c = low + (high - low) * unit(rng);
    std::sort(cuts.begin(), cuts.end());
    model.thresholds.assign(static_cast<std::size_t>(q) + 1, 0.0);
    std::copy(cuts.begin(), cuts.end(), model.thresholds.begin() + 1);
    model.epsilon = 0.1 * unit(rng);
    set_display_thresholds(model);

    const auto nm = normalize(model);
    ++out.checked;
    double max_sum = 0.0;
    for (const auto& f : nm.normalized_utilities) {
      const double lo = *std::min_element(f.begin(), f.end());
      if (!close(lo, 0.0, 1e-12)) out.fail(fmt::format("model {}: minimum {} != 0", k, lo));
      max_sum += *std::max_element(f.begin(), f.end());
    }
    if (!close(max_sum, 1.0, 1e-12)) out.fail(fmt::format("model {}: maxima sum to {}", k, max_sum));
    if (nm.normalized_thresholds.front() != 0.0) out.fail(fmt::format("model {}: b0 != 0", k));
    if (!close(nm.normalized_thresholds.back(), 1.0 + nm.epsilon_s, 1e-12)) {
      out.fail(fmt::format("model {}: bq != 1 + eps", k));
    }
    for (int h = 1; h < q; ++h) {
      const double expect = (model.thresholds[h] - low) / (high - low);
      if (!close(nm.normalized_thresholds[h], expect, 1e-12)) {
        out.fail(fmt::format("model {}: threshold {} is {}, expected {}", k, h,
                             nm.normalized_thresholds[h], expect));
      }
    }
    UtilityModel scaled = model;
    scaled.breakpoint_utilities = nm.normalized_utilities;
    scaled.thresholds = nm.normalized_thresholds;
    for (std::size_t i = 0; i < matrix->alternatives(); ++i) {
      const double u = comprehensive_utility(model, matrix->row(i));
      const double v = comprehensive_utility(scaled, matrix->row(i));
      if (!close(v, (u - low) / (high - low), 1e-12)) {
        out.fail(fmt::format("model {}: alternative {} maps to {}", k, i, v));
      }
      if (assign_category(model, u) != assign_category(scaled, v)) {
        out.fail(fmt::format("model {}: alternative {} changes category", k, i));
      }
    }
  }
  return out;
}

Outcome transforms(int vectors, std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> temp(0.05, 5.0);
  for (int k = 0; k < vectors; ++k) {
    std::vector<double> v(static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 7)(rng)));
    for (double& x : v) x = value(rng);
    if (k % 10 == 0) {
      for (double& x : v) x = -std::fabs(x);
    }
    const auto relu = transform_relu(v);
    const auto soft = transform_softmax(v, temp(rng));
    for (const auto* p : {&relu, &soft}) {
      ++out.checked;
      const char* name = p == &relu ? "relu" : "softmax";
      double sum = 0.0;
      for (double x : p->probabilities) {
        if (!(x >= 0.0)) out.fail(fmt::format("vector {} {}: negative probability", k, name));
        sum += x;
      }
      if (!close(sum, 1.0, 1e-12)) out.fail(fmt::format("vector {} {}: sums to {}", k, name, sum));
      for (std::size_t a = 0; a < v.size(); ++a) {
        for (std::size_t b = 0; b < v.size(); ++b) {
          if (v[a] > v[b] && p->probabilities[a] < p->probabilities[b]) {
            out.fail(fmt::format("vector {} {}: order of entries {} and {} flipped", k, name, a, b));
          }
        }
      }
    }
  }
  return out;
}

Outcome metric_extremes(int vectors, std::uint64_t seed) {
  Outcome out;
  for (int q = 2; q <= 8; ++q) {
    const ProbabilityVector uniform{std::vector<double>(static_cast<std::size_t>(q), 1.0 / q)};
    if (!close(ia_entropy(uniform), std::log(q), 1e-12)) out.fail(fmt::format("entropy q={}", q));
    if (!close(ia_least_confidence(uniform), 1.0 - 1.0 / q, 1e-12)) {
      out.fail(fmt::format("least confidence q={}", q));
    }
    if (!close(ia_margin(uniform), 0.0, 1e-12)) out.fail(fmt::format("margin q={}", q));
    ++out.checked;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < vectors; ++k) {
    const int q = std::uniform_int_distribution<int>(2, 8)(rng);
    ProbabilityVector p;
    double sum = 0.0;
    for (int h = 0; h < q; ++h) {
      p.probabilities.push_back(unit(rng));
      sum += p.probabilities.back();
    }
    for (double& x : p.probabilities) x /= sum;
    ++out.checked;
    if (ia_entropy(p) > std::log(q) + 1e-12) out.fail(fmt::format("vector {}: entropy above ln q", k));
    if (ia_least_confidence(p) > 1.0 - 1.0 / q + 1e-12) {
      out.fail(fmt::format("vector {}: least confidence above 1-1/q", k));
    }
    if (ia_margin(p) > 1e-12) out.fail(fmt::format("vector {}: margin above 0", k));
  }
  return out;
}

Outcome consistency_round_trip(int datasets, std::uint64_t seed) {
  Outcome out;
  for (int k = 0; k < datasets; ++k) {
    GenerationConfig cfg;
    cfg.n = 30;
    cfg.m = 3;
    cfg.q = 3;
    cfg.eta = 0.0;
    cfg.seed = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    const auto data = generate_dataset(cfg);
    PreferenceInstance inst;
    inst.matrix = std::make_shared<const DecisionMatrix>(data.matrix);
    inst.scales = build_scales(data.matrix, cfg.resolved_subintervals());
    for (int i = 0; i < cfg.n; ++i) inst.examples.push_back({data.matrix.id(i), data.labels[i]});
    inst.categories = cfg.q;
    ++out.checked;
    const auto tight = fit_min_inconsistency(inst);
    if (tight.objective != 0.0) out.fail(fmt::format("dataset {}: minimal inconsistency {}", k, tight.objective));
    for (const auto& d : tight.slacks) {
      if (d.plus != 0.0 || d.minus != 0.0) out.fail(fmt::format("dataset {}: nonzero slack", k));
    }
    if (assign_all(tight.model, data.matrix) != data.labels) {
      out.fail(fmt::format("dataset {}: references not reproduced", k));
    }
  }
  return out;
}

Outcome epsilon_bound(int instances, std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < instances; ++k) {
    const auto inst = random_instance(rng, k % 2 == 1);
    const auto fitted = fit_and_refine(inst);
    const double bound = static_cast<double>(inst.matrix->criteria()) / (inst.categories - 1);
    ++out.checked;
    for (double e : {fitted.max_margin.epsilon, fitted.refined.epsilon}) {
      if (e > bound + 1e-12 || e < 0.0) {
        out.fail(fmt::format("instance {}: epsilon {} outside [0, {}]", k, e, bound));
      }
    }
  }
  return out;
}

Outcome monotone_utilities(int instances, std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < instances; ++k) {
    const auto inst = random_instance(rng, true);
    const auto fitted = fit_and_refine(inst);
    ++out.checked;
    for (const auto* model : {&fitted.max_margin.model, &fitted.refined.model}) {
      for (const auto& u : model->breakpoint_utilities) {
        for (std::size_t l = 1; l < u.size(); ++l) {
          if (u[l] < u[l - 1] - 1e-12) {
            out.fail(fmt::format("instance {}: utility drops from {} to {}", k, u[l - 1], u[l]));
          }
        }
      }
    }
  }
  return out;
}

Outcome grid_oracle(int instances, std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 rng(seed);
  constexpr int kSteps = 20;  // 0.05 spacing on [0, 1]
  for (int k = 0; k < instances; ++k) {
    const int m = k % 3 == 2 ? 2 : 1;
    const int n = 5;
    PreferenceInstance inst;
    inst.matrix = random_matrix(rng, n, m);
    inst.scales = build_scales(*inst.matrix, std::vector<int>(static_cast<std::size_t>(m), 1));
    std::bernoulli_distribution coin(0.5);
    std::vector<int> label(n);
    for (int i = 0; i < n; ++i) {
      label[i] = coin(rng) ? 2 : 1;
      inst.examples.push_back({inst.matrix->id(i), label[i]});
    }
    inst.categories = 2;
    inst.alpha = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const double j_star = fit(inst).objective;

    // Position of each performance between the two breakpoints.
    std::vector<std::vector<double>> t(n, std::vector<double>(m));
    for (int j = 0; j < m; ++j) {
      const auto col = inst.matrix->column(j);
      const double lo = *std::min_element(col.begin(), col.end());
      const double hi = *std::max_element(col.begin(), col.end());
      for (int i = 0; i < n; ++i) t[i][j] = (col[i] - lo) / (hi - lo);
    }
    const double a = inst.alpha;
    const double c = (1.0 - a) / n;
    const double eps_max = m;
    const int combos = static_cast<int>(std::pow(kSteps + 1, 2 * m));
    double best = -1e300;
    std::vector<double> u(n);
    std::vector<double> eps_candidates;
    for (int code = 0; code < combos; ++code) {
      int rest = code;
      double grid_u[4] = {0, 0, 0, 0};
      for (int v = 0; v < 2 * m; ++v) {
        grid_u[v] = (rest % (kSteps + 1)) / static_cast<double>(kSteps);
        rest /= kSteps + 1;
      }
      for (int i = 0; i < n; ++i) {
        u[i] = 0.0;
        for (int j = 0; j < m; ++j) u[i] += (1 - t[i][j]) * grid_u[2 * j] + t[i][j] * grid_u[2 * j + 1];
      }
      for (int bi = 0; bi <= 2 * m * kSteps; ++bi) {
        const double b = bi / static_cast<double>(kSteps);
        // The objective is concave and piecewise linear in epsilon, so its
        // maximum sits on a kink or an end of the range.
        eps_candidates.assign({0.0, eps_max});
        for (int i = 0; i < n; ++i) {
          if (label[i] == 1) eps_candidates.push_back(std::clamp(b - u[i], 0.0, eps_max));
        }
        for (double e : eps_candidates) {
          double slack = 0.0;
          for (int i = 0; i < n; ++i) {
            slack += label[i] == 1 ? std::max(0.0, u[i] - b + e) : std::max(0.0, b - u[i]);
          }
          best = std::max(best, a * e - c * slack);
        }
      }
    }
    ++out.checked;
    if (best > j_star + 1e-9) {
      out.fail(fmt::format("instance {}: grid point reaches {} above J* = {}", k, best, j_star));
    }
  }
  return out;
}

}  // namespace mcsort::properties
