#pragma once

#include <memory>
#include <vector>

#include <doctest.h>

#include "mcsort/credit_rating.hpp"
#include "mcsort/error.hpp"
#include "mcsort/inference.hpp"

namespace mcsort::testing {

inline std::shared_ptr<const DecisionMatrix> credit_matrix() {
  return std::make_shared<const DecisionMatrix>(credit_rating::matrix());
}

inline PreferenceInstance credit_instance(std::vector<AssignmentExample> examples) {
  PreferenceInstance inst;
  inst.matrix = credit_matrix();
  inst.scales = build_scales(*inst.matrix, std::vector<int>(3, credit_rating::kSubintervals));
  inst.examples = std::move(examples);
  inst.categories = credit_rating::kCategories;
  inst.alpha = credit_rating::kAlpha;
  return inst;
}

template <class Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mcsort::Error");
  return ErrorCode::internal;
}

}  // namespace mcsort::testing
