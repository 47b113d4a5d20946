#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcsort/core_model.hpp"

namespace mcsort {

/// Dataset file: header `id,<criteria...>[,label]`, one row per alternative.
struct Dataset {
  DecisionMatrix matrix;
  std::optional<std::vector<int>> labels;

  int max_label() const;
};

Dataset parse_dataset_csv(const std::string& text);
Dataset read_dataset_csv(const std::string& path);

std::string format_dataset_csv(const Dataset& dataset);
void write_dataset_csv(const Dataset& dataset, std::ostream& out);

}  // namespace mcsort
