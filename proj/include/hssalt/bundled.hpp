#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hssalt/params.hpp"

namespace hssalt {

/// Reference step-stress data set: 17 failures under the first stress and
/// 23 after the change at tau = 15 from two subgroups, n = 40 units.
struct BundledDataset {
  std::string name;
  CensoredSample sample;
  /// Canonical subgroup of each stage-2 failure (1: slower rate e^-2,
  /// 2: faster rate e^0.2); stage-1 failures have no label.
  std::vector<std::optional<int>> labels;
};

/// "complete" (all 40 failures) or "censored" (first 35, n = 40).
/// Throws ArgumentError for any other name.
BundledDataset bundled_dataset(std::string_view name);
std::vector<std::string> bundled_names();

}  // namespace hssalt
