#include "hssalt/bundled.hpp"

#include <algorithm>
#include <utility>

#include "hssalt/error.hpp"

namespace hssalt {
namespace {

constexpr double kTau = 15.0;
constexpr std::size_t kUnits = 40;
constexpr std::size_t kCensoredR = 35;

constexpr double kStage1[] = {0.22, 1.16, 1.45, 1.58, 2.92, 3.70, 4.30, 6.20, 7.23,
                              8.79, 9.35, 9.68, 9.89, 10.95, 11.55, 12.48, 13.56};
constexpr double kFastGroup[] = {15.05, 15.31, 15.32, 15.42, 15.45, 15.73, 15.74, 15.98, 17.06};
constexpr double kSlowGroup[] = {15.27, 15.37, 15.61, 16.38, 18.60, 19.42, 21.00,
                                 22.29, 24.42, 24.82, 25.54, 28.92, 29.94, 40.19};

}  // namespace

BundledDataset bundled_dataset(std::string_view name) {
  std::size_t r;
  if (name == "complete") {
    r = kUnits;
  } else if (name == "censored") {
    r = kCensoredR;
  } else {
    throw ArgumentError("unknown bundled dataset '" + std::string(name) + "' (complete, censored)");
  }
  std::vector<std::pair<double, std::optional<int>>> rows;
  for (double t : kStage1) rows.emplace_back(t, std::nullopt);
  for (double t : kSlowGroup) rows.emplace_back(t, 1);
  for (double t : kFastGroup) rows.emplace_back(t, 2);
  std::sort(rows.begin(), rows.end());
  rows.resize(r);

  std::vector<double> times;
  std::vector<std::optional<int>> labels;
  for (const auto& [t, label] : rows) {
    times.push_back(t);
    labels.push_back(label);
  }
  return {std::string(name), CensoredSample(std::move(times), kUnits, kTau), std::move(labels)};
}

std::vector<std::string> bundled_names() { return {"complete", "censored"}; }

}  // namespace hssalt
