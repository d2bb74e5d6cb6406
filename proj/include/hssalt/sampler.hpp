#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hssalt/params.hpp"
#include "hssalt/rng.hpp"

namespace hssalt {

struct SimRequest {
  MixtureParams params;
  std::size_t n = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication_index = 0;
  std::uint64_t substream = 0;
  bool emit_labels = false;
};

struct LabeledSample {
  CensoredSample sample;
  /// Subgroup (1-based, canonical order) of each observed stage-2 failure.
  /// Present iff labels were requested and the draw is not degenerate.
  std::optional<std::vector<int>> labels;
  /// No stage-2 failure was observed (n1 >= r) or every unit failed in stage 1.
  bool discarded = false;
};

/// Draws a Type-II censored sample: sorted uniforms give the stage-1 failures
/// by inversion, a multinomial split assigns the survivors to subgroups, and
/// each subgroup's times come from inverting its left-truncated survival
/// exp(-lambda2_j (t^a - tau^a)). The first r order statistics are kept.
///
/// Throws ArgumentError unless 2 <= n and 1 <= r <= n.
LabeledSample generate_sample(const SimRequest& request);

/// Same, drawing from a caller-owned stream.
LabeledSample generate_sample(const MixtureParams& params, std::size_t n, std::size_t r,
                              RandomStream& stream, bool emit_labels);

/// True when the sample supports an m-component fit: r >= 2, at least one
/// failure before tau and at least m after it.
bool fittable(const LabeledSample& draw, std::size_t m);

struct FittableDraw {
  LabeledSample draw;
  /// Degenerate draws rejected before this one.
  int redraws = 0;
};

/// Draws replication `replication_index` from substream 0, 1, 2, ... until the
/// sample is fittable for m components. Throws DegenerateDataError after
/// max_redraws rejections.
FittableDraw draw_fittable(const MixtureParams& params, std::size_t n, std::size_t r, std::uint64_t seed,
                           std::uint64_t replication_index, std::size_t m, bool emit_labels = false,
                           int max_redraws = 1000);

}  // namespace hssalt
