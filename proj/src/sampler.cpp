#include "hssalt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hssalt/distribution.hpp"
#include "hssalt/error.hpp"

namespace hssalt {

LabeledSample generate_sample(const SimRequest& request) {
  auto stream = stream_for(request.seed, request.replication_index, request.substream);
  return generate_sample(request.params, request.n, request.r, stream, request.emit_labels);
}

LabeledSample generate_sample(const MixtureParams& params, std::size_t n, std::size_t r,
                              RandomStream& stream, bool emit_labels) {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (r < 1) throw ArgumentError("r must be at least 1");
  if (r > n) throw ArgumentError("r exceeds n");

  const double alpha = params.alpha();
  const double inv_alpha = 1.0 / alpha;
  const double tau_pow = weibull_power(params.tau(), alpha);
  const double stage1_prob = -std::expm1(-params.lambda1() * tau_pow);

  std::vector<double> u(n);
  for (double& v : u) v = stream.uniform();
  std::sort(u.begin(), u.end());
  const std::size_t n1 = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), stage1_prob) - u.begin());

  std::vector<double> times;
  times.reserve(r);
  for (std::size_t i = 0; i < std::min(n1, r); ++i) {
    // Rounding must not push a stage-1 time past tau.
    times.push_back(std::min(params.tau(), std::pow(-std::log1p(-u[i]) / params.lambda1(), inv_alpha)));
  }

  if (n1 >= r || n1 == n) {
    return {CensoredSample(std::move(times), n, params.tau()), std::nullopt, true};
  }

  const std::size_t m = params.m();
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t k = 0; k < n - n1; ++k) ++counts[stream.categorical(params.pi())];

  std::vector<std::pair<double, int>> stage2;
  stage2.reserve(n - n1);
  std::vector<double> uj;
  const double above_tau = std::nextafter(params.tau(), HUGE_VAL);
  for (std::size_t j = 0; j < m; ++j) {
    uj.resize(counts[j]);
    for (double& v : uj) v = stream.uniform();
    std::sort(uj.begin(), uj.end());
    for (double v : uj) {
      const double t = std::pow(tau_pow - std::log1p(-v) / params.lambda2(j), inv_alpha);
      stage2.emplace_back(std::max(t, above_tau), static_cast<int>(j + 1));
    }
  }
  std::sort(stage2.begin(), stage2.end());

  std::vector<int> labels;
  for (std::size_t k = 0; k < r - n1; ++k) {
    times.push_back(stage2[k].first);
    if (emit_labels) labels.push_back(stage2[k].second);
  }

  LabeledSample out{CensoredSample(std::move(times), n, params.tau()), std::nullopt, false};
  if (emit_labels) out.labels = std::move(labels);
  return out;
}

bool fittable(const LabeledSample& draw, std::size_t m) {
  const auto& s = draw.sample;
  return !draw.discarded && s.r() >= 2 && s.n1() >= 1 && s.stage2_count() >= std::max<std::size_t>(m, 1);
}

FittableDraw draw_fittable(const MixtureParams& params, std::size_t n, std::size_t r, std::uint64_t seed,
                           std::uint64_t replication_index, std::size_t m, bool emit_labels, int max_redraws) {
  for (int k = 0; k <= max_redraws; ++k) {
    auto draw = generate_sample({params, n, r, seed, replication_index, static_cast<std::uint64_t>(k), emit_labels});
    if (fittable(draw, m)) return {std::move(draw), k};
  }
  throw DegenerateDataError("no fittable sample after " + std::to_string(max_redraws) + " redraws");
}

}  // namespace hssalt
