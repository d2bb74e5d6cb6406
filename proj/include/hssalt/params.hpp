#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hssalt {

/// Parameters of the heterogeneous step-stress Weibull model.
///
/// Stage 1 (t <= tau) has hazard alpha * lambda1 * t^(alpha-1). After the
/// stress change the population splits into m latent subgroups with rates
/// lambda2[j] and mixing proportions pi[j].
///
/// Values are immutable and always held in canonical order: lambda2
/// ascending, ties broken by descending pi. This resolves label switching
/// for every downstream consumer.
class MixtureParams {
 public:
  /// Throws ArgumentError unless alpha, lambda1, tau and every lambda2 are
  /// positive and finite, every pi is in (0, 1), the sizes match, and
  /// sum(pi) is within 1e-8 of one. pi is renormalized to sum to one.
  MixtureParams(double alpha, double lambda1, std::vector<double> lambda2,
                std::vector<double> pi, double tau);

  /// Homogeneous (m = 1) model.
  static MixtureParams homogeneous(double alpha, double lambda1, double lambda2, double tau);

  double alpha() const { return alpha_; }
  double lambda1() const { return lambda1_; }
  double tau() const { return tau_; }
  std::size_t m() const { return lambda2_.size(); }
  std::span<const double> lambda2() const { return lambda2_; }
  std::span<const double> pi() const { return pi_; }
  double lambda2(std::size_t j) const { return lambda2_[j]; }
  double pi(std::size_t j) const { return pi_[j]; }

  /// Mixture-weighted stage-2 rate sum_j pi_j * lambda2_j.
  double lambda_bar() const { return lambda_bar_; }

  MixtureParams with_alpha(double alpha) const;
  MixtureParams with_tau(double tau) const;

  /// Flattened (alpha, lambda1, lambda2..., pi...) in canonical order.
  std::vector<double> flatten() const;
  /// Names matching flatten(): alpha, lambda1, lambda2_1.., pi_1..
  std::vector<std::string> names() const;

  /// Permutation that sorts (lambda2, pi) into canonical order: entry k is the
  /// input index placed at position k.
  static std::vector<std::size_t> canonical_order(std::span<const double> lambda2,
                                                  std::span<const double> pi);

  friend bool operator==(const MixtureParams&, const MixtureParams&) = default;

 private:
  double alpha_;
  double lambda1_;
  std::vector<double> lambda2_;
  std::vector<double> pi_;
  double tau_;
  double lambda_bar_;
};

/// A Type-II censored step-stress sample: the first r order statistics out of
/// n units, with the stress change at tau.
class CensoredSample {
 public:
  /// times must be positive, finite and non-decreasing; 1 <= times.size() <= n.
  CensoredSample(std::vector<double> times, std::size_t n, double tau);

  std::span<const double> times() const { return times_; }
  /// ln(t_i) for each observed time, precomputed once.
  std::span<const double> log_times() const { return log_times_; }
  std::size_t n() const { return n_; }
  std::size_t r() const { return times_.size(); }
  double tau() const { return tau_; }
  /// Failures at or before tau.
  std::size_t n1() const { return n1_; }
  /// Observed failures after tau.
  std::size_t stage2_count() const { return times_.size() - n1_; }
  std::size_t censored_count() const { return n_ - times_.size(); }
  /// The last observed failure time t_{r:n}; censored units are set to it.
  double last_time() const { return times_.back(); }

  std::span<const double> stage1_times() const { return std::span(times_).first(n1_); }
  std::span<const double> stage2_times() const { return std::span(times_).subspan(n1_); }
  std::span<const double> stage1_log_times() const { return std::span(log_times_).first(n1_); }
  std::span<const double> stage2_log_times() const { return std::span(log_times_).subspan(n1_); }

 private:
  std::vector<double> times_;
  std::vector<double> log_times_;
  std::size_t n_;
  double tau_;
  std::size_t n1_;
};

/// Which marginal CDF to use after the stress change.
enum class CdfFamily {
  /// Aggregate hazard sum_j pi_j h_2j (compound CDF of the failure-rate model).
  HazardMixture,
  /// Mixture of left-truncated survivals, the law the sampler draws from.
  PopulationMixture,
};

std::string_view to_string(CdfFamily family);
/// Accepts "hazard"/"HazardMixture" and "population"/"PopulationMixture".
CdfFamily parse_cdf_family(std::string_view text);

}  // namespace hssalt
