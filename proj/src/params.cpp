#include "hssalt/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hssalt/error.hpp"

namespace hssalt {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

MixtureParams::MixtureParams(double alpha, double lambda1, std::vector<double> lambda2,
                             std::vector<double> pi, double tau)
    : alpha_(alpha), lambda1_(lambda1), tau_(tau) {
  if (!positive_finite(alpha)) throw ArgumentError("alpha must be positive and finite");
  if (!positive_finite(lambda1)) throw ArgumentError("lambda1 must be positive and finite");
  if (!positive_finite(tau)) throw ArgumentError("tau must be positive and finite");
  if (lambda2.empty()) throw ArgumentError("at least one stage-2 component is required");
  if (lambda2.size() != pi.size()) throw ArgumentError("lambda2 and pi must have the same length");
  for (double l : lambda2) {
    if (!positive_finite(l)) throw ArgumentError("every lambda2 must be positive and finite");
  }
  double total = 0.0;
  for (double p : pi) {
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("every pi must lie in (0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-8) throw ArgumentError("mixing proportions must sum to one");

  const auto order = canonical_order(lambda2, pi);
  lambda2_.reserve(order.size());
  pi_.reserve(order.size());
  for (std::size_t k : order) {
    lambda2_.push_back(lambda2[k]);
    pi_.push_back(pi[k] / total);
  }
  lambda_bar_ = std::transform_reduce(lambda2_.begin(), lambda2_.end(), pi_.begin(), 0.0);
}

MixtureParams MixtureParams::homogeneous(double alpha, double lambda1, double lambda2, double tau) {
  return MixtureParams(alpha, lambda1, {lambda2}, {1.0}, tau);
}

MixtureParams MixtureParams::with_alpha(double alpha) const {
  return MixtureParams(alpha, lambda1_, lambda2_, pi_, tau_);
}

MixtureParams MixtureParams::with_tau(double tau) const {
  return MixtureParams(alpha_, lambda1_, lambda2_, pi_, tau);
}

std::vector<double> MixtureParams::flatten() const {
  std::vector<double> out{alpha_, lambda1_};
  out.insert(out.end(), lambda2_.begin(), lambda2_.end());
  out.insert(out.end(), pi_.begin(), pi_.end());
  return out;
}

std::vector<std::string> MixtureParams::names() const {
  std::vector<std::string> out{"alpha", "lambda1"};
  for (std::size_t j = 0; j < m(); ++j) out.push_back("lambda2_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < m(); ++j) out.push_back("pi_" + std::to_string(j + 1));
  return out;
}

std::vector<std::size_t> MixtureParams::canonical_order(std::span<const double> lambda2,
                                                        std::span<const double> pi) {
  std::vector<std::size_t> order(lambda2.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lambda2[a] != lambda2[b]) return lambda2[a] < lambda2[b];
    return pi[a] > pi[b];
  });
  return order;
}

CensoredSample::CensoredSample(std::vector<double> times, std::size_t n, double tau)
    : times_(std::move(times)), n_(n), tau_(tau) {
  if (times_.empty()) throw ArgumentError("a sample needs at least one observed failure");
  if (times_.size() > n_) throw ArgumentError("r exceeds n");
  if (!positive_finite(tau_)) throw ArgumentError("tau must be positive and finite");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!positive_finite(times_[i])) throw ArgumentError("failure times must be positive and finite");
    if (i > 0 && times_[i] < times_[i - 1]) throw ArgumentError("failure times must be non-decreasing");
  }
  log_times_.resize(times_.size());
  std::transform(times_.begin(), times_.end(), log_times_.begin(),
                 [](double t) { return std::log(t); });
  n1_ = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), tau_) - times_.begin());
}

std::string_view to_string(CdfFamily family) {
  switch (family) {
    case CdfFamily::HazardMixture: return "HazardMixture";
    case CdfFamily::PopulationMixture: return "PopulationMixture";
  }
  return "unknown";
}

CdfFamily parse_cdf_family(std::string_view text) {
  if (text == "hazard" || text == "HazardMixture") return CdfFamily::HazardMixture;
  if (text == "population" || text == "PopulationMixture") return CdfFamily::PopulationMixture;
  throw ArgumentError("unknown CDF family '" + std::string(text) + "'");
}

}  // namespace hssalt
