#pragma once

// Synthetic offenders drawn from the likelihood families themselves.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "geoprof/dataset.hpp"
#include "geoprof/error.hpp"
#include "geoprof/likelihood.hpp"
#include "geoprof/posterior.hpp"

namespace geoprof {

struct SyntheticScenario {
  std::variant<M1Params, M2Params, NonResParams> params;
  UtmPoint true_anchor{kDatasetZone, 350.0, 4365.0};
  std::size_t n = 10;
  std::size_t replicates = 1;
  std::uint64_t seed = 42;

  Family family() const {
    if (std::holds_alternative<M1Params>(params)) return Family::kM1;
    if (std::holds_alternative<M2Params>(params)) return Family::kM2;
    return Family::kNonRes;
  }
};

inline constexpr std::size_t kMaxRejectionDraws = 1000000;

namespace detail {

/// Radius with density ∝ r exp(-(r - alpha)^2 / (2 sigma^2)) on r > 0, the
/// radial marginal of the planar ring-normal density. Rejection sampling
/// from a normal proposal centred on the target's mode.
class RingRadiusSampler {
 public:
  RingRadiusSampler(double alpha, double sigma)
      : alpha_(alpha), sigma_(sigma),
        mode_(0.5 * (alpha + std::sqrt(alpha * alpha + 4.0 * sigma * sigma))) {
    const double delta = mode_ - alpha_;
    log_bound_ = log_ratio(sigma_ * sigma_ / delta);
  }

  template <typename Rng>
  double operator()(Rng& rng) const {
    std::normal_distribution<double> proposal(mode_, sigma_);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < kMaxRejectionDraws; ++i) {
      const double r = proposal(rng);
      if (r <= 0) continue;
      if (std::log(unif(rng)) < log_ratio(r) - log_bound_) return r;
    }
    throw InputError("synthetic: radial rejection sampler exceeded 1e6 draws");
  }

 private:
  // log of target / proposal up to a constant
  double log_ratio(double r) const {
    const double delta = mode_ - alpha_;
    return std::log(r) - delta * (2.0 * r - alpha_ - mode_) / (2.0 * sigma_ * sigma_);
  }

  double alpha_, sigma_, mode_, log_bound_;
};

template <typename Rng>
double truncated_angle(Rng& rng, double theta, double sigma) {
  std::normal_distribution<double> nd(theta, sigma);
  for (std::size_t i = 0; i < kMaxRejectionDraws; ++i) {
    const double a = nd(rng);
    if (a >= 0.0 && a < kTwoPi) return a;
  }
  throw InputError("synthetic: angle rejection sampler exceeded 1e6 draws");
}

}  // namespace detail

/// `replicates` independent series; replicate k uses seed_seq{seed, k}.
inline std::vector<CrimeSeries> sample_series(const SyntheticScenario& sc) {
  if (sc.n < kMinSeriesLength) throw InputError("synthetic: n must be >= 3");
  std::visit([](const auto& p) { validate(p); }, sc.params);

  std::vector<CrimeSeries> out;
  for (std::size_t k = 0; k < sc.replicates; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    CrimeSeries s;
    s.offender_id = "syn-" + std::to_string(k);
    s.anchor = sc.true_anchor;
    auto place = [&](double r, double phi) {
      s.sites.push_back({sc.true_anchor.zone, sc.true_anchor.easting + r * std::cos(phi),
                         sc.true_anchor.northing + r * std::sin(phi)});
    };
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, M1Params>) {
            std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / kPi) * p.alpha);
            for (std::size_t i = 0; i < sc.n; ++i) {
              const double dx = nd(rng);
              const double dy = nd(rng);
              s.sites.push_back({sc.true_anchor.zone, sc.true_anchor.easting + dx,
                                 sc.true_anchor.northing + dy});
            }
          } else if constexpr (std::is_same_v<P, M2Params>) {
            detail::RingRadiusSampler radius(p.alpha, p.sigma);
            std::uniform_real_distribution<double> angle(0.0, kTwoPi);
            for (std::size_t i = 0; i < sc.n; ++i) {
              const double r = radius(rng);
              place(r, angle(rng));
            }
          } else {
            detail::RingRadiusSampler radius(p.alpha, p.sigma1);
            for (std::size_t i = 0; i < sc.n; ++i) {
              const double r = radius(rng);
              place(r, detail::truncated_angle(rng, p.theta, p.sigma2));
            }
          }
        },
        sc.params);
    out.push_back(std::move(s));
  }
  return out;
}

/// UTM-layout records for a set of series (crime ids are 1-based per offender).
inline std::vector<UtmRecord> to_utm_records(const std::vector<CrimeSeries>& series) {
  std::vector<UtmRecord> out;
  for (const auto& s : series) {
    if (!s.anchor) throw DataError("series " + s.offender_id + " has no anchor");
    for (std::size_t i = 0; i < s.sites.size(); ++i)
      out.push_back({s.offender_id, std::to_string(i + 1), "0000", s.sites[i], *s.anchor});
  }
  return out;
}

}  // namespace geoprof
