#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hkq/asymptotics.hpp"
#include "hkq/configuration.hpp"

namespace hkq {

// min over permutations of |x - pi(y)| on the centered flat model.
double orbifold_distance(const Configuration& x, const Configuration& y);

// 1 / (rho(y) sigma(y)^2); +inf at the origin.
double weight(const Configuration& y);

struct SamplerOptions {
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::uint64_t batch_size = 32768;
};

struct RegionValue {
  double value = 0.0;
  double ci_halfwidth = 0.0;
};

struct PotentialEstimate {
  Configuration x;
  double value = 0.0;
  double ci_halfwidth = 0.0;  // 95%
  std::uint64_t samples = 0;
  int d = 0;
  RegionValue f1;  // B(o, 2 rho(x)) minus B(x, rho(x)/2)
  RegionValue f2;  // B(x, rho(x)/2)
  RegionValue f3;  // the rest
  bool non_converged = false;  // ci_halfwidth > 25% of value
};

// Monte-Carlo estimate of int d(x,y)^(2-d) weight(y) dy over the flat model.
PotentialEstimate estimate_potential(const Configuration& x, const SamplerOptions& options = {});

struct VolumeSample {
  double tau = 0.0;
  double V = 0.0;   // int_{B(x,tau)} sigma^-2
  double V1 = 0.0;  // part with sigma < 2
  double V2 = 0.0;  // part with sigma >= 2
  double ci_halfwidth = 0.0;  // on V
};

std::vector<VolumeSample> volume_profile(const Configuration& x, std::span<const double> radii,
                                         const SamplerOptions& options = {});

// Unit ball volume in R^d.
double ball_volume(int d);

// Power-law fit of V (or V2 when use_v2) against tau.
FitResult fit_volume_exponent(std::span<const VolumeSample> profile, bool use_v2);

// Centered configuration along a fixed generic direction with the given rho.
Configuration potential_probe(int n, double rho_value, std::uint64_t seed = 7);

}  // namespace hkq
