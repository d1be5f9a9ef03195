#include <cmath>

#include "doctest.h"
#include "hkq/error.hpp"
#include "hkq/potential.hpp"
#include "hkq/sampling.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

TEST_CASE("orbifold distance") {
  const Configuration x{{{1.0, 0.0}, {-1.0, 0.0}}};
  const Configuration y{{{-1.0, 0.0}, {1.0, 0.0}}};
  CHECK(orbifold_distance(x, y) == 0.0);
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 3;
    const Configuration a = random_separated_configuration(n, 1.0, rng);
    const Configuration b = random_separated_configuration(n, 1.0, rng);
    const Configuration c = random_separated_configuration(n, 1.0, rng);
    Configuration pa = a;
    std::rotate(pa.points.begin(), pa.points.begin() + 1, pa.points.end());
    CHECK(orbifold_distance(a, pa) <= 1e-15);
    CHECK(orbifold_distance(a, b) == doctest::Approx(orbifold_distance(b, a)).epsilon(1e-14));
    CHECK(orbifold_distance(a, c) <= orbifold_distance(a, b) + orbifold_distance(b, c) + 1e-14);
    CHECK(orbifold_distance(a, b) <= std::sqrt(std::pow(configuration_norm(a.points), 2) +
                                               std::pow(configuration_norm(b.points), 2)) + 1e-12);
  }
  const Configuration three{{{1.0, 0.0}, {0.0, 0.0}, {-1.0, 0.0}}};
  CHECK_THROWS_AS(orbifold_distance(x, three), Error);
}

TEST_CASE("weight") {
  const Configuration y{{{1.0, 0.0}, {-1.0, 0.0}}};
  CHECK(weight(y) == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
  const Configuration c{{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
  CHECK(std::isinf(weight(c)));
  const Configuration tight{{{1.0, 0.0}, {1.0, 0.0}, {-2.0, 0.0}}};
  CHECK(sigma(tight.points) == 1.0);
  CHECK(std::isfinite(weight(tight)));
  // Degree -3 homogeneity at infinity.
  Rng rng(2);
  const Configuration q = random_separated_configuration(3, 1.0, rng);
  auto scaled = [&](double s) {
    Configuration p = q;
    for (auto& x : p.points) x = s * x;
    return weight(p) * s * s * s;
  };
  CHECK(scaled(1e6) == doctest::Approx(scaled(1e7)).epsilon(1e-5));
}

TEST_CASE("potential estimate") {
  SamplerOptions o;
  o.samples = 100000;
  o.seed = 3;
  o.jobs = 2;
  const Configuration x = potential_probe(2, 20.0);
  CHECK(rho(x.points) == doctest::Approx(20.0).epsilon(1e-14));
  const PotentialEstimate e = estimate_potential(x, o);
  CHECK(e.d == 4);
  CHECK(e.value > 0.0);
  CHECK(e.samples == 100000);
  CHECK(!e.non_converged);
  CHECK(std::abs(e.value - (e.f1.value + e.f2.value + e.f3.value)) <=
        e.ci_halfwidth + e.f1.ci_halfwidth + e.f2.ci_halfwidth + e.f3.ci_halfwidth);

  // Bit-identical for the same seed, independent of the worker count.
  o.jobs = 1;
  const PotentialEstimate e1 = estimate_potential(x, o);
  CHECK(e1.value == e.value);
  CHECK(e1.ci_halfwidth == e.ci_halfwidth);

  // CI shrinks by sqrt 2 when the sample count doubles.
  o.samples = 200000;
  const PotentialEstimate e2 = estimate_potential(x, o);
  CHECK(e.ci_halfwidth / e2.ci_halfwidth == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));

  CHECK_THROWS_AS(estimate_potential(potential_probe(2, 5.0), o), Error);
}

TEST_CASE("region terms scale like 1/rho") {
  SamplerOptions o;
  o.samples = 200000;
  o.jobs = 2;
  double f1_lo = 1e300, f1_hi = 0.0, f3_lo = 1e300, f3_hi = 0.0, t_lo = 1e300, t_hi = 0.0;
  for (double r : {10.0, 31.622776601683793, 100.0}) {
    const PotentialEstimate e = estimate_potential(potential_probe(2, r), o);
    f1_lo = std::min(f1_lo, e.f1.value * r);
    f1_hi = std::max(f1_hi, e.f1.value * r);
    f3_lo = std::min(f3_lo, e.f3.value * r);
    f3_hi = std::max(f3_hi, e.f3.value * r);
    t_lo = std::min(t_lo, e.value * r / std::log(r));
    t_hi = std::max(t_hi, e.value * r / std::log(r));
  }
  CHECK(f1_hi / f1_lo <= 2.0);
  CHECK(f3_hi / f3_lo <= 2.0);
  CHECK(t_hi / t_lo <= 10.0);
}

TEST_CASE("volume profile") {
  SamplerOptions o;
  o.samples = 100000;
  o.jobs = 2;
  const Configuration x = potential_probe(2, 100.0);
  const std::vector<double> tiny{0.05};
  const VolumeSample v = volume_profile(x, tiny, o).front();
  CHECK(v.V / (ball_volume(4) * std::pow(0.05, 4) / std::pow(sigma(x.points), 2)) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-15));

  std::vector<double> below;
  for (int i = 0; i < 8; ++i) below.push_back(0.5 * std::pow(10.0, i * 1.6 / 7.0));
  CHECK(std::abs(fit_volume_exponent(volume_profile(x, below, o), true).slope - 4.0) <= 0.5);

  const Configuration near{{{0.25, 0.0}, {-0.25, 0.0}}};
  std::vector<double> above;
  for (int i = 0; i < 8; ++i) above.push_back(3.0 * std::pow(10.0, i * 1.6 / 7.0));
  const auto prof = volume_profile(near, above, o);
  CHECK(std::abs(fit_volume_exponent(prof, false).slope - 2.0) <= 0.5);
  for (const auto& s : prof) CHECK(s.V == doctest::Approx(s.V1 + s.V2).epsilon(1e-12));

  // sigma(x) <= 3/2: nothing of sigma >= 2 nearby. A displacement of norm tau
  // moves the gap of a centered pair by at most sqrt(2) tau.
  const std::vector<double> small{0.1, 0.2, 0.35};
  for (const auto& s : volume_profile(near, small, o)) CHECK(s.V2 == 0.0);
}
