#include <cmath>

#include "doctest.h"
#include "hkq/asymptotics.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/sampling.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

namespace {

// Off-diagonal scalar rho of the closed form: A_12 = lambda rho.
double closed_form_rho(Complex lambda, Complex mu, double t) {
  return (hilb2_point(lambda, mu, t).A(0, 1) / lambda).real();
}

}  // namespace

TEST_CASE("closed-form scalar") {
  const double r = closed_form_rho(1.0, 0.0, 1.0);
  CHECK(std::abs(r * r - (std::sqrt(5.0) - 2.0)) <= 1e-15);
  const double R = 1e3;
  const Complex l(R * 0.6, 0.0), m(0.0, R * 0.8);
  CHECK(std::abs(closed_form_rho(l, m, 1.0) * 2.0 * R * R - 1.0) <= 1e-10);
}

TEST_CASE("closed form solves the moment equations") {
  Rng rng(1);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = random_log_uniform(0.1, 10.0, rng);
    Complex l = random_complex(rng), m = random_complex(rng);
    const double s = random_log_uniform(0.1, 1e3, rng) / std::sqrt(std::norm(l) + std::norm(m));
    const MomentResidual res = moment_residual(hilb2_point(s * l, s * m, t));
    worst = std::max({worst, res.real_residual / std::max(1.0, t), res.complex_residual});
  }
  CHECK(worst <= 1e-12);
  CHECK_THROWS_AS(hilb2_point(0.0, 0.0, 1.0), Error);
}

TEST_CASE("scaling law of the level sets") {
  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const Complex l = random_complex(rng), m = random_complex(rng);
    const double s = random_log_uniform(0.1, 10.0, rng);
    const ADHMDatum a = hilb2_point(s * l, s * m, s * s);
    const ADHMDatum b = hilb2_point(l, m, 1.0);
    CHECK(norm(a.coordinates() - s * b.coordinates()) <= 1e-12 * s * norm(b.coordinates()));
  }
}

TEST_CASE("exact tangent matches finite differences") {
  const Hilb2Chart chart(1.0);
  const RVector p = (RVector(4) << 2.0, -1.0, 0.5, 1.5).finished();
  const ChartJet jet = chart.jet(p);
  for (Index k = 0; k < 4; ++k) {
    const TangentVector fd = pushforward_fd(chart, p, unit_vector(4, k));
    CHECK(norm(fd - jet.tangents[static_cast<size_t>(k)]) <= 1e-8 * norm(fd));
  }
}

TEST_CASE("pullback metric") {
  CHECK(metric_normalization() == doctest::Approx(2.0).epsilon(1e-14));
  const double dev = hilb2_metric_deviation(100.0, 0.0, 1.0, Differential::finite_difference);
  CHECK(dev <= 1e-6);
  const AleRay ray(1.0, 1);
  const FitResult f = fit_power_law(decay_scan([&](double r) { return ray(r); }, log_grid(10.0, 1e3, 20), Quantity::metric_deviation));
  CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.3 / 4.0));

  // (lambda, mu) and (-lambda, -mu) are the same point of the quotient.
  const Hilb2Chart chart(1.0);
  const RVector p = (RVector(4) << 1.3, 0.2, -0.7, 0.9).finished();
  const ChartJet a = chart.jet(p), b = chart.jet(-p);
  const RMatrix ga = HorizontalProjector(a.point).gram(a.tangents);
  const RMatrix gb = HorizontalProjector(b.point).gram(b.tangents);
  CHECK((ga - gb).norm() <= 1e-12 * ga.norm());
}

TEST_CASE("flat orbifold point") {
  Rng rng(3);
  const Configuration q = random_separated_configuration(3, 2.0, rng);
  const ADHMDatum z = flat_orbifold_point(q);
  CHECK(real_moment(z).h.norm() == 0.0);
  CHECK(complex_moment(z).norm() == 0.0);
  const JointSpectrum s = joint_spectrum(z);
  CHECK(sigma(s.points) == doctest::Approx(sigma(q.points)).epsilon(1e-14));
  CHECK(rho(s.points) == doctest::Approx(rho(q.points)).epsilon(1e-14));

  const Configuration pair{{{1.0, 0.0}, {-1.0, 0.0}}};
  const ADHMDatum w = flat_orbifold_point(pair);
  const Complex dl(0.3, -0.4);
  TangentVector v = TangentVector::zero(2);
  v.A(0, 0) = dl;
  v.A(1, 1) = -dl;
  CHECK(flat_orbifold_metric(w, v, v) == doctest::Approx(metric_normalization() * std::norm(dl)).epsilon(1e-13));
}

TEST_CASE("product reference metric") {
  // p0: pure Euclidean on the centers.
  ProductPoint p0{finest_partition(3), {nullptr, nullptr, nullptr}, {RVector(), RVector(), RVector()}};
  ProductTangent v0{{RVector(), RVector(), RVector()}, {{Complex(1, 2), 0.5}, {Complex(-1, 0), 0.0}, {Complex(0, -2), -0.5}}};
  double e = 0.0;
  for (const auto& c : v0.center_velocities) e += std::norm(c.lambda) + std::norm(c.mu);
  CHECK(product_reference_metric(p0, v0) == doctest::Approx(e).epsilon(1e-15));

  // {{1,2},{3}}: closed-form pair metric plus weighted Euclidean centers.
  const Hilb2Chart hilb2(1.0);
  const RVector params = (RVector(4) << 0.8, 0.1, -0.4, 0.6).finished();
  ProductPoint p{parse_partition("1,2|3", 3), {&hilb2, nullptr}, {params, RVector()}};
  const RVector dir = (RVector(4) << 0.2, -0.5, 1.0, 0.3).finished();
  ProductTangent cluster{{dir, RVector()}, {{0.0, 0.0}, {0.0, 0.0}}};
  ProductTangent centers{{RVector::Zero(4), RVector()}, {{Complex(0.5, 0.5), 1.0}, {Complex(-1.0, -1.0), -2.0}}};
  ProductTangent both{{dir, RVector()}, centers.center_velocities};
  const double gc = product_reference_metric(p, cluster);
  const double gq = product_reference_metric(p, centers);
  const double expected = hilb2_pullback_metric(Complex(0.8, 0.1), Complex(-0.4, 0.6), 1.0, Complex(0.2, -0.5), Complex(1.0, 0.3));
  CHECK(gc == doctest::Approx(expected).epsilon(1e-13));
  CHECK(gq == doctest::Approx(2.0 * (0.5 + 1.0) + 1.0 * (2.0 + 4.0)).epsilon(1e-14));
  CHECK(product_reference_metric(p, both) == doctest::Approx(gc + gq).epsilon(1e-13));
}
