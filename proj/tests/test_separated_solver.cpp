#include <cmath>

#include "doctest.h"
#include "hkq/asymptotics.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/sampling.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

namespace {

Configuration pair_on_axis() { return {{{1.0, 0.0}, {-1.0, 0.0}}}; }

SeparatedOptions unguarded() {
  SeparatedOptions o;
  o.enforce_separation = false;
  return o;
}

}  // namespace

TEST_CASE("ansatz") {
  const TriangularUnknowns u = ansatz(pair_on_axis(), 1.0);
  CHECK(std::abs(u.a(0, 1) - 0.5) <= 1e-16);
  CHECK(std::abs(u.b(0, 1)) == 0.0);
  CHECK(std::abs(u.x(0) - 1.0) <= 1e-16);
  CHECK(std::abs(u.x(1) - 1.0) <= 1e-16);

  Rng rng(1);
  const Configuration q = random_separated_configuration(3, 2.0, rng);
  Configuration qs = q;
  for (auto& p : qs.points) p = 7.0 * p;
  CHECK((ansatz(qs, 1.0).a - ansatz(q, 1.0).a / 7.0).norm() <= 1e-15 * ansatz(q, 1.0).a.norm());

  // Leading term of the closed-form rho lambda at large R.
  const double R = 200.0;
  const Configuration big{{{Complex(R, 0.0), 0.0}, {Complex(-R, 0.0), 0.0}}};
  const ADHMDatum exact = hilb2_point(R, 0.0, 1.0);
  CHECK(std::abs(ansatz(big, 1.0).a(0, 1) - exact.A(0, 1)) <= 1e-6 * std::abs(exact.A(0, 1)));

  const Configuration coincident{{{0.0, 0.0}, {0.0, 0.0}}};
  CHECK_THROWS_AS(ansatz(coincident, 1.0), Error);
}

TEST_CASE("residual of the solution") {
  Rng rng(2);
  const Configuration q = random_separated_configuration(3, 20.0, rng);
  const SeparatedSolution sol = newton_solve(q, 1.0);
  CHECK(residual_F(q, sol.unknowns, 1.0).norm() <= 1e-12);

  const SeparatedSolution two = newton_solve(pair_on_axis(), 1.0, unguarded());
  const MomentResidual r = moment_residual(two.datum);
  CHECK(r.real_residual <= 1e-10);
  CHECK(r.complex_residual <= 1e-10);
  CHECK(two.datum.y.isZero(0.0));
}

TEST_CASE("ansatz residual and solution offset decay like sigma^-2") {
  const auto grid = log_grid(10.0, 1e3, 12);
  for (Quantity q : {Quantity::ansatz_residual, Quantity::solution_offset}) {
    const SeparatedRay ray(3, q, 1.0, 1);
    const FitResult f = fit_power_law(decay_scan([&](double s) { return ray(s); }, grid, q));
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(0.1));
  }
}

TEST_CASE("n = 2 Newton matches the closed form") {
  const SeparatedChart chart(2, 1.0, unguarded());
  const Hilb2Chart oracle(1.0);
  const RVector p = (RVector(4) << 1.0, 0.0, 0.0, 0.0).finished();
  const ChartJet a = chart.jet(p), b = oracle.jet(p);
  CHECK(multiset_distance(joint_spectrum(a.point).points, joint_spectrum(b.point).points) <= 1e-9);
  const RMatrix ga = HorizontalProjector(a.point).gram(a.tangents);
  const RMatrix gb = HorizontalProjector(b.point).gram(b.tangents);
  CHECK((ga - gb).cwiseAbs().maxCoeff() <= 1e-9);
  const MomentResidual r = moment_residual(a.point);
  CHECK(r.real_residual <= 1e-12);
}

TEST_CASE("permutation equivariance") {
  Rng rng(3);
  const Configuration q = random_separated_configuration(4, 15.0, rng);
  Configuration qp = q;
  std::swap(qp.points[0], qp.points[2]);
  std::swap(qp.points[1], qp.points[3]);
  const auto a = joint_spectrum(newton_solve(q, 1.0).datum);
  const auto b = joint_spectrum(newton_solve(qp, 1.0).datum);
  CHECK(multiset_distance(a.points, b.points) <= 1e-10);
  CHECK(multiset_distance(a.points, q.points) <= 1e-10);
}

TEST_CASE("Newton converges quadratically") {
  Rng rng(4);
  const SeparatedSolution sol = newton_solve(random_separated_configuration(3, 10.0, rng), 1.0);
  const auto& h = sol.report.history;
  REQUIRE(h.size() >= 3);
  for (size_t i = 0; i + 1 < h.size(); ++i)
    if (h[i + 1] > 1e-13) CHECK(h[i + 1] <= 10.0 * h[i] * h[i]);
  CHECK(sol.report.final_residual <= 1e-12);
  CHECK(sol.report.dist_from_ansatz > 0.0);
}

TEST_CASE("chart Psi_0 is close to Euclidean and holomorphic") {
  const auto grid = log_grid(11.0, 1e3, 10);
  const SeparatedRay metric(3, Quantity::metric_deviation, 1.0, 1);
  const FitResult f = fit_power_law(decay_scan([&](double s) { return metric(s); }, grid, Quantity::metric_deviation));
  CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.1));
  const SeparatedRay dbar(3, Quantity::dbar_norm, 1.0, 1);
  const FitResult fd = fit_power_law(decay_scan([&](double s) { return dbar(s); }, grid, Quantity::dbar_norm));
  CHECK(fd.slope == doctest::Approx(-2.0).epsilon(0.15));

  Rng rng(5);
  const SeparatedChart chart(3, 1.0);
  const RVector p = chart.parameters(random_separated_configuration(3, 30.0, rng));
  for (Index k = 0; k < 8; ++k) CHECK(holomorphy_defect(chart, p, unit_vector(8, k)) <= 1e-5);
}

TEST_CASE("exact chart differential matches finite differences") {
  Rng rng(6);
  const SeparatedChart chart(3, 1.0);
  const RVector p = chart.parameters(random_separated_configuration(3, 20.0, rng));
  const ChartJet jet = chart.jet(p);
  const HorizontalProjector P(jet.point);
  for (Index k = 0; k < 8; ++k) {
    const TangentVector fd = pushforward_fd(chart, p, unit_vector(8, k));
    const TangentVector ex = P.project(jet.tangents[static_cast<size_t>(k)]);
    CHECK(norm(P.project(fd) - ex) <= 1e-7 * norm(ex));
  }
}

TEST_CASE("solver errors") {
  Rng rng(7);
  CHECK_THROWS_AS(newton_solve(pair_on_axis(), 1.0), Error);  // below R_sep
  CHECK_THROWS_AS(newton_solve(random_separated_configuration(3, 20.0, rng), 0.0), Error);
  Configuration off = pair_on_axis();
  off.points[0].lambda += 1.0;
  CHECK_THROWS_AS(newton_solve(off, 1.0, unguarded()), Error);
  SeparatedOptions tight;
  tight.max_iter = 0;
  try {
    newton_solve(random_separated_configuration(3, 20.0, rng), 1.0, tight);
    FAIL("expected no-convergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_convergence);
  }
  const TriangularUnknowns u = ansatz(random_separated_configuration(3, 20.0, rng), 1.0);
  CHECK_THROWS_AS(unpack_unknowns(pack_unknowns(u), 4), Error);
  const TriangularUnknowns back = unpack_unknowns(pack_unknowns(u), 3);
  CHECK(back.a == u.a);
  CHECK(back.b == u.b);
}
