#include <cmath>
#include <memory>

#include "doctest.h"
#include "hkq/asymptotics.hpp"
#include "hkq/donaldson_flow.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/sampling.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

namespace {

std::shared_ptr<ClusterChart> pair_and_singleton() {
  std::vector<std::shared_ptr<const LocalChart>> subs{std::make_shared<Hilb2Chart>(1.0), nullptr};
  return std::make_shared<ClusterChart>(std::vector<Index>{2, 1}, subs, 1.0);
}

RVector chart_params(double q) {
  RVector p(8);
  const RVector c = (RVector(4) << 0.3, 0.1, 0.9, -0.2).finished();
  p.head(4) = c * (q / (std::sqrt(6.0) * c.norm()));
  p.tail(4) << 0.6 * std::cos(0.4), 0.6 * std::sin(0.4), 0.8 * std::cos(-0.7), 0.8 * std::sin(-0.7);
  return p;
}

FitResult scan(Quantity q, double lo, double hi, int points = 8) {
  const Partition p = parse_partition("1,2|3", 3);
  const RayEvaluator ray = make_ray(q, 3, p, ClusterMode::fixed_sigma, 1.0, 1);
  return fit_power_law(decay_scan(ray, log_grid(lo, hi, points), q));
}

double real_deviation(const ADHMDatum& z) { return level_defect(z).norm(); }

}  // namespace

TEST_CASE("block ansatz for singletons matches the separated ansatz") {
  Rng rng(1);
  const Configuration q = random_separated_configuration(3, 200.0, rng);
  ClusterData data;
  data.t = 1.0;
  for (const auto& p : q.points) {
    data.clusters.push_back(singleton_datum(1.0));
    data.centers.push_back(p);
  }
  const ADHMDatum z0 = block_ansatz(data).z0;
  const TriangularUnknowns u = ansatz(q, 1.0);
  for (Index i = 0; i < 3; ++i)
    for (Index j = i + 1; j < 3; ++j) {
      CHECK(std::abs(z0.A(i, j) - u.a(i, j)) <= 0.05 * std::abs(u.a(i, j)));
      CHECK(std::abs(z0.B(i, j) - u.b(i, j)) <= 0.05 * std::abs(u.b(i, j)));
    }
}

TEST_CASE("block ansatz decay rates") {
  CHECK(scan(Quantity::off_block_norm, 40.0, 2000.0).slope == doctest::Approx(-1.0).epsilon(0.2));
  CHECK(scan(Quantity::ansatz_level_residual, 40.0, 2000.0).slope == doctest::Approx(-2.0).epsilon(0.15));
}

TEST_CASE("flow from an on-level point is stationary") {
  const ADHMDatum z = hilb2_point(Complex(2.0, 1.0), Complex(0.5, -1.0), 1.0);
  const FlowResult r = flow_to_level(z, 1.0);
  CHECK(r.converged);
  CHECK((r.g_inf - CMatrix::Identity(2, 2)).norm() <= 1e-9);
  CHECK(norm(r.z_h.coordinates() - z.coordinates()) <= 1e-9);
  const NewtonHResult nh = newton_on_h(z, 1.0);
  CHECK(nh.h.norm() <= 1e-9);
}

TEST_CASE("flow contracts the real moment by e^-s") {
  const auto chart = pair_and_singleton();
  const ADHMDatum z0 = block_ansatz(chart->cluster_data(chart_params(50.0))).z0;
  FlowOptions o;
  o.tol = 1e-13;
  o.sample_times = {0.0, 1.0};
  const FlowResult r = flow_to_level(z0, 1.0, o);
  double d0 = 0.0, d1 = 0.0, worst_c = 0.0;
  for (const auto& s : r.trajectory) {
    if (s.s == 0.0) d0 = s.real_residual;
    if (s.s == 1.0) d1 = s.real_residual;
    worst_c = std::max(worst_c, s.complex_residual);
  }
  REQUIRE(d0 > 0.0);
  CHECK(std::abs(d1 / d0 - std::exp(-1.0)) <= 1e-8);
  CHECK(worst_c <= 1e-9);
  CHECK(r.drift <= 1e-8);
  // The unitary part of g_inf is the identity up to the integrator error.
  CHECK((r.unitary - CMatrix::Identity(3, 3)).norm() <= 1e-6);
}

TEST_CASE("g_inf approaches the identity like |q|^-2") {
  CHECK(scan(Quantity::g_inf_distance, 40.0, 2000.0).slope == doctest::Approx(-2.0).epsilon(0.15));
}

TEST_CASE("Newton on h") {
  const auto chart = pair_and_singleton();
  const ADHMDatum z0 = block_ansatz(chart->cluster_data(chart_params(60.0))).z0;
  const NewtonHResult nh = newton_on_h(z0, 1.0);
  CHECK(real_deviation(nh.z_h) <= 1e-12);
  // |h| <= (4 / C^2) |mu(z0) - t/2i| with C^2 the free-action margin; 2i mu - t = 2 (mu - t/2i) i.
  const double c2 = free_action_margin(z0);
  CHECK(nh.h.norm() <= 4.0 / c2 * 0.5 * real_deviation(z0));

  FlowOptions o;
  o.tol = 1e-12;
  const FlowResult fr = flow_to_level(z0, 1.0, o);
  CHECK(multiset_distance(joint_spectrum(fr.z_h).points, joint_spectrum(nh.z_h).points) <= 1e-8);
  CHECK((fr.h - nh.h).norm() <= 1e-8);
}

TEST_CASE("polar decomposition") {
  Rng rng(2);
  const CMatrix u = random_unitary(3, rng);
  CHECK(polar_decompose(u).h.norm() <= 1e-14);
  CMatrix d = CMatrix::Identity(2, 2);
  d(0, 0) = 2.0;
  const PolarDecomposition pd = polar_decompose(d);
  CHECK(std::abs(pd.h(0, 0) - std::log(2.0)) <= 1e-15);
  CHECK(std::abs(pd.h(1, 1)) <= 1e-15);
  for (int k = 0; k < 10; ++k) {
    const CMatrix g = random_matrix(3, rng);
    const PolarDecomposition p = polar_decompose(g);
    CHECK((p.unitary * expm_hermitian(p.h) - g).norm() <= 1e-12 * g.norm());
  }
  CHECK_THROWS_AS(polar_decompose(CMatrix::Zero(2, 2)), Error);
}

TEST_CASE("single cluster chart is the sub-chart itself") {
  std::vector<std::shared_ptr<const LocalChart>> subs{std::make_shared<Hilb2Chart>(1.0)};
  const ClusterChart chart({2}, subs, 1.0);
  const RVector p = (RVector(4) << 1.2, -0.4, 0.3, 0.8).finished();
  CHECK(norm(chart.evaluate(p).coordinates() - hilb2_point(Complex(1.2, -0.4), Complex(0.3, 0.8), 1.0).coordinates()) <= 1e-14);
  CHECK(qale_deviation_at(chart, p) <= 1e-12);
}

TEST_CASE("dh and the cross term decay") {
  // The bounds are upper bounds: the measured dh decays one order faster.
  CHECK(scan(Quantity::dh_norm, 40.0, 2000.0).slope <= -2.0 + 0.3);
  CHECK(scan(Quantity::cross_term, 40.0, 2000.0).slope <= -2.0 + 0.5);
}

TEST_CASE("errors") {
  ADHMDatum zero = ADHMDatum::zero(2, 1.0);
  try {
    flow_to_level(zero, 1.0);
    FAIL("expected non-free-point");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_free_point);
  }
  ClusterData bad;
  bad.clusters = {singleton_datum(1.0), singleton_datum(1.0)};
  bad.centers = {{1.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(validate(bad), Error);
  bad.centers = {{1.0, 0.0}, {-1.0, 0.0}};
  CHECK_THROWS_AS(validate(bad), Error);  // |q| below R_cluster
}
