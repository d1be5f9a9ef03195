#include <cmath>

#include "doctest.h"
#include "hkq/error.hpp"
#include "hkq/sampling.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

TEST_CASE("joint spectrum of diagonal data") {
  ADHMDatum z = ADHMDatum::zero(2, 0.0);
  z.A.diagonal() << 1.0, -1.0;
  z.B.diagonal() << 2.0, -2.0;
  const JointSpectrum s = joint_spectrum(z);
  const std::vector<Point2> expected{{1.0, 2.0}, {-1.0, -2.0}};
  CHECK(multiset_distance(s.points, expected) <= 1e-15);
}

TEST_CASE("joint spectrum round trip and gauge invariance") {
  Rng rng(1);
  for (int k = 0; k < 5; ++k) {
    const Configuration q = random_separated_configuration(3, 20.0, rng);
    const ADHMDatum z = newton_solve(q, 1.0).datum;
    const JointSpectrum s = joint_spectrum(z);
    CHECK(multiset_distance(s.points, q.points) <= 1e-8);
    const JointSpectrum su = joint_spectrum(gauge_act(random_unitary(3, rng), z));
    CHECK(multiset_distance(s.points, su.points) <= 1e-10 * rho(s.points));
  }
}

TEST_CASE("non-commuting data are rejected") {
  ADHMDatum z = ADHMDatum::zero(2, 0.0);
  z.A << 0.0, 1.0, 0.0, 0.0;
  z.B << 0.0, 0.0, 1.0, 0.0;
  try {
    joint_spectrum(z);
    FAIL("expected not-simultaneously-triangularizable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_triangularizable);
  }
}

TEST_CASE("sigma and rho") {
  const std::vector<Point2> v{{1.0, 0.0}, {-1.0, 0.0}};
  CHECK(rho(v) == 2.0);
  CHECK(sigma(v) == 3.0);
  const std::vector<Point2> c{{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
  CHECK(sigma(c) == 1.0);
  CHECK_THROWS_AS(sigma(std::vector<Point2>{{1.0, 0.0}}), Error);
  Rng rng(2);
  const Configuration q = random_separated_configuration(4, 3.0, rng);
  Configuration p = q;
  std::reverse(p.points.begin(), p.points.end());
  CHECK(rho(p.points) == doctest::Approx(rho(q.points)).epsilon(1e-15));
  CHECK(sigma(p.points) == doctest::Approx(sigma(q.points)).epsilon(1e-15));
  Configuration s = q;
  for (auto& x : s.points) x = 5.0 * x;
  CHECK(rho(s.points) == doctest::Approx(5.0 * rho(q.points)).epsilon(1e-14));
  CHECK(sigma(s.points) - 1.0 == doctest::Approx(5.0 * (sigma(q.points) - 1.0)).epsilon(1e-14));
}

TEST_CASE("classify regions") {
  const auto specs = default_region_specs(3);
  const std::vector<Point2> tight{{Complex(1000.5, 0), 0.0}, {Complex(999.5, 0), 0.0}, {Complex(-2000, 0), 0.0}};
  auto p = classify_region(tight, specs);
  REQUIRE(p.has_value());
  CHECK(format_partition(*p) == "1,2|3");

  const std::vector<Point2> spread{{Complex(1000, 0), 0.0}, {Complex(-500, 866), 0.0}, {Complex(-500, -866), 0.0}};
  p = classify_region(spread, specs);
  REQUIRE(p.has_value());
  CHECK(*p == finest_partition(3));

  // Covering for eps = 0.05 and scale invariance above R.
  Rng rng(3);
  int unclassified = 0, moved = 0;
  double big_r = 0.0;
  for (const auto& s : specs) big_r = std::max(big_r, s.R);
  for (int k = 0; k < 10000; ++k) {
    Configuration q = random_separated_configuration(3, random_log_uniform(1e-4, 1.0, rng), rng);
    const double s = 1.01 * big_r / configuration_norm(q.points);
    for (auto& x : q.points) x = s * x;
    const auto c = classify_region(q.points, specs);
    if (!c) ++unclassified;
    if (k % 10 == 0) {
      Configuration q2 = q;
      for (auto& x : q2.points) x = 17.0 * x;
      if (classify_region(q2.points, specs) != c) ++moved;
    }
  }
  CHECK(unclassified == 0);
  CHECK(moved == 0);
}

TEST_CASE("partition order") {
  for (int n = 2; n <= 4; ++n) {
    const Partition p0 = finest_partition(n), pinf = coarsest_partition(n);
    for (const auto& p : all_partitions(n)) {
      const Order a = partition_order(p0, p), b = partition_order(p, pinf);
      CHECK((a == Order::less || a == Order::equal));
      CHECK((b == Order::less || b == Order::equal));
    }
  }
  CHECK(partition_order(parse_partition("1,2|3", 3), parse_partition("1,3|2", 3)) == Order::incomparable);
  CHECK(partition_order(parse_partition("1,2|3", 3), parse_partition("1,2,3", 3)) == Order::less);
  CHECK(partition_order(parse_partition("1,2,3", 3), parse_partition("1|2|3", 3)) == Order::greater);
  CHECK(all_partitions(4).size() == 15);
  CHECK_THROWS_AS(parse_partition("1,2|2", 3), Error);
  CHECK(format_partition(parse_partition("3|1,2", 3)) == "1,2|3");
}

TEST_CASE("regions shrink along the refinement order") {
  // p <= q implies Delta_q is contained in Delta_p: a point in the region of the
  // coarser partition with everything tight also lies near the finer diagonals.
  const Partition p = parse_partition("1,2|3", 3);
  const auto specs = default_region_specs(3);
  RegionSpec sp = specs.front();
  for (const auto& s : specs)
    if (s.partition == p) sp = s;
  const std::vector<Point2> v{{Complex(1000.2, 0), 0.0}, {Complex(999.8, 0), 0.0}, {Complex(-2000, 0), 0.0}};
  CHECK(in_region(v, sp));
}
