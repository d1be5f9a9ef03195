#include <cmath>

#include "doctest.h"
#include "hkq/asymptotics.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"

using namespace hkq;

namespace {

std::vector<DecayRecord> synthetic(const std::function<double(double)>& f, double a, double b, int k) {
  std::vector<DecayRecord> out;
  for (double s : log_grid(a, b, k)) {
    DecayRecord r;
    r.scale = s;
    r.deviation = f(s);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("fit of an exact power law") {
  const auto recs = synthetic([](double s) { return 3.5 * std::pow(s, -4.0); }, 10.0, 1e3, 20);
  const FitResult f = fit_power_law(recs);
  CHECK(std::abs(f.slope + 4.0) <= 1e-12);
  CHECK(f.constant() == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(f.n_points == 20);
  CHECK(f.min_scale == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(f.max_scale == doctest::Approx(1e3).epsilon(1e-15));
  CHECK(f.stderr_slope <= 1e-12);
}

TEST_CASE("fit of a modulated power law") {
  const auto recs = synthetic([](double s) { return 2.0 * std::pow(s, -2.0) * (1.0 + 0.1 * std::sin(std::log(s))); }, 10.0, 1e3, 20);
  CHECK(std::abs(fit_power_law(recs).slope + 2.0) <= 0.1);
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_power_law(synthetic([](double s) { return 1.0 / s; }, 10.0, 1e3, 4)), Error);
  try {
    fit_power_law(synthetic([](double s) { return 1.0 / s; }, 10.0, 200.0, 10));
    FAIL("expected insufficient span");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_span);
  }
  auto recs = synthetic([](double s) { return 1.0 / s; }, 10.0, 1e3, 10);
  recs[3].valid = false;
  recs[3].deviation = 1e9;
  CHECK(fit_power_law(recs).n_points == 9);
  CHECK(std::abs(fit_power_law(recs).slope + 1.0) <= 1e-12);
}

TEST_CASE("log grid") {
  const auto g = log_grid(10.0, 1e3, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 10.0);
  CHECK(g[2] == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(g.back() == doctest::Approx(1e3).epsilon(1e-15));
}

TEST_CASE("quantity names") {
  for (Quantity q : {Quantity::metric_deviation, Quantity::ansatz_residual, Quantity::solution_offset,
                     Quantity::g_inf_distance, Quantity::dh_norm, Quantity::commutator_bound,
                     Quantity::margin, Quantity::dbar_norm, Quantity::cross_term,
                     Quantity::off_block_norm, Quantity::ansatz_level_residual, Quantity::qale_deviation})
    CHECK(parse_quantity(to_string(q)) == q);
  CHECK_THROWS_AS(parse_quantity("curvature"), Error);
}

TEST_CASE("decay scan bookkeeping") {
  const auto grid = log_grid(1.0, 100.0, 10);
  const RayEvaluator fails_once = [](double s) {
    if (s > 4.0 && s < 5.0) throw Error(ErrorCode::no_convergence, "synthetic");
    DecayRecord r;
    r.deviation = 1.0 / s;
    return r;
  };
  const auto recs = decay_scan(fails_once, grid, Quantity::margin);
  REQUIRE(recs.size() == grid.size());
  int invalid = 0;
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].scale == grid[i]);
    if (!recs[i].valid) {
      ++invalid;
      CHECK(recs[i].reason.rfind("no-convergence", 0) == 0);
    }
  }
  CHECK(invalid == 1);

  const RayEvaluator always_fails = [](double) -> DecayRecord { throw Error(ErrorCode::stiff_failure, "x"); };
  try {
    decay_scan(always_fails, grid, Quantity::margin);
    FAIL("expected scan abort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::scan_aborted);
  }
  std::vector<double> bad{1.0, 3.0, 2.0};
  CHECK_THROWS_AS(decay_scan(fails_once, bad, Quantity::margin), Error);

  // Resumed prefixes are kept and emitted in grid order.
  std::vector<DecayRecord> done(recs.begin(), recs.begin() + 3);
  done[0].deviation = 42.0;
  std::vector<size_t> order;
  ScanOptions so;
  so.jobs = 3;
  so.on_record = [&](size_t i, const DecayRecord&) { order.push_back(i); };
  const auto resumed = decay_scan(fails_once, grid, Quantity::margin, so, done);
  CHECK(resumed[0].deviation == 42.0);
  REQUIRE(order.size() == grid.size());
  for (size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
}

TEST_CASE("scans are deterministic") {
  const auto grid = log_grid(11.0, 300.0, 6);
  const RayEvaluator ray = make_ray(Quantity::commutator_bound, 3, finest_partition(3), ClusterMode::fixed_sigma, 1.0, 5);
  ScanOptions one, many;
  many.jobs = 4;
  const auto a = decay_scan(ray, grid, Quantity::commutator_bound, one);
  const auto b = decay_scan(ray, grid, Quantity::commutator_bound, many);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].deviation == b[i].deviation);
}

TEST_CASE("ALE ray reproduces the hilb2 deviation") {
  const AleRay ray(1.0, 3);
  const DecayRecord r = ray(100.0);
  CHECK(r.valid);
  CHECK(r.rho == 200.0);
  CHECK(r.deviation <= 1e-6);
  CHECK(r.deviation > 0.0);
}

TEST_CASE("commutator bound and margin along separated rays") {
  const auto grid = log_grid(11.0, 1e3, 10);
  const RayEvaluator comm = make_ray(Quantity::commutator_bound, 3, finest_partition(3), ClusterMode::fixed_sigma, 1.0, 1);
  CHECK(fit_power_law(decay_scan(comm, grid, Quantity::commutator_bound)).slope <= -2.0 + 0.5);
  const RayEvaluator margin = make_ray(Quantity::margin, 3, finest_partition(3), ClusterMode::fixed_sigma, 1.0, 1);
  double lo = 1e300;
  for (const auto& r : decay_scan(margin, grid, Quantity::margin)) lo = std::min(lo, r.deviation);
  CHECK(lo > 0.5);
}

TEST_CASE("QALE deviation at n = 3") {
  const auto ga = log_grid(70.0, 3000.0, 10);
  const FitResult fa = fit_power_law(qale_deviation(QaleMode::fixed_sigma, ga));
  CHECK(fa.slope <= -2.0 + 0.4);
  const auto gb = log_grid(80.0, 3000.0, 10);
  const FitResult fb = fit_power_law(qale_deviation(QaleMode::joint, gb));
  CHECK(fb.slope == doctest::Approx(-4.0).epsilon(0.5 / 4.0));
  const auto recs = qale_deviation(QaleMode::fixed_sigma, ga);
  for (const auto& r : recs) CHECK(r.sigma == doctest::Approx(recs.front().sigma).epsilon(1e-6));
}

TEST_CASE("degenerate p0 ray against the Euclidean metric") {
  const RayEvaluator ray = make_ray(Quantity::metric_deviation, 3, finest_partition(3), ClusterMode::fixed_sigma, 1.0, 2);
  const FitResult f = fit_power_law(decay_scan(ray, log_grid(11.0, 1e3, 10), Quantity::metric_deviation));
  CHECK(f.slope <= -2.0 + 0.4);
}
