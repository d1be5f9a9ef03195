#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>

#include "hkq/asymptotics.hpp"
#include "hkq/check.hpp"
#include "hkq/donaldson_flow.hpp"
#include "hkq/oracles.hpp"
#include "hkq/parallel.hpp"
#include "hkq/potential.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/sampling.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

using namespace hkq;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < budget_seconds;
  const bool ok = o.passed && in_time;
  if (!ok) ++failures;
  std::printf("[%s] %2d %s: %s; runtime %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), dt, budget_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[240];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::pair<Complex, Complex> random_pair(double R, Rng& rng) {
  const Complex l = random_complex(rng), m = random_complex(rng);
  const double s = R / std::sqrt(std::norm(l) + std::norm(m));
  return {s * l, s * m};
}

FitResult scan_fit(Quantity q, int n, const Partition& p, double lo, double hi, int points, unsigned jobs) {
  ScanOptions so;
  so.jobs = jobs;
  const RayEvaluator ray = make_ray(q, n, p, ClusterMode::fixed_sigma, 1.0, 1);
  const auto grid = log_grid(lo, hi, points);
  return fit_power_law(decay_scan(ray, grid, q, so));
}

}  // namespace

int main() {
  const unsigned jobs = default_jobs();

  criterion(1, "hilb2 oracle exactness", 1.0, [] {
    Rng rng(1);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double t = std::array<double, 3>{0.5, 1.0, 2.0}[k % 3];
      auto [l, m] = random_pair(random_log_uniform(0.1, 1e3, rng), rng);
      const MomentResidual r = moment_residual(hilb2_point(l, m, t));
      worst = std::max({worst, r.real_residual, r.complex_residual});
    }
    return Outcome{worst <= 1e-10, fmt("max moment residual %.3e (tol 1e-10) over 100 cases", worst)};
  });

  criterion(2, "ALE decay of Hilb2", 60.0, [jobs] {
    const FitResult f = scan_fit(Quantity::metric_deviation, 2, finest_partition(2), 10.0, 1e3, 20, jobs);
    return Outcome{std::abs(f.slope + 4.0) <= 0.3,
                   fmt("slope %.5f +- %.1e (target -4 +- 0.3), constant %.4e", f.slope, f.stderr_slope, f.constant())};
  });

  criterion(3, "Newton vs closed form (n = 2)", 10.0, [] {
    Rng rng(3);
    const Hilb2Chart oracle(1.0);
    const SeparatedChart chart(2, 1.0);
    double spec = 0.0, gram = 0.0;
    for (int k = 0; k < 50; ++k) {
      // pairwise_min = 2R must clear R_sep = 10.
      auto [l, m] = random_pair(random_log_uniform(5.5, 1e3, rng), rng);
      const RVector p = (RVector(4) << l.real(), l.imag(), m.real(), m.imag()).finished();
      const ChartJet a = oracle.jet(p), b = chart.jet(p);
      spec = std::max(spec, multiset_distance(joint_spectrum(a.point).points, joint_spectrum(b.point).points));
      const RMatrix ga = HorizontalProjector(a.point).gram(a.tangents);
      const RMatrix gb = HorizontalProjector(b.point).gram(b.tangents);
      gram = std::max(gram, (ga - gb).cwiseAbs().maxCoeff());
    }
    return Outcome{spec <= 1e-8 && gram <= 1e-8,
                   fmt("max spectrum distance %.3e, max Gram difference %.3e (tol 1e-8), 50 cases", spec, gram)};
  });

  criterion(4, "ansatz residual rate (n = 3)", 60.0, [jobs] {
    const FitResult f = scan_fit(Quantity::ansatz_residual, 3, finest_partition(3), 10.0, 1e3, 20, jobs);
    return Outcome{std::abs(f.slope + 2.0) <= 0.2,
                   fmt("slope %.5f +- %.1e (target -2 +- 0.2), constant %.4e", f.slope, f.stderr_slope, f.constant())};
  });

  criterion(5, "flow exponential decay (n = 3)", 60.0, [] {
    Rng rng(5);
    std::vector<std::shared_ptr<const LocalChart>> subs{std::make_shared<Hilb2Chart>(1.0), nullptr};
    const ClusterChart chart({2, 1}, subs, 1.0);
    double slope_err = 0.0, mu_c = 0.0;
    for (int k = 0; k < 20; ++k) {
      RVector p(8);
      RVector c(4);
      for (Index i = 0; i < 4; ++i) c(i) = random_complex(rng).real();
      const double q = random_log_uniform(40.0, 200.0, rng);
      p.head(4) = c * (q / (std::sqrt(6.0) * c.norm()));
      auto [l, m] = random_pair(random_log_uniform(0.5, 1.5, rng), rng);
      p.tail(4) << l.real(), l.imag(), m.real(), m.imag();
      const ADHMDatum z0 = block_ansatz(chart.cluster_data(p)).z0;
      FlowOptions fo;
      fo.tol = 1e-13;
      for (double s = 0.0; s <= 6.0; s += 0.25) fo.sample_times.push_back(s);
      const FlowResult r = flow_to_level(z0, 1.0, fo);
      double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
      for (const auto& s : r.trajectory) {
        mu_c = std::max(mu_c, s.complex_residual);
        if (s.s > 6.0) continue;
        const double y = std::log(s.real_residual);
        sx += s.s;
        sy += y;
        sxx += s.s * s.s;
        sxy += s.s * y;
        n += 1;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      slope_err = std::max(slope_err, std::abs(slope + 1.0));
    }
    return Outcome{slope_err <= 1e-6 && mu_c <= 1e-9,
                   fmt("max |slope + 1| %.3e (tol 1e-6), max |mu_C| %.3e (tol 1e-9), 20 starts", slope_err, mu_c)};
  });

  criterion(6, "g_inf and dh rates (n = 3)", 300.0, [jobs] {
    const Partition p = parse_partition("1,2|3", 3);
    const FitResult g = scan_fit(Quantity::g_inf_distance, 3, p, 40.0, 2000.0, 12, jobs);
    const FitResult h = scan_fit(Quantity::dh_norm, 3, p, 40.0, 2000.0, 12, jobs);
    const bool g_ok = std::abs(g.slope + 2.0) <= 0.3;
    // Upper-bound claim, asserted one-sided.
    const bool h_ok = h.slope <= -2.0 + 0.3;
    const bool h_band = std::abs(h.slope + 2.0) <= 0.3;
    std::string d = fmt("g_inf slope %.5f (target -2 +- 0.3); dh slope %.5f (bound <= -1.7, one-sided", g.slope, h.slope);
    d += h_band ? "; inside the two-sided band)" : "; decays faster than the bound, outside the two-sided band)";
    return Outcome{g_ok && h_ok, d};
  });

  criterion(7, "QALE decay (n = 3, p = {{1,2},{3}})", 900.0, [jobs] {
    ScanOptions so;
    so.jobs = jobs;
    const auto ga = log_grid(70.0, 3000.0, 12);
    const auto ra = qale_deviation(QaleMode::fixed_sigma, ga, so);
    const FitResult fa = fit_power_law(ra);
    const auto gb = log_grid(80.0, 3000.0, 12);
    const FitResult fb = fit_power_law(qale_deviation(QaleMode::joint, gb, so));
    // Mode (a) is an upper bound O(1/(sigma^2 rho^2)) at fixed sigma, asserted one-sided.
    const bool a_ok = fa.slope <= -2.0 + 0.4;
    const bool a_band = std::abs(fa.slope + 2.0) <= 0.4;
    const bool b_ok = std::abs(fb.slope + 4.0) <= 0.5;
    std::string d = fmt("mode (a) sigma = %.4f slope %.5f (bound <= -1.6, one-sided", ra.front().sigma, fa.slope);
    d += a_band ? "; inside the two-sided band)" : "; decays faster than the bound, outside the two-sided band)";
    d += fmt("; mode (b) slope %.5f (target -4 +- 0.5)", fb.slope);
    return Outcome{a_ok && b_ok, d};
  });

  criterion(8, "free action and commutator bound", 300.0, [jobs] {
    Rng rng(8);
    std::vector<Configuration> qs;
    for (int k = 0; k < 500; ++k)
      qs.push_back(random_separated_configuration(2 + k % 2, random_log_uniform(10.0, 1e3, rng), rng));
    std::vector<double> margins(qs.size());
    parallel_for(qs.size(), jobs, [&](size_t i) { margins[i] = free_action_margin(newton_solve(qs[i], 1.0).datum); });
    const double lo = *std::min_element(margins.begin(), margins.end());
    const FitResult f = scan_fit(Quantity::commutator_bound, 3, finest_partition(3), 10.0, 1e3, 20, jobs);
    return Outcome{lo > 0.0 && f.slope <= -1.5,
                   fmt("min margin %.4f over 500 points (> 0); commutator slope %.5f (<= -1.5), M = %.4e",
                       lo, f.slope, f.constant())};
  });

  criterion(9, "invariant suite", 60.0, [] {
    const auto results = run_checks("core");
    int bad = 0;
    std::string names;
    for (const auto& r : results)
      if (!r.passed) {
        ++bad;
        names += " " + r.name;
      }
    std::string d = fmt("%.0f of %.0f core invariants pass", static_cast<double>(results.size() - bad),
                        static_cast<double>(results.size()));
    if (bad) d += "; failing:" + names;
    return Outcome{bad == 0, d};
  });

  criterion(10, "potential bound", 1200.0, [jobs] {
    const auto grid = log_grid(10.0, 100.0, 5);
    double lo = 1e300, hi = 0.0, ci = 0.0;
    for (int n : {2, 3})
      for (double r : grid) {
        SamplerOptions o;
        o.samples = 1000000;
        o.seed = 1;
        o.jobs = jobs;
        const PotentialEstimate e = estimate_potential(potential_probe(n, r), o);
        const double s = e.value * r / std::log(r);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        ci = std::max(ci, e.ci_halfwidth / e.value);
      }
    return Outcome{hi / lo <= 10.0 && ci <= 0.1,
                   fmt("F rho / log rho in [%.4f, %.4f], max/min %.3f (<= 10)", lo, hi, hi / lo) +
                       fmt(", max relative ci %.4f (<= 0.1)", ci)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
