#include "hkq/check.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <set>

#include "hkq/asymptotics.hpp"
#include "hkq/donaldson_flow.hpp"
#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/potential.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/sampling.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

namespace {

using Check = std::function<CheckResult()>;

struct NamedCheck {
  std::string name;
  Check run;
};

CheckResult at_most(double measured, double threshold, Json extra = Json::object()) {
  CheckResult r;
  r.measured = measured;
  r.threshold = threshold;
  r.relation = "<=";
  r.passed = measured <= threshold;
  r.extra = std::move(extra);
  return r;
}

CheckResult at_least(double measured, double threshold, Json extra = Json::object()) {
  CheckResult r = at_most(measured, threshold, std::move(extra));
  r.relation = ">=";
  r.passed = measured >= threshold;
  return r;
}

CheckResult above(double measured, double threshold, Json extra = Json::object()) {
  CheckResult r = at_most(measured, threshold, std::move(extra));
  r.relation = ">";
  r.passed = measured > threshold;
  return r;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RVector hilb2_params(Complex lambda, Complex mu) {
  return (RVector(4) << lambda.real(), lambda.imag(), mu.real(), mu.imag()).finished();
}

// Random (lambda, mu) with |(lambda, mu)| = R.
std::pair<Complex, Complex> random_hilb2(double R, Rng& rng) {
  Complex l = random_complex(rng), m = random_complex(rng);
  const double s = R / std::sqrt(std::norm(l) + std::norm(m));
  return {s * l, s * m};
}

// Solved on-level points for n = 2 and 3 used by several checks.
std::vector<ADHMDatum> sample_level_points(Rng& rng) {
  std::vector<ADHMDatum> out;
  for (double R : {0.3, 3.0, 40.0}) {
    auto [l, m] = random_hilb2(R, rng);
    out.push_back(hilb2_point(l, m, 1.0));
  }
  for (double gap : {12.0, 60.0}) {
    out.push_back(newton_solve(random_separated_configuration(3, gap, rng), 1.0).datum);
  }
  return out;
}

// Block-ansatz start for n = 3, p = {{1,2},{3}}, at center norm about q.
struct FlowStart {
  std::shared_ptr<ClusterChart> chart;
  RVector params;
  ADHMDatum z0;
};

FlowStart flow_start(double q, Rng& rng) {
  std::vector<std::shared_ptr<const LocalChart>> subs{std::make_shared<Hilb2Chart>(1.0), nullptr};
  auto chart = std::make_shared<ClusterChart>(std::vector<Index>{2, 1}, subs, 1.0);
  RVector p(8);
  // q_1 carries weight 2 and q_2 = -2 q_1; |center| = sqrt(6) |q_1|.
  const RVector c = to_real(std::vector<Point2>{{random_complex(rng), random_complex(rng)}});
  p.head(4) = c * (q / (std::sqrt(6.0) * c.norm()));
  auto [l, m] = random_hilb2(1.0, rng);
  p.tail(4) = hilb2_params(l, m);
  const ClusterData data = chart->cluster_data(p);
  return {chart, p, block_ansatz(data).z0};
}

// ---------------------------------------------------------------- core

std::vector<NamedCheck> core_checks() {
  std::vector<NamedCheck> c;
  c.push_back({"quaternion_relations", [] {
    Rng rng(101);
    double worst = 0.0;
    for (Index n = 1; n <= 4; ++n)
      for (int k = 0; k < 10; ++k) {
        const TangentVector v = random_tangent(n, rng);
        const double nv = norm(v);
        auto q = [](Axis a, const TangentVector& w) { return quaternion_apply(a, w); };
        worst = std::max({worst, norm(q(Axis::I, q(Axis::I, v)) + v) / nv,
                          norm(q(Axis::J, q(Axis::J, v)) + v) / nv,
                          norm(q(Axis::K, q(Axis::K, v)) + v) / nv,
                          norm(q(Axis::I, q(Axis::J, v)) - q(Axis::K, v)) / nv});
      }
    return at_most(worst, 1e-15);
  }});
  c.push_back({"quaternion_isometry", [] {
    Rng rng(102);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      const Index n = 1 + k % 4;
      const TangentVector v = random_tangent(n, rng), w = random_tangent(n, rng);
      for (Axis a : {Axis::I, Axis::J, Axis::K}) {
        const double d = inner(quaternion_apply(a, v), quaternion_apply(a, w)) - inner(v, w);
        worst = std::max(worst, std::abs(d) / (norm(v) * norm(w)));
      }
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"moment_derivative_identity", [] {
    // <dmu(z) dz, h> = <i l_z(h), dz>, dmu by central differences at eps = 1e-5.
    Rng rng(103);
    const double eps = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 24; ++k) {
      const Index n = 1 + k % 4;
      const ADHMDatum z = random_datum(n, 1.0, rng);
      const TangentVector dz = random_tangent(n, rng);
      const GaugeAlgebraElement h = random_gauge(n, rng);
      ADHMDatum zp = ADHMDatum::from_coordinates(z.coordinates() + eps * dz, z.t);
      ADHMDatum zm = ADHMDatum::from_coordinates(z.coordinates() - eps * dz, z.t);
      const CMatrix dmu = (real_moment(zp).h - real_moment(zm).h) / (2.0 * eps);
      const double lhs = inner(GaugeAlgebraElement{dmu}, h);
      const double rhs = inner(kI * infinitesimal_action(z, h), dz);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    return at_most(worst, 1e-8);
  }});
  c.push_back({"adjoint_identity", [] {
    Rng rng(104);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      const Index n = 1 + k % 4;
      const ADHMDatum z = random_datum(n, 1.0, rng);
      const GaugeAlgebraElement h = random_gauge(n, rng);
      const TangentVector v = random_tangent(n, rng);
      const double d = inner(infinitesimal_action(z, h), v) - inner(h, infinitesimal_action_adjoint(z, v));
      worst = std::max(worst, std::abs(d) / (norm(h) * norm(v)));
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"moment_equivariance", [] {
    Rng rng(105);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Index n = 1 + k % 4;
      const ADHMDatum z = random_datum(n, 1.0, rng);
      const CMatrix u = random_unitary(n, rng);
      const CMatrix g = random_invertible(n, rng);
      const CMatrix mu = real_moment(z).h;
      const CMatrix mu_u = real_moment(gauge_act(u, z)).h;
      worst = std::max(worst, (mu_u - u * mu * u.adjoint()).norm() / mu.norm());
      const CMatrix mc = complex_moment(z);
      const CMatrix mc_g = complex_moment(gauge_act(g, z));
      worst = std::max(worst, (mc_g - g * mc * g.inverse()).norm() / (mc.norm() * condition_number(g)));
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"q_symmetric", [] {
    Rng rng(106);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      const Index n = 1 + k % 4;
      const ADHMDatum z = random_datum(n, 1.0, rng);
      GaugeAlgebraElement h = random_gauge(n, rng), g = random_gauge(n, rng);
      h.h /= norm(h);
      g.h /= norm(g);
      worst = std::max(worst, std::abs(inner(q_operator(z, h), g) - inner(h, q_operator(z, g))));
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"on_level_implies_small_y", [] {
    Rng rng(107);
    double worst = 0.0;
    int flagged = 0;
    std::vector<ADHMDatum> pts = sample_level_points(rng);
    ADHMDatum bumped = pts.front();
    bumped.y(0) = 1e-3;
    pts.push_back(bumped);
    for (int k = 0; k < 5; ++k) pts.push_back(random_datum(2, 1.0, rng));
    for (const auto& z : pts)
      if (on_level(z)) {
        ++flagged;
        worst = std::max(worst, z.y.norm());
      }
    return at_most(worst, 1e-10, {{"flagged", flagged}});
  }});
  c.push_back({"projection_idempotent", [] {
    Rng rng(108);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const HorizontalProjector P(z);
      for (int k = 0; k < 6; ++k) {
        const TangentVector v = random_tangent(z.n(), rng);
        const TangentVector pv = P.project(v);
        worst = std::max(worst, norm(P.project(pv) - pv) / norm(v));
      }
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"projection_self_adjoint", [] {
    Rng rng(109);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const HorizontalProjector P(z);
      for (int k = 0; k < 6; ++k) {
        const TangentVector v = random_tangent(z.n(), rng), w = random_tangent(z.n(), rng);
        const double d = inner(P.project(v), w) - inner(v, P.project(w));
        worst = std::max(worst, std::abs(d) / (norm(v) * norm(w)));
      }
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"metric_gauge_invariance", [] {
    Rng rng(110);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const CMatrix u = random_unitary(z.n(), rng);
      const TangentVector v = random_tangent(z.n(), rng), w = random_tangent(z.n(), rng);
      const double g0 = quotient_metric(z, v, w);
      const double g1 = quotient_metric(gauge_act(u, z), gauge_act(u, v), gauge_act(u, w));
      const double scale = std::sqrt(quotient_metric(z, v, v) * quotient_metric(z, w, w));
      worst = std::max(worst, std::abs(g1 - g0) / scale);
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"kahler_antisymmetry", [] {
    Rng rng(111);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const TangentVector v = random_tangent(z.n(), rng), w = random_tangent(z.n(), rng);
      for (Axis a : {Axis::I, Axis::J, Axis::K}) {
        const double d = kahler_form(z, v, w, a) + kahler_form(z, w, v, a);
        worst = std::max(worst, std::abs(d) / (norm(v) * norm(w)));
      }
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"metric_positive_semidefinite", [] {
    Rng rng(112);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      std::vector<TangentVector> probes;
      for (int k = 0; k < 6; ++k) probes.push_back(random_tangent(z.n(), rng));
      const RMatrix g = HorizontalProjector(z).gram(probes);
      Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
      worst = std::max(worst, -es.eigenvalues().minCoeff() / es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"orbit_directions_null", [] {
    Rng rng(113);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const HorizontalProjector P(z);
      for (int k = 0; k < 4; ++k) {
        const TangentVector v = infinitesimal_action(z, random_gauge(z.n(), rng));
        worst = std::max(worst, std::abs(P.metric(v, v)) / inner(v, v));
        const TangentVector iv = quaternion_apply(Axis::J, v);
        worst = std::max(worst, std::abs(P.metric(iv, iv)) / inner(iv, iv));
      }
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"holomorphy_defect_hilb2", [] {
    const Hilb2Chart chart(1.0);
    const RVector p = hilb2_params(3.0, 4.0);
    double worst = 0.0;
    for (Index k = 0; k < 4; ++k)
      worst = std::max(worst, holomorphy_defect(chart, p, unit_vector(4, k)));
    return at_most(worst, 1e-5);
  }});
  c.push_back({"holomorphy_defect_separated_n3", [] {
    Rng rng(114);
    const SeparatedChart chart(3, 1.0);
    const RVector p = chart.parameters(random_separated_configuration(3, 15.0, rng));
    double worst = 0.0;
    for (Index k = 0; k < p.size(); ++k)
      worst = std::max(worst, holomorphy_defect(chart, p, unit_vector(p.size(), k)));
    return at_most(worst, 1e-5);
  }});
  c.push_back({"free_action_margin_n1", [] {
    // n = 1: Q_z h = |x|^2 h with |x|^2 = t at the singleton datum.
    return at_most(std::abs(free_action_margin(singleton_datum(2.5)) - 2.5), 1e-14);
  }});
  return c;
}

// ---------------------------------------------------------------- solvers

std::vector<NamedCheck> solver_checks() {
  std::vector<NamedCheck> c;
  c.push_back({"hilb2_residuals", [] {
    Rng rng(201);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double t = std::array<double, 3>{0.5, 1.0, 2.0}[k % 3];
      auto [l, m] = random_hilb2(random_log_uniform(0.1, 1e3, rng), rng);
      const MomentResidual r = moment_residual(hilb2_point(l, m, t));
      worst = std::max({worst, r.real_residual, r.complex_residual});
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"hilb2_scaling_law", [] {
    Rng rng(202);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      auto [l, m] = random_hilb2(random_log_uniform(0.1, 100.0, rng), rng);
      const double s = random_log_uniform(0.1, 10.0, rng);
      const ADHMDatum a = hilb2_point(s * l, s * m, s * s);
      const ADHMDatum b = hilb2_point(l, m, 1.0);
      const TangentVector d = a.coordinates() - s * b.coordinates();
      worst = std::max(worst, norm(d) / (s * norm(b.coordinates())));
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"newton_matches_hilb2", [] {
    Rng rng(203);
    double worst = 0.0;
    const double t = 1.0;
    const Hilb2Chart oracle(t);
    const SeparatedChart chart(2, t);
    for (int k = 0; k < 10; ++k) {
      auto [l, m] = random_hilb2(random_log_uniform(5.5, 1e3, rng), rng);
      const RVector p = hilb2_params(l, m);
      const ChartJet a = oracle.jet(p), b = chart.jet(p);
      const JointSpectrum sa = joint_spectrum(a.point), sb = joint_spectrum(b.point);
      worst = std::max(worst, multiset_distance(sa.points, sb.points));
      const RMatrix ga = HorizontalProjector(a.point).gram(a.tangents);
      const RMatrix gb = HorizontalProjector(b.point).gram(b.tangents);
      worst = std::max(worst, (ga - gb).cwiseAbs().maxCoeff());
    }
    return at_most(worst, 1e-8);
  }});
  c.push_back({"newton_quadratic_convergence", [] {
    Rng rng(204);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto sol = newton_solve(random_separated_configuration(3, 10.0 + 5.0 * k, rng), 1.0);
      const auto& h = sol.report.history;
      for (size_t i = 0; i + 1 < h.size(); ++i)
        if (h[i + 1] > 1e-13) worst = std::max(worst, h[i + 1] / (h[i] * h[i]));
    }
    return at_most(worst, 1e2);
  }});
  c.push_back({"separated_on_level", [] {
    Rng rng(205);
    double worst = 0.0;
    bool y_zero = true;
    for (int k = 0; k < 10; ++k) {
      const auto sol = newton_solve(random_separated_configuration(2 + k % 3, 12.0, rng), 1.0);
      const MomentResidual r = moment_residual(sol.datum);
      worst = std::max({worst, r.real_residual, r.complex_residual});
      y_zero = y_zero && sol.datum.y.isZero(0.0);
    }
    CheckResult r = at_most(worst, 1e-10, {{"y_exactly_zero", y_zero}});
    r.passed = r.passed && y_zero;
    return r;
  }});
  c.push_back({"separated_permutation_equivariance", [] {
    Rng rng(206);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Configuration q = random_separated_configuration(3, 15.0, rng);
      Configuration qp = q;
      std::rotate(qp.points.begin(), qp.points.begin() + 1, qp.points.end());
      const auto a = joint_spectrum(newton_solve(q, 1.0).datum);
      const auto b = joint_spectrum(newton_solve(qp, 1.0).datum);
      worst = std::max(worst, multiset_distance(a.points, b.points));
    }
    return at_most(worst, 1e-8);
  }});
  c.push_back({"joint_spectrum_gauge_invariance", [] {
    Rng rng(207);
    double worst = 0.0;
    for (const auto& z : sample_level_points(rng)) {
      const auto a = joint_spectrum(z);
      const auto b = joint_spectrum(gauge_act(random_unitary(z.n(), rng), z));
      worst = std::max(worst, multiset_distance(a.points, b.points) / std::max(1.0, rho(a.points)));
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"sigma_rho_scaling", [] {
    Rng rng(208);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Configuration q = random_separated_configuration(2 + k % 3, 1.0, rng);
      const double s = random_log_uniform(0.1, 100.0, rng);
      Configuration qs = q;
      for (auto& p : qs.points) p = s * p;
      worst = std::max(worst, std::abs(rho(qs.points) - s * rho(q.points)) / (s * rho(q.points)));
      worst = std::max(worst, std::abs((sigma(qs.points) - 1.0) - s * (sigma(q.points) - 1.0)) /
                                  (s * (sigma(q.points) - 1.0)));
    }
    return at_most(worst, 1e-14);
  }});
  c.push_back({"classify_scale_invariance", [] {
    Rng rng(209);
    int mismatches = 0;
    for (int n = 2; n <= 3; ++n) {
      const auto specs = default_region_specs(n);
      double big_r = 0.0;
      for (const auto& s : specs) big_r = std::max(big_r, s.R);
      for (int k = 0; k < 30; ++k) {
        Configuration q = random_separated_configuration(n, random_log_uniform(1e-3, 1.0, rng), rng);
        // Push |v| above every spec radius.
        const double s0 = 2.0 * big_r / configuration_norm(q.points);
        for (auto& p : q.points) p = s0 * p;
        const auto a = classify_region(q.points, specs);
        for (double s : {1.0, 3.0, 10.0, 100.0}) {
          Configuration qs = q;
          for (auto& p : qs.points) p = s * p;
          if (classify_region(qs.points, specs) != a) ++mismatches;
        }
      }
    }
    return at_most(mismatches, 0.0);
  }});
  c.push_back({"flow_decay_and_conservation", [] {
    Rng rng(210);
    double slope_err = 0.0, mu_c = 0.0, margin_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const FlowStart st = flow_start(40.0 + 10.0 * k, rng);
      FlowOptions fo;
      fo.tol = 1e-13;
      for (double s = 0.0; s <= 6.0; s += 0.5) fo.sample_times.push_back(s);
      const FlowResult fr = flow_to_level(st.z0, 1.0, fo);
      std::vector<double> xs, ys;
      for (const auto& s : fr.trajectory) {
        mu_c = std::max(mu_c, s.complex_residual);
        margin_ratio = std::min(margin_ratio, s.margin / fr.trajectory.front().margin);
        if (s.s <= 6.0) {
          xs.push_back(s.s);
          ys.push_back(std::log(s.real_residual));
        }
      }
      slope_err = std::max(slope_err, std::abs(ols_slope(xs, ys) + 1.0));
    }
    CheckResult r = at_most(slope_err, 1e-6, {{"max_complex_residual", mu_c},
                                              {"min_margin_ratio", margin_ratio}});
    r.passed = r.passed && mu_c <= 1e-9 && margin_ratio >= 0.5;
    return r;
  }});
  c.push_back({"flow_matches_newton_on_h", [] {
    Rng rng(211);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      const FlowStart st = flow_start(45.0 + 15.0 * k, rng);
      FlowOptions fo;
      fo.tol = 1e-12;
      const FlowResult fr = flow_to_level(st.z0, 1.0, fo);
      const NewtonHResult nh = newton_on_h(st.z0, 1.0);
      const auto a = joint_spectrum(fr.z_h), b = joint_spectrum(nh.z_h);
      worst = std::max(worst, multiset_distance(a.points, b.points));
      // Same probes transported by each endpoint's own e^h.
      const auto dz0 = st.chart->ansatz_tangents(st.chart->solve(st.params), st.params);
      std::vector<TangentVector> pa, pb;
      for (const auto& v : dz0) {
        pa.push_back(gauge_act_near_identity(expm1_hermitian(fr.h), v));
        pb.push_back(gauge_act_near_identity(expm1_hermitian(nh.h), v));
      }
      const RMatrix ga = HorizontalProjector(fr.z_h).gram(pa);
      const RMatrix gb = HorizontalProjector(nh.z_h).gram(pb);
      worst = std::max(worst, (ga - gb).cwiseAbs().maxCoeff());
    }
    return at_most(worst, 1e-8);
  }});
  c.push_back({"polar_decomposition", [] {
    Rng rng(212);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const CMatrix g = random_invertible(3, rng);
      const PolarDecomposition pd = polar_decompose(g);
      const Index n = g.rows();
      worst = std::max({worst, (pd.unitary * expm_hermitian(pd.h) - g).norm() / g.norm(),
                        (pd.unitary.adjoint() * pd.unitary - CMatrix::Identity(n, n)).norm(),
                        (pd.h - pd.h.adjoint()).norm()});
    }
    return at_most(worst, 1e-12);
  }});
  c.push_back({"block_ansatz_off_block", [] {
    Rng rng(213);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      const FlowStart st = flow_start(40.0 * (k + 1), rng);
      worst = std::max(worst, complex_moment(st.z0).norm());
    }
    return at_most(worst, 1e-10);
  }});
  c.push_back({"free_action_margin_positive", [] {
    Rng rng(214);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 40; ++k) {
      if (k % 2 == 0) {
        auto [l, m] = random_hilb2(random_log_uniform(0.1, 1e3, rng), rng);
        worst = std::min(worst, free_action_margin(hilb2_point(l, m, 1.0)));
      } else {
        const auto sol = newton_solve(random_separated_configuration(3, random_log_uniform(10.0, 1e3, rng), rng), 1.0);
        worst = std::min(worst, free_action_margin(sol.datum));
      }
    }
    return above(worst, 0.0);
  }});
  return c;
}

// ---------------------------------------------------------------- asymptotics

struct FitTarget {
  std::string name;
  Quantity quantity;
  int n;
  std::string partition;  // empty: finest
  double lo, hi;
  int points;
  double exponent;
  // upper: slope <= exponent + slack; lower: slope >= exponent - slack.
  bool lower_bound = false;
};

std::vector<NamedCheck> asymptotic_checks(unsigned jobs) {
  const std::vector<FitTarget> targets = {
      {"fit_hilb2_metric_deviation", Quantity::metric_deviation, 2, "", 10, 1e3, 12, -4.0},
      {"fit_ansatz_residual", Quantity::ansatz_residual, 3, "", 10, 1e3, 10, -2.0},
      {"fit_solution_offset", Quantity::solution_offset, 3, "", 11, 1e3, 10, -2.0},
      {"fit_separated_metric_deviation", Quantity::metric_deviation, 3, "", 11, 1e3, 10, -4.0},
      {"fit_commutator_bound", Quantity::commutator_bound, 3, "", 11, 1e3, 10, -2.0},
      {"fit_dbar_norm", Quantity::dbar_norm, 3, "", 11, 1e3, 10, -2.0},
      {"fit_margin", Quantity::margin, 3, "", 11, 1e3, 8, 0.0, true},
      {"fit_g_inf_distance", Quantity::g_inf_distance, 3, "1,2|3", 40, 2000, 8, -2.0},
      {"fit_dh_norm", Quantity::dh_norm, 3, "1,2|3", 40, 2000, 8, -2.0},
      {"fit_cross_term", Quantity::cross_term, 3, "1,2|3", 40, 2000, 8, -2.0},
      {"fit_off_block_norm", Quantity::off_block_norm, 3, "1,2|3", 40, 2000, 8, -1.0},
      {"fit_ansatz_level_residual", Quantity::ansatz_level_residual, 3, "1,2|3", 40, 2000, 8, -2.0},
  };
  const double slack = 0.5;
  std::vector<NamedCheck> c;
  for (const auto& tg : targets) {
    c.push_back({tg.name, [tg, jobs, slack] {
      const Partition p = tg.partition.empty() ? finest_partition(tg.n) : parse_partition(tg.partition, tg.n);
      const RayEvaluator ray = make_ray(tg.quantity, tg.n, p, ClusterMode::fixed_sigma, 1.0, 1);
      ScanOptions so;
      so.jobs = jobs;
      const auto grid = log_grid(tg.lo, tg.hi, tg.points);
      const FitResult f = fit_power_law(decay_scan(ray, grid, tg.quantity, so));
      Json extra = {{"quantity", to_string(tg.quantity)}, {"target_exponent", tg.exponent},
                    {"slack", slack}, {"fit", to_json(f)}};
      return tg.lower_bound ? at_least(f.slope, tg.exponent - slack, extra)
                            : at_most(f.slope, tg.exponent + slack, extra);
    }});
  }
  for (QaleMode mode : {QaleMode::fixed_sigma, QaleMode::joint}) {
    const bool a = mode == QaleMode::fixed_sigma;
    c.push_back({a ? "fit_qale_fixed_sigma" : "fit_qale_joint", [a, mode, jobs, slack] {
      ScanOptions so;
      so.jobs = jobs;
      const auto grid = a ? log_grid(70, 3000, 8) : log_grid(80, 3000, 8);
      const FitResult f = fit_power_law(qale_deviation(mode, grid, so));
      const double target = a ? -2.0 : -4.0;
      return at_most(f.slope, target + slack,
                     {{"quantity", "qale_deviation"}, {"target_exponent", target},
                      {"slack", slack}, {"fit", to_json(f)}});
    }});
  }
  return c;
}

// ---------------------------------------------------------------- potential

std::vector<NamedCheck> potential_checks(unsigned jobs) {
  std::vector<NamedCheck> c;
  c.push_back({"weight_example", [] {
    const Configuration y{{{1.0, 0.0}, {-1.0, 0.0}}};
    return at_most(std::abs(weight(y) - 1.0 / 18.0), 1e-16);
  }});
  c.push_back({"orbifold_distance_metric", [] {
    Rng rng(401);
    double worst = 0.0;
    for (int k = 0; k < 30; ++k) {
      const Index n = 2 + k % 3;
      const Configuration x = random_separated_configuration(n, 1.0, rng);
      const Configuration y = random_separated_configuration(n, 1.0, rng);
      const Configuration z = random_separated_configuration(n, 1.0, rng);
      Configuration px = x;
      std::reverse(px.points.begin(), px.points.end());
      worst = std::max({worst, orbifold_distance(x, px),
                        std::abs(orbifold_distance(x, y) - orbifold_distance(y, x)),
                        orbifold_distance(x, z) - orbifold_distance(x, y) - orbifold_distance(y, z)});
    }
    return at_most(worst, 1e-14);
  }});
  c.push_back({"potential_growth", [jobs] {
    double worst = 0.0, ratio = 0.0, ci = 0.0, decomposition = 0.0;
    Json rows = Json::array();
    for (int n : {2, 3}) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double r : {10.0, 31.622776601683793, 100.0}) {
        SamplerOptions o;
        o.samples = 200000;
        o.jobs = jobs;
        const PotentialEstimate e = estimate_potential(potential_probe(n, r), o);
        const double scaled = e.value * r / std::log(r);
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
        ci = std::max(ci, e.ci_halfwidth / e.value);
        const double parts = e.f1.value + e.f2.value + e.f3.value;
        const double comb = std::sqrt(e.f1.ci_halfwidth * e.f1.ci_halfwidth +
                                      e.f2.ci_halfwidth * e.f2.ci_halfwidth +
                                      e.f3.ci_halfwidth * e.f3.ci_halfwidth) + e.ci_halfwidth;
        decomposition = std::max(decomposition, std::abs(e.value - parts) / comb);
        rows.push_back({{"n", n}, {"rho", r}, {"F_rho_over_log_rho", scaled},
                        {"F1_rho", e.f1.value * r}, {"F3_rho", e.f3.value * r}});
      }
      ratio = std::max(ratio, hi / lo);
    }
    worst = ratio;
    CheckResult res = at_most(worst, 10.0, {{"max_relative_ci", ci},
                                            {"decomposition_over_ci", decomposition},
                                            {"points", rows}});
    res.passed = res.passed && ci <= 0.1 && decomposition <= 1.0;
    return res;
  }});
  c.push_back({"potential_determinism", [jobs] {
    SamplerOptions o;
    o.samples = 50000;
    o.seed = 11;
    o.jobs = jobs;
    const Configuration x = potential_probe(3, 20.0);
    const PotentialEstimate a = estimate_potential(x, o);
    o.jobs = 1;
    const PotentialEstimate b = estimate_potential(x, o);
    return at_most(std::abs(a.value - b.value) + std::abs(a.ci_halfwidth - b.ci_halfwidth), 0.0);
  }});
  c.push_back({"potential_ci_scaling", [jobs] {
    const Configuration x = potential_probe(2, 30.0);
    SamplerOptions o;
    o.jobs = jobs;
    o.samples = 200000;
    const double c1 = estimate_potential(x, o).ci_halfwidth;
    o.samples = 400000;
    const double c2 = estimate_potential(x, o).ci_halfwidth;
    return at_most(std::abs(c1 / c2 / std::sqrt(2.0) - 1.0), 0.2, {{"ratio", c1 / c2}});
  }});
  c.push_back({"volume_small_tau_limit", [jobs] {
    const Configuration x = potential_probe(2, 20.0);
    const std::vector<double> radii{0.05};
    SamplerOptions o;
    o.samples = 100000;
    o.jobs = jobs;
    const VolumeSample v = volume_profile(x, radii, o).front();
    const double expected = ball_volume(4) * std::pow(0.05, 4) / std::pow(sigma(x.points), 2);
    return at_most(std::abs(v.V / expected - 1.0), 0.02);
  }});
  c.push_back({"volume_case2_exponent", [jobs] {
    const Configuration x = potential_probe(2, 100.0);
    std::vector<double> radii;
    for (int i = 0; i < 8; ++i) radii.push_back(0.5 * std::pow(10.0, i * 1.6 / 7.0));
    SamplerOptions o;
    o.samples = 100000;
    o.jobs = jobs;
    const FitResult f = fit_volume_exponent(volume_profile(x, radii, o), true);
    return at_most(std::abs(f.slope - 4.0), 0.5, {{"fit", to_json(f)}, {"target_exponent", 4}});
  }});
  c.push_back({"volume_case3_exponent", [jobs] {
    const Configuration x{{{0.25, 0.0}, {-0.25, 0.0}}};
    std::vector<double> radii;
    for (int i = 0; i < 8; ++i) radii.push_back(3.0 * std::pow(10.0, i * 1.6 / 7.0));
    SamplerOptions o;
    o.samples = 100000;
    o.jobs = jobs;
    const FitResult f = fit_volume_exponent(volume_profile(x, radii, o), false);
    return at_most(std::abs(f.slope - 2.0), 0.5, {{"fit", to_json(f)}, {"target_exponent", 2}});
  }});
  return c;
}

std::vector<NamedCheck> suite_checks(const std::string& suite, unsigned jobs) {
  if (suite == "core") return core_checks();
  if (suite == "solvers") return solver_checks();
  if (suite == "asymptotics") return asymptotic_checks(jobs);
  if (suite == "potential") return potential_checks(jobs);
  throw Error(ErrorCode::invalid_argument, "unknown check suite '" + suite + "'");
}

}  // namespace

std::vector<std::string> check_suite_names() { return {"core", "solvers", "asymptotics", "potential"}; }

std::vector<CheckResult> run_checks(const std::string& suite, unsigned jobs) {
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = check_suite_names();
  } else {
    suites = {suite};
  }
  std::vector<CheckResult> out;
  std::set<std::string> seen;
  for (const auto& s : suites) {
    for (const auto& chk : suite_checks(s, jobs)) {
      if (!seen.insert(chk.name).second) continue;
      CheckResult r;
      try {
        r = chk.run();
      } catch (const Error& e) {
        r.passed = false;
        r.measured = std::numeric_limits<double>::quiet_NaN();
        r.extra = {{"error", to_string(e.code())}, {"message", e.what()}};
      }
      r.suite = s;
      r.name = chk.name;
      out.push_back(std::move(r));
    }
  }
  return out;
}

Json check_report(const std::string& suite, unsigned jobs) {
  const auto results = run_checks(suite, jobs);
  Json details = Json::array();
  int passed = 0;
  for (const auto& r : results) {
    if (r.passed) ++passed;
    Json d = {{"name", r.name}, {"suite", r.suite}, {"passed", r.passed},
              {"measured", r.measured}, {"threshold", r.threshold}, {"relation", r.relation}};
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) d[it.key()] = it.value();
    details.push_back(std::move(d));
  }
  return {{"suite", suite}, {"passed", passed},
          {"failed", static_cast<int>(results.size()) - passed}, {"details", details}};
}

}  // namespace hkq
