#include "hkq/oracles.hpp"

#include <cmath>
#include <limits>

#include "hkq/error.hpp"

namespace hkq {

namespace {

struct Hilb2Scalars {
  double r2;    // |lambda|^2 + |mu|^2
  double s;     // sqrt(4 + t^2/R^4)
  double rho2;
  double rho;
  double x1;
  double x2;
};

Hilb2Scalars hilb2_scalars(Complex lambda, Complex mu, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "hilb2: t must be positive");
  Hilb2Scalars c{};
  c.r2 = std::norm(lambda) + std::norm(mu);
  if (!(c.r2 > 0.0)) throw Error(ErrorCode::origin_input, "hilb2: (lambda, mu) = 0 is excluded");
  const double u = t / c.r2;  // t / R^2
  c.s = std::sqrt(4.0 + u * u);
  c.rho2 = u * u / (c.s + 2.0);  // sqrt(4 + u^2) - 2 without cancellation
  c.rho = std::sqrt(c.rho2);
  // t -+ rho^2 R^2, rearranged to avoid cancellation near the origin.
  c.x1 = std::sqrt(t * (2.0 + 4.0 / (c.s + u)) / (c.s + 2.0));
  c.x2 = std::sqrt(t + c.rho2 * c.r2);
  return c;
}

}  // namespace

ADHMDatum hilb2_point(Complex lambda, Complex mu, double t) {
  const Hilb2Scalars c = hilb2_scalars(lambda, mu, t);
  ADHMDatum z = ADHMDatum::zero(2, t);
  z.A << lambda, lambda * c.rho, 0.0, -lambda;
  z.B << mu, mu * c.rho, 0.0, -mu;
  z.x << c.x1, c.x2;
  return z;
}

TangentVector hilb2_tangent(Complex lambda, Complex mu, double t, Complex dlambda, Complex dmu) {
  const Hilb2Scalars c = hilb2_scalars(lambda, mu, t);
  const double dr2 = 2.0 * (std::conj(lambda) * dlambda + std::conj(mu) * dmu).real();
  const double du2 = -2.0 * t * t / (c.r2 * c.r2 * c.r2) * dr2;  // d(t^2/R^4)
  const double drho2 = du2 / (2.0 * c.s);
  const double drho = drho2 / (2.0 * c.rho);
  const double dp = drho2 * c.r2 + c.rho2 * dr2;  // d(rho^2 R^2)
  TangentVector v = TangentVector::zero(2);
  v.A << dlambda, dlambda * c.rho + lambda * drho, 0.0, -dlambda;
  v.B << dmu, dmu * c.rho + mu * drho, 0.0, -dmu;
  v.x << -dp / (2.0 * c.x1), dp / (2.0 * c.x2);
  return v;
}

ADHMDatum Hilb2Chart::evaluate(const RVector& p) const {
  return hilb2_point(Complex(p(0), p(1)), Complex(p(2), p(3)), t_);
}

ChartJet Hilb2Chart::jet(const RVector& p) const {
  const Complex lambda(p(0), p(1)), mu(p(2), p(3));
  ChartJet j{hilb2_point(lambda, mu, t_), {}};
  j.tangents.push_back(hilb2_tangent(lambda, mu, t_, 1.0, 0.0));
  j.tangents.push_back(hilb2_tangent(lambda, mu, t_, kI, 0.0));
  j.tangents.push_back(hilb2_tangent(lambda, mu, t_, 0.0, 1.0));
  j.tangents.push_back(hilb2_tangent(lambda, mu, t_, 0.0, kI));
  return j;
}

double Hilb2Chart::local_scale(const RVector& p, Index) const { return p.norm(); }

double hilb2_pullback_metric(Complex lambda, Complex mu, double t, Complex dlambda, Complex dmu,
                             Differential method) {
  const Hilb2Chart chart(t);
  const RVector p = (RVector(4) << lambda.real(), lambda.imag(), mu.real(), mu.imag()).finished();
  const RVector d =
      (RVector(4) << dlambda.real(), dlambda.imag(), dmu.real(), dmu.imag()).finished();
  const ADHMDatum z = chart.evaluate(p);
  const TangentVector v = method == Differential::exact
                              ? hilb2_tangent(lambda, mu, t, dlambda, dmu)
                              : pushforward_fd(chart, p, d);
  return HorizontalProjector(z).metric(v, v);
}

double hilb2_metric_deviation(Complex lambda, Complex mu, double t, Differential method) {
  const Hilb2Chart chart(t);
  const RVector p = (RVector(4) << lambda.real(), lambda.imag(), mu.real(), mu.imag()).finished();
  const ChartJet j = chart.jet(p);
  std::vector<TangentVector> tangents = j.tangents;
  if (method == Differential::finite_difference) {
    for (Index k = 0; k < 4; ++k) tangents[static_cast<size_t>(k)] = pushforward_fd(chart, p, unit_vector(4, k));
  }
  const RMatrix g = HorizontalProjector(j.point).gram(tangents);
  const RMatrix diff = g - metric_normalization() * RMatrix::Identity(4, 4);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double metric_normalization() {
  static const double value = [] {
    const Complex lambda(1e4, 0.0), mu(0.0, 0.0);
    return hilb2_pullback_metric(lambda, mu, 1.0, 1.0, 0.0);
  }();
  return value;
}

ADHMDatum flat_orbifold_point(const Configuration& q) {
  const Index n = q.n();
  ADHMDatum z = ADHMDatum::zero(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    z.A(i, i) = q.points[static_cast<size_t>(i)].lambda;
    z.B(i, i) = q.points[static_cast<size_t>(i)].mu;
  }
  return z;
}

double flat_orbifold_metric(const ADHMDatum& z, const TangentVector& v, const TangentVector& w) {
  MetricOptions opts;
  opts.free_action_floor = -std::numeric_limits<double>::infinity();
  return HorizontalProjector(z, opts).metric(v, w);
}

RMatrix product_reference_gram(const ProductPoint& point, std::span<const ProductTangent> probes,
                               const MetricOptions& options) {
  const auto& clusters = point.partition.clusters;
  const size_t k = clusters.size();
  if (point.charts.size() != k || point.params.size() != k) {
    throw Error(ErrorCode::dimension_mismatch, "product point does not match partition");
  }
  const Index m = static_cast<Index>(probes.size());
  RMatrix g = RMatrix::Zero(m, m);
  for (const auto& p : probes) {
    if (p.cluster_directions.size() != k || p.center_velocities.size() != k) {
      throw Error(ErrorCode::dimension_mismatch, "product tangent does not match partition");
    }
  }
  for (size_t c = 0; c < k; ++c) {
    const double weight = static_cast<double>(clusters[c].size());
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) {
        const Point2& u = probes[a].center_velocities[c];
        const Point2& w = probes[b].center_velocities[c];
        g(a, b) += weight * (u.lambda * std::conj(w.lambda) + u.mu * std::conj(w.mu)).real();
      }
    const LocalChart* chart = point.charts[c];
    if (chart == nullptr) continue;
    const ChartJet jet = chart->jet(point.params[c]);
    std::vector<TangentVector> pushed;
    for (const auto& p : probes) pushed.push_back(jet.pushforward(p.cluster_directions[c]));
    g += HorizontalProjector(jet.point, options).gram(pushed);
  }
  return g;
}

double product_reference_metric(const ProductPoint& point, const ProductTangent& v,
                                const MetricOptions& options) {
  const ProductTangent probes[] = {v};
  return product_reference_gram(point, probes, options)(0, 0);
}

}  // namespace hkq
