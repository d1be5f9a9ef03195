#include "hkq/quotient_metric.hpp"

#include <cmath>
#include <sstream>

#include "hkq/error.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

double free_action_margin(const ADHMDatum& z) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(q_gram(z), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

HorizontalProjector::HorizontalProjector(const ADHMDatum& z, const MetricOptions& options)
    : base_(z) {
  validate(z);
  margin_ = free_action_margin(z);
  if (!(margin_ >= options.free_action_floor)) {
    std::ostringstream msg;
    msg << "free-action margin " << margin_ << " below floor " << options.free_action_floor;
    throw Error(ErrorCode::non_free_point, msg.str());
  }
  const auto basis = gauge_basis(z.n());
  const Index m = static_cast<Index>(basis.size());
  RMatrix cols(real_dimension(z.n()), 4 * m);
  for (Index a = 0; a < m; ++a) {
    const TangentVector l = infinitesimal_action(z, basis[static_cast<size_t>(a)]);
    cols.col(a) = realify(l);
    cols.col(m + a) = realify(quaternion_apply(Axis::I, l));
    cols.col(2 * m + a) = realify(quaternion_apply(Axis::J, l));
    cols.col(3 * m + a) = realify(quaternion_apply(Axis::K, l));
  }
  Eigen::ColPivHouseholderQR<RMatrix> qr(cols);
  qr.setThreshold(options.drop_tolerance);
  const Index rank = qr.rank();
  vertical_ = qr.householderQ() * RMatrix::Identity(cols.rows(), rank);
}

TangentVector HorizontalProjector::project(const TangentVector& v) const {
  RVector r = realify(v);
  r -= vertical_ * (vertical_.transpose() * r);
  return unrealify(r, base_.n());
}

double HorizontalProjector::metric(const TangentVector& v, const TangentVector& w) const {
  const RVector rv = realify(v);
  const RVector rw = realify(w);
  return rv.dot(rw) - (vertical_.transpose() * rv).dot(vertical_.transpose() * rw);
}

RMatrix HorizontalProjector::gram(std::span<const TangentVector> probes) const {
  const Index k = static_cast<Index>(probes.size());
  RMatrix v(real_dimension(base_.n()), k);
  for (Index i = 0; i < k; ++i) v.col(i) = realify(probes[static_cast<size_t>(i)]);
  const RMatrix qv = vertical_.transpose() * v;
  RMatrix g = v.transpose() * v - qv.transpose() * qv;
  return 0.5 * (g + g.transpose());
}

TangentVector horizontal_projection(const ADHMDatum& z, const TangentVector& v,
                                    const MetricOptions& options) {
  return HorizontalProjector(z, options).project(v);
}

double quotient_metric(const ADHMDatum& z, const TangentVector& v, const TangentVector& w,
                       const MetricOptions& options) {
  return HorizontalProjector(z, options).metric(v, w);
}

double kahler_form(const ADHMDatum& z, const TangentVector& v, const TangentVector& w, Axis axis,
                   const MetricOptions& options) {
  return HorizontalProjector(z, options).metric(quaternion_apply(axis, v), w);
}

double holomorphy_defect(const LocalChart& chart, const RVector& params, const RVector& direction,
                         const FiniteDifference& fd, const MetricOptions& options) {
  const HorizontalProjector proj(chart.evaluate(params), options);
  const TangentVector pv = proj.project(pushforward_fd(chart, params, direction, fd));
  const TangentVector piv = proj.project(pushforward_fd(chart, params, complex_rotate(direction), fd));
  const double denom = norm(pv);
  if (!(denom >= 1e-14)) {
    throw Error(ErrorCode::degenerate_differential, "chart differential vanishes along direction");
  }
  return norm(piv - quaternion_apply(Axis::I, pv)) / denom;
}

MetricSample metric_sample(const ADHMDatum& z, std::span<const TangentVector> probes,
                           std::string probe_basis_id, std::string base_ref,
                           const MetricOptions& options) {
  const HorizontalProjector proj(z, options);
  MetricSample s;
  s.base = z;
  s.base_ref = std::move(base_ref);
  s.probe_basis_id = std::move(probe_basis_id);
  s.gram = proj.gram(probes);
  if (z.n() >= 2) {
    const JointSpectrum spec = joint_spectrum(z);
    s.rho = rho(spec.points);
    s.sigma = sigma(spec.points);
  }
  return s;
}

std::vector<TangentVector> diagonal_probes(Index n) {
  std::vector<TangentVector> probes;
  for (Index j = 0; j + 1 < n; ++j) {
    for (int slot = 0; slot < 2; ++slot) {
      for (Complex c : {Complex(1.0), kI}) {
        TangentVector v = TangentVector::zero(n);
        CMatrix& m = slot == 0 ? v.A : v.B;
        m(j, j) = c;
        m(n - 1, n - 1) = -c;
        probes.push_back(v);
      }
    }
  }
  return probes;
}

}  // namespace hkq
