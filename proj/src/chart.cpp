#include "hkq/chart.hpp"

#include <cmath>

#include "hkq/error.hpp"

namespace hkq {

TangentVector ChartJet::pushforward(const RVector& direction) const {
  if (direction.size() != static_cast<Index>(tangents.size())) {
    throw Error(ErrorCode::dimension_mismatch, "chart direction has wrong dimension");
  }
  TangentVector v = TangentVector::zero(point.n());
  for (Index k = 0; k < direction.size(); ++k) {
    if (direction(k) != 0.0) v += direction(k) * tangents[static_cast<size_t>(k)];
  }
  return v;
}

double LocalChart::local_scale(const RVector& params, Index) const {
  return std::max(1.0, params.norm());
}

TangentVector pushforward_fd(const LocalChart& chart, const RVector& params,
                             const RVector& direction, const FiniteDifference& fd) {
  const double dn = direction.norm();
  if (dn == 0.0) return TangentVector::zero(chart.evaluate(params).n());
  // Step scaled by the largest local scale touched by the direction.
  double scale = 0.0;
  for (Index k = 0; k < direction.size(); ++k) {
    if (direction(k) != 0.0) scale = std::max(scale, chart.local_scale(params, k));
  }
  const double h = fd.relative_step * scale / dn;
  const ADHMDatum zp = chart.evaluate(params + h * direction);
  const ADHMDatum zm = chart.evaluate(params - h * direction);
  return (1.0 / (2.0 * h)) * (zp.coordinates() - zm.coordinates());
}

RVector complex_rotate(const RVector& direction) {
  if (direction.size() % 2 != 0) {
    throw Error(ErrorCode::dimension_mismatch, "complex chart parameters must come in pairs");
  }
  RVector out(direction.size());
  for (Index k = 0; k < direction.size(); k += 2) {
    out(k) = -direction(k + 1);
    out(k + 1) = direction(k);
  }
  return out;
}

RVector unit_vector(Index dim, Index k) {
  RVector e = RVector::Zero(dim);
  e(k) = 1.0;
  return e;
}

}  // namespace hkq
