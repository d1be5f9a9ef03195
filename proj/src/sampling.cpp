#include "hkq/sampling.hpp"

#include <cmath>

namespace hkq {

Complex random_complex(Rng& rng) {
  std::normal_distribution<double> nd;
  const double re = nd(rng);
  return {re, nd(rng)};
}

CMatrix random_matrix(Index n, Rng& rng) {
  CMatrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = random_complex(rng);
  return m;
}

ADHMDatum random_datum(Index n, double t, Rng& rng) {
  ADHMDatum z = ADHMDatum::zero(n, t);
  z.A = random_matrix(n, rng);
  z.B = random_matrix(n, rng);
  remove_trace(z.A);
  remove_trace(z.B);
  for (Index i = 0; i < n; ++i) {
    z.x(i) = random_complex(rng);
    z.y(i) = random_complex(rng);
  }
  return z;
}

TangentVector random_tangent(Index n, Rng& rng) {
  const ADHMDatum z = random_datum(n, 1.0, rng);
  return z.coordinates();
}

GaugeAlgebraElement random_gauge(Index n, Rng& rng) {
  return {skew_hermitian_part(random_matrix(n, rng))};
}

CMatrix random_unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(n, rng));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

CMatrix random_invertible(Index n, Rng& rng) {
  return CMatrix::Identity(n, n) + 0.3 * random_matrix(n, rng) / std::sqrt(static_cast<double>(n));
}

Configuration random_separated_configuration(Index n, double min_gap, Rng& rng) {
  Configuration q;
  for (Index i = 0; i < n; ++i) q.points.push_back({random_complex(rng), random_complex(rng)});
  q = recentered(q);
  const double s = min_gap / pairwise_min(q.points);
  for (auto& p : q.points) p = s * p;
  return q;
}

double random_log_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace hkq
