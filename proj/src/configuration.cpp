#include "hkq/configuration.hpp"

#include <cmath>
#include <limits>

#include "hkq/error.hpp"

namespace hkq {

Point2 operator+(const Point2& a, const Point2& b) { return {a.lambda + b.lambda, a.mu + b.mu}; }
Point2 operator-(const Point2& a, const Point2& b) { return {a.lambda - b.lambda, a.mu - b.mu}; }
Point2 operator*(double s, const Point2& a) { return {s * a.lambda, s * a.mu}; }

double norm(const Point2& a) { return std::sqrt(std::norm(a.lambda) + std::norm(a.mu)); }

double distance(const Point2& a, const Point2& b) { return norm(a - b); }

double pairwise_min(std::span<const Point2> q) {
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < q.size(); ++i)
    for (size_t j = i + 1; j < q.size(); ++j) m = std::min(m, distance(q[i], q[j]));
  return m;
}

double configuration_norm(std::span<const Point2> q) {
  double s = 0.0;
  for (const auto& p : q) s += std::norm(p.lambda) + std::norm(p.mu);
  return std::sqrt(s);
}

Point2 center_of_mass(std::span<const Point2> q) {
  Point2 c{0.0, 0.0};
  for (const auto& p : q) c = c + p;
  if (!q.empty()) c = (1.0 / static_cast<double>(q.size())) * c;
  return c;
}

Configuration recentered(Configuration q) {
  const Point2 c = center_of_mass(q.points);
  for (auto& p : q.points) p = p - c;
  return q;
}

void validate_centered(const Configuration& q) {
  if (q.points.empty()) throw Error(ErrorCode::invalid_argument, "empty configuration");
  const double tol = 1e-12 * std::max(1.0, configuration_norm(q.points));
  if (norm(center_of_mass(q.points)) > tol) {
    throw Error(ErrorCode::invalid_argument, "configuration center of mass is not zero");
  }
}

RVector to_real(std::span<const Point2> q) {
  RVector r(4 * static_cast<Index>(q.size()));
  for (size_t i = 0; i < q.size(); ++i) {
    const Index k = 4 * static_cast<Index>(i);
    r(k) = q[i].lambda.real();
    r(k + 1) = q[i].lambda.imag();
    r(k + 2) = q[i].mu.real();
    r(k + 3) = q[i].mu.imag();
  }
  return r;
}

Configuration from_real(const RVector& r) {
  if (r.size() % 4 != 0) throw Error(ErrorCode::dimension_mismatch, "packed configuration length");
  Configuration q;
  for (Index k = 0; k < r.size(); k += 4) {
    q.points.push_back({Complex(r(k), r(k + 1)), Complex(r(k + 2), r(k + 3))});
  }
  return q;
}

}  // namespace hkq
