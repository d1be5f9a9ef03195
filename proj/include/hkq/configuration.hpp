#pragma once

#include <span>
#include <vector>

#include "hkq/linalg.hpp"

namespace hkq {

// A point (lambda, mu) of C^2.
struct Point2 {
  Complex lambda;
  Complex mu;
};

Point2 operator+(const Point2& a, const Point2& b);
Point2 operator-(const Point2& a, const Point2& b);
Point2 operator*(double s, const Point2& a);
double norm(const Point2& a);
double distance(const Point2& a, const Point2& b);

// n points of C^2 with zero center of mass.
struct Configuration {
  std::vector<Point2> points;
  Index n() const { return static_cast<Index>(points.size()); }
};

double pairwise_min(std::span<const Point2> q);
// |q| = sqrt(sum |q_i|^2).
double configuration_norm(std::span<const Point2> q);
Point2 center_of_mass(std::span<const Point2> q);
Configuration recentered(Configuration q);
// Throws invalid_argument if the center of mass exceeds 1e-12 (relative to |q|).
void validate_centered(const Configuration& q);

// Packed (re lambda, im lambda, re mu, im mu) per point.
RVector to_real(std::span<const Point2> q);
Configuration from_real(const RVector& r);

}  // namespace hkq
