#pragma once

#include <span>
#include <vector>

#include "hkq/chart.hpp"
#include "hkq/configuration.hpp"
#include "hkq/quotient_metric.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

// Closed-form point of the level set for n = 2 over (lambda, mu) != 0.
ADHMDatum hilb2_point(Complex lambda, Complex mu, double t);
// Exact derivative of hilb2_point along (dlambda, dmu).
TangentVector hilb2_tangent(Complex lambda, Complex mu, double t, Complex dlambda, Complex dmu);

// Parameters (re lambda, im lambda, re mu, im mu).
class Hilb2Chart : public LocalChart {
 public:
  explicit Hilb2Chart(double t) : t_(t) {}
  Index parameter_dimension() const override { return 4; }
  ADHMDatum evaluate(const RVector& params) const override;
  ChartJet jet(const RVector& params) const override;
  double local_scale(const RVector& params, Index k) const override;
  double level() const { return t_; }

 private:
  double t_;
};

enum class Differential { exact, finite_difference };

// Quotient metric of the pushforward of v = (dlambda, dmu).
double hilb2_pullback_metric(Complex lambda, Complex mu, double t, Complex dlambda, Complex dmu,
                             Differential method = Differential::exact);
// Largest |g(v,v) - c |v|^2| / |v|^2 over unit v, with c the normalization.
double hilb2_metric_deviation(Complex lambda, Complex mu, double t,
                              Differential method = Differential::exact);

// The constant c in z*g_N ~ c (|dlambda|^2 + |dmu|^2), measured once at R = 1e4.
double metric_normalization();

// Diagonal A, B from q, x = y = 0, t = 0.
ADHMDatum flat_orbifold_point(const Configuration& q);
// Quotient metric at a t = 0 point (no free-action requirement).
double flat_orbifold_metric(const ADHMDatum& z, const TangentVector& v, const TangentVector& w);

// Point of the product chart: per-cluster sub-chart (nullptr for singletons) and parameters.
struct ProductPoint {
  Partition partition;
  std::vector<const LocalChart*> charts;
  std::vector<RVector> params;
};

// Tangent split into per-cluster chart directions and cluster-center velocities.
struct ProductTangent {
  std::vector<RVector> cluster_directions;
  std::vector<Point2> center_velocities;
};

// (g_p + eucl_{V_p})(v, w) with eucl = sum_j n_j <dq_j, dq'_j>.
RMatrix product_reference_gram(const ProductPoint& point, std::span<const ProductTangent> probes,
                               const MetricOptions& options = {});
double product_reference_metric(const ProductPoint& point, const ProductTangent& v,
                                const MetricOptions& options = {});

}  // namespace hkq
