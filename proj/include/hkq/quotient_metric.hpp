#pragma once

#include <span>
#include <string>
#include <vector>

#include "hkq/adhm.hpp"
#include "hkq/chart.hpp"

namespace hkq {

struct MetricOptions {
  double free_action_floor = 1e-8;
  double drop_tolerance = 1e-12;
};

// Orthogonal projection onto the complement of
// im l_z + I im l_z + J im l_z + K im l_z, built once per base point.
class HorizontalProjector {
 public:
  // Throws non_free_point when the smallest eigenvalue of Q_z is below the floor.
  explicit HorizontalProjector(const ADHMDatum& z, const MetricOptions& options = {});

  const ADHMDatum& base() const { return base_; }
  double margin() const { return margin_; }
  Index vertical_rank() const { return vertical_.cols(); }

  TangentVector project(const TangentVector& v) const;
  double metric(const TangentVector& v, const TangentVector& w) const;
  RMatrix gram(std::span<const TangentVector> probes) const;

 private:
  ADHMDatum base_;
  RMatrix vertical_;  // orthonormal columns in realify() coordinates
  double margin_ = 0.0;
};

double free_action_margin(const ADHMDatum& z);
TangentVector horizontal_projection(const ADHMDatum& z, const TangentVector& v,
                                    const MetricOptions& options = {});
double quotient_metric(const ADHMDatum& z, const TangentVector& v, const TangentVector& w,
                       const MetricOptions& options = {});
// g_N(axis v, w).
double kahler_form(const ADHMDatum& z, const TangentVector& v, const TangentVector& w, Axis axis,
                   const MetricOptions& options = {});

// |P dPsi(Iv) - I P dPsi(v)| / |P dPsi(v)| with dPsi by central differences.
double holomorphy_defect(const LocalChart& chart, const RVector& params, const RVector& direction,
                         const FiniteDifference& fd = {}, const MetricOptions& options = {});

struct MetricSample {
  ADHMDatum base;
  std::string base_ref;
  std::string probe_basis_id;
  RMatrix gram;
  double rho = 0.0;
  double sigma = 1.0;
};

MetricSample metric_sample(const ADHMDatum& z, std::span<const TangentVector> probes,
                           std::string probe_basis_id, std::string base_ref,
                           const MetricOptions& options = {});

// Diagonal probes dA = e_j - e_n (and i times), same for dB: 4(n-1) vectors.
std::vector<TangentVector> diagonal_probes(Index n);

}  // namespace hkq
