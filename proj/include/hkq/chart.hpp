#pragma once

#include <vector>

#include "hkq/adhm.hpp"

namespace hkq {

// Base point of a chart together with the images of the coordinate basis.
struct ChartJet {
  ADHMDatum point;
  std::vector<TangentVector> tangents;

  TangentVector pushforward(const RVector& direction) const;
};

// Smooth map from real parameters (complex coordinates interleaved as
// (re, im)) into the level set. Complex structure on parameters is
// multiplication by i on each pair.
class LocalChart {
 public:
  virtual ~LocalChart() = default;
  virtual Index parameter_dimension() const = 0;
  virtual ADHMDatum evaluate(const RVector& params) const = 0;
  // Tangents are exact derivatives, or exact modulo the complexified orbit
  // directions at the base point (which the horizontal projection removes).
  virtual ChartJet jet(const RVector& params) const = 0;
  // Length scale for finite-difference steps along direction k.
  virtual double local_scale(const RVector& params, Index k) const;
};

struct FiniteDifference {
  double relative_step = 1e-5;
};

// Central difference of chart.evaluate along direction.
TangentVector pushforward_fd(const LocalChart& chart, const RVector& params,
                             const RVector& direction, const FiniteDifference& fd = {});

// Multiplication by i on interleaved (re, im) pairs.
RVector complex_rotate(const RVector& direction);

RVector unit_vector(Index dim, Index k);

}  // namespace hkq
