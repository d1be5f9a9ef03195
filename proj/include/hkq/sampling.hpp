#pragma once

#include <random>

#include "hkq/adhm.hpp"
#include "hkq/configuration.hpp"

namespace hkq {

using Rng = std::mt19937_64;

Complex random_complex(Rng& rng);
CMatrix random_matrix(Index n, Rng& rng);
// Trace-free A, B and random x, y (not on any level set).
ADHMDatum random_datum(Index n, double t, Rng& rng);
TangentVector random_tangent(Index n, Rng& rng);
GaugeAlgebraElement random_gauge(Index n, Rng& rng);
CMatrix random_unitary(Index n, Rng& rng);
// Well-conditioned element of GL_n(C).
CMatrix random_invertible(Index n, Rng& rng);
// Centered configuration scaled so that pairwise_min = min_gap.
Configuration random_separated_configuration(Index n, double min_gap, Rng& rng);
// Uniform in [lo, hi] on a log scale.
double random_log_uniform(double lo, double hi, Rng& rng);

}  // namespace hkq
