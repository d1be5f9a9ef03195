#pragma once

#include <memory>
#include <vector>

#include "hkq/adhm.hpp"
#include "hkq/chart.hpp"
#include "hkq/configuration.hpp"
#include "hkq/oracles.hpp"
#include "hkq/separated_solver.hpp"

namespace hkq {

// Clusters zeta_j (on-level, size n_j) placed at centers q_j with
// sum_j n_j q_j = 0. Block j occupies consecutive rows in cluster order.
struct ClusterData {
  std::vector<ADHMDatum> clusters;
  std::vector<Point2> centers;
  double t = 1.0;

  Index n() const;
  std::vector<Index> sizes() const;
  // sqrt(sum_j n_j |q_j|^2): the norm of the center point in (C^2)^n_0.
  double center_norm() const;
};

struct ClusterOptions {
  double r_cluster_factor = 10.0;  // R_cluster = factor * n * sqrt(t)
  double tau = 0.05;
  double tol_level = 1e-10;
  bool enforce_bounds = true;
  double tol = 1e-12;  // Newton on the off-block equations, scaled by max(1, t)
  int max_iter = 50;
};

// Throws invalid_argument when an invariant of ClusterData fails.
void validate(const ClusterData& data, const ClusterOptions& options = {});

struct BlockAnsatz {
  ADHMDatum z0;
  NewtonReport report;
  double off_block_norm = 0.0;
};

BlockAnsatz block_ansatz(const ClusterData& data, const ClusterOptions& options = {});

struct FlowOptions {
  double tol = 1e-10;    // stop when |2i mu - t| drops below this
  double rtol = 1e-10;   // integrator relative tolerance
  double atol = 1e-16;   // integrator absolute tolerance
  double s_max = 40.0;
  double free_action_floor = 1e-8;
  std::vector<double> sample_times;  // extra trajectory samples (dense output)
};

struct FlowSample {
  double s = 0.0;
  double real_residual = 0.0;
  double complex_residual = 0.0;
  double margin = 0.0;
};

struct FlowResult {
  ADHMDatum z_end;   // integrated endpoint, ~ g_inf . z0
  ADHMDatum z_h;     // e^h . z0
  CMatrix g_inf;
  CMatrix unitary;   // g_inf = unitary * e^h
  CMatrix h;         // Hermitian
  std::vector<FlowSample> trajectory;  // step ends, merged with sample_times
  double s_end = 0.0;
  int steps = 0;
  bool converged = false;
  double drift = 0.0;            // |z_end - g_inf . z0|
  double initial_deviation = 0.0;  // |mu(z0) - t/2i|
  bool sufficient_condition = false;
};

// Moment-map flow dz/ds = -i l_z(a), a = Q_z^-1(mu(z) - t/2i), with dg/ds = -i a g.
FlowResult flow_to_level(const ADHMDatum& z0, double t, const FlowOptions& options = {});

struct NewtonHOptions {
  double tol = 1e-12;  // on |2i mu - t|, scaled by max(1, t)
  int max_iter = 60;
  int max_halvings = 40;
  double free_action_floor = 1e-8;
};

struct NewtonHResult {
  ADHMDatum z_h;
  CMatrix h;  // Hermitian, z_h = e^h . z0
  CMatrix g;  // accumulated GL element
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

NewtonHResult newton_on_h(const ADHMDatum& z0, double t, const NewtonHOptions& options = {});

struct PolarDecomposition {
  CMatrix unitary;
  CMatrix h;  // Hermitian; g = unitary * e^h
};

PolarDecomposition polar_decompose(const CMatrix& g);
// Same for g = Id + e.
PolarDecomposition polar_decompose_near_identity(const CMatrix& e);

// Action of the gauge algebra element (any n x n matrix) on a tangent vector:
// ([h, dA], [h, dB], h dx, -dy h).
TangentVector tangent_action(const CMatrix& h, const TangentVector& v);

enum class LevelMethod { newton, flow };

// Result of evaluating psi_p at a parameter point.
struct ClusterPoint {
  ClusterData data;
  BlockAnsatz ansatz;
  ADHMDatum z_h;
  CMatrix h;
};

// psi_p: parameters are q_1..q_{k-1} (4 reals each; q_k fixed by the weighted
// center condition) followed by each cluster's sub-chart parameters.
class ClusterChart : public LocalChart {
 public:
  // sub_charts[j] == nullptr marks a singleton cluster.
  ClusterChart(std::vector<Index> sizes, std::vector<std::shared_ptr<const LocalChart>> sub_charts,
               double t, ClusterOptions options = {}, LevelMethod method = LevelMethod::newton);

  Index parameter_dimension() const override;
  ADHMDatum evaluate(const RVector& params) const override;
  // Tangents e^h . dz0 (exact modulo complexified orbit directions at z_h).
  ChartJet jet(const RVector& params) const override;
  double local_scale(const RVector& params, Index k) const override;

  ClusterPoint solve(const RVector& params) const;
  ClusterData cluster_data(const RVector& params) const;
  // Exact derivative of the block ansatz z0 along each parameter.
  std::vector<TangentVector> ansatz_tangents(const ClusterPoint& point, const RVector& params) const;

  Index center_dimension() const { return 4 * (k() - 1); }
  Index k() const { return static_cast<Index>(sizes_.size()); }
  const std::vector<Index>& sizes() const { return sizes_; }
  double level() const { return t_; }

  // Reference product structure (g_p + eucl) at params, and probes for unit parameter directions.
  ProductPoint product_point(const RVector& params) const;
  ProductTangent product_tangent(const RVector& direction) const;

 private:
  std::vector<Point2> centers(const RVector& params) const;
  std::vector<Index> sizes_;
  std::vector<std::shared_ptr<const LocalChart>> sub_charts_;
  std::vector<Index> param_offsets_;
  double t_;
  ClusterOptions options_;
  LevelMethod method_;
};

// Singleton cluster datum (0, 0, sqrt t, 0).
ADHMDatum singleton_datum(double t);

// sup over the span of the unit parameter directions of
// |psi*g_N(v,v) - (g_p + eucl)(v,v)| / (g_p + eucl)(v,v).
double qale_deviation_at(const ClusterChart& chart, const RVector& params);
// max_k |dh . e_k| by central differences, step relative_step * max(1, |q|).
double dh_norm_at(const ClusterChart& chart, const RVector& params, double relative_step = 1e-5);
// max_k |<dz0_k, h . dz0_k>| / (g_p + eucl)(e_k, e_k).
double cross_term_at(const ClusterChart& chart, const RVector& params);

}  // namespace hkq
