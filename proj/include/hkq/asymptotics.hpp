#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hkq/donaldson_flow.hpp"
#include "hkq/separated_solver.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

enum class Quantity {
  metric_deviation,
  ansatz_residual,
  solution_offset,
  g_inf_distance,
  dh_norm,
  commutator_bound,
  margin,
  dbar_norm,
  cross_term,
  off_block_norm,
  ansatz_level_residual,
  qale_deviation,
};

const char* to_string(Quantity q);
Quantity parse_quantity(const std::string& name);

struct DecayRecord {
  double scale = 0.0;
  double rho = 0.0;
  double sigma = 1.0;
  double deviation = 0.0;
  std::string chart;
  Quantity quantity = Quantity::metric_deviation;
  bool valid = true;
  std::string reason;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  int n_points = 0;
  double min_scale = 0.0;
  double max_scale = 0.0;
  double constant() const;  // e^intercept
};

// OLS of log(deviation) on log(scale) over valid records; needs >= 5 records
// spanning >= 1.5 decades (throws insufficient_span).
FitResult fit_power_law(std::span<const DecayRecord> records);

std::vector<double> log_grid(double a, double b, int points);

using RayEvaluator = std::function<DecayRecord(double scale)>;

// Solver settings used by the ray evaluators.
struct RayOptions {
  SeparatedOptions separated;
  ClusterOptions cluster;
};

struct ScanOptions {
  unsigned jobs = 1;
  double max_invalid_fraction = 0.2;
  // Called in grid order as records complete.
  std::function<void(std::size_t, const DecayRecord&)> on_record;
};

// One record per grid point; evaluator failures become invalid records with
// the error code as reason. Throws scan_aborted above the invalid fraction.
// Records in `done` (a grid prefix from an earlier run) are reused.
std::vector<DecayRecord> decay_scan(const RayEvaluator& ray, std::span<const double> grid,
                                    Quantity quantity, const ScanOptions& options = {},
                                    std::vector<DecayRecord> done = {});

// n = 2: (lambda, mu) = R * (unit direction); scale = R.
class AleRay {
 public:
  explicit AleRay(double t = 1.0, std::uint64_t seed = 1);
  DecayRecord operator()(double R) const;

 private:
  double t_;
  Complex lambda_, mu_;
};

// Well-separated configurations q = s * qbar with pairwise_min(qbar) = 1; scale = sigma = s + 1.
class SeparatedRay {
 public:
  SeparatedRay(int n, Quantity quantity, double t = 1.0, std::uint64_t seed = 1,
               RayOptions options = {});
  DecayRecord operator()(double sigma) const;
  Configuration configuration(double sigma) const;

 private:
  int n_;
  Quantity quantity_;
  double t_;
  RayOptions options_;
  Configuration base_;
};

enum class ClusterMode {
  fixed_sigma,  // cluster shapes fixed, centers scaled
  joint,        // clusters and centers scaled together, |q| = center_ratio * cluster scale
};

enum class ClusterScale { center_norm, rho };

// Clustered configurations along a ray through psi_p.
class ClusterRay {
 public:
  ClusterRay(const Partition& p, Quantity quantity, ClusterMode mode, ClusterScale scale_kind,
             double t = 1.0, std::uint64_t seed = 1, RayOptions options = {},
             double center_ratio = 45.0);
  DecayRecord operator()(double scale) const;
  RVector parameters(double scale) const;
  const ClusterChart& chart() const { return *chart_; }

 private:
  double ray_parameter(double scale) const;  // s with params = s-scaled ray
  Partition partition_;
  Quantity quantity_;
  ClusterMode mode_;
  ClusterScale scale_kind_;
  double t_;
  RayOptions options_;
  std::shared_ptr<ClusterChart> chart_;
  RVector center_dir_;   // unit in the weighted center norm
  RVector cluster_dir_;  // cluster parameters at unit cluster scale
  double cluster_sq_ = 0.0;  // sum_j |spectrum_j|^2 at unit cluster scale
  double center_ratio_ = 45.0;
};

enum class QaleMode { fixed_sigma, joint };

// n = 3, p = {{1,2},{3}}; scale = rho.
std::vector<DecayRecord> qale_deviation(QaleMode mode, std::span<const double> rho_grid,
                                        const ScanOptions& options = {}, double t = 1.0,
                                        std::uint64_t seed = 1, const RayOptions& ray_options = {});

// Builds the evaluator for a quantity/partition as used by the CLI.
RayEvaluator make_ray(Quantity quantity, int n, const Partition& partition, ClusterMode mode,
                      double t, std::uint64_t seed, const RayOptions& options = {});

}  // namespace hkq
