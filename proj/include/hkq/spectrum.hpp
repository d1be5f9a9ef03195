#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkq/adhm.hpp"
#include "hkq/configuration.hpp"

namespace hkq {

struct JointSpectrum {
  std::vector<Point2> points;
  double commutator_defect = 0.0;
  // Largest strictly-lower entry left after the common Schur transform.
  double triangular_residual = 0.0;
};

JointSpectrum joint_spectrum(const ADHMDatum& z);

// Max distance between matched points under the optimal matching.
double multiset_distance(std::span<const Point2> a, std::span<const Point2> b);

// min gap + 1 and sqrt(sum_{i<j} |v_i - v_j|^2); both need n >= 2.
double sigma(std::span<const Point2> v);
double rho(std::span<const Point2> v);

// Disjoint cover of {0, ..., n-1}; clusters sorted, each sorted.
struct Partition {
  int n = 0;
  std::vector<std::vector<int>> clusters;

  int k() const { return static_cast<int>(clusters.size()); }
  int codimension() const { return 2 * (n - k()); }
  std::vector<int> cluster_of() const;
  bool same_cluster(int i, int j) const;
  bool operator==(const Partition& o) const = default;
};

Partition make_partition(int n, std::vector<std::vector<int>> clusters);
Partition finest_partition(int n);    // p0, all singletons
Partition coarsest_partition(int n);  // p_inf, one cluster
// Every partition of {0..n-1}, finest first (by cluster count, then lexicographic).
std::vector<Partition> all_partitions(int n);
// Text form "1,2|3" with 1-based labels.
Partition parse_partition(const std::string& text, int n);
std::string format_partition(const Partition& p);

enum class Order { less, greater, equal, incomparable };
// p <= q when p refines q.
Order partition_order(const Partition& p, const Partition& q);

struct RegionSpec {
  Partition partition;
  double eps = 0.05;
  double R = 1.0;
  double tau = 0.05;
};

bool in_region(std::span<const Point2> v, const RegionSpec& spec);
// First spec (in refinement order) whose region contains v.
std::optional<Partition> classify_region(std::span<const Point2> v, std::vector<RegionSpec> specs);
std::vector<RegionSpec> default_region_specs(int n, double t = 1.0, double eps = 0.05,
                                             double tau = 0.05);

}  // namespace hkq
