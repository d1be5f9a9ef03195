#include "hkq/spectrum.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <sstream>

#include "hkq/error.hpp"

namespace hkq {

JointSpectrum joint_spectrum(const ADHMDatum& z) {
  validate(z);
  const Index n = z.n();
  const double scale = std::max(1.0, z.A.norm() + z.B.norm());
  const double tol = 1e-6 * scale;
  // Fixed unit multipliers; the first is almost surely collision-free.
  static const double kAngles[] = {0.7390851332, 2.2360679775, 4.1231056256, 5.4772255751,
                                   1.4142135624, 3.3166247904};
  double best = std::numeric_limits<double>::infinity();
  for (double angle : kAngles) {
    const Complex c = std::polar(1.0, angle);
    Eigen::ComplexSchur<CMatrix> schur(z.A + c * z.B);
    const CMatrix& u = schur.matrixU();
    const CMatrix ta = u.adjoint() * z.A * u;
    const CMatrix tb = u.adjoint() * z.B * u;
    double lower = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = j + 1; i < n; ++i)
        lower = std::max({lower, std::abs(ta(i, j)), std::abs(tb(i, j))});
    best = std::min(best, lower);
    if (lower <= tol) {
      JointSpectrum s;
      s.points.resize(static_cast<size_t>(n));
      for (Index i = 0; i < n; ++i) s.points[static_cast<size_t>(i)] = {ta(i, i), tb(i, i)};
      s.commutator_defect = commutator(z.A, z.B).norm();
      s.triangular_residual = lower;
      return s;
    }
  }
  std::ostringstream msg;
  msg << "common Schur transform leaves strictly-lower residual " << best << " > " << tol;
  throw Error(ErrorCode::not_triangularizable, msg.str());
}

double multiset_distance(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "multisets have different sizes");
  }
  const Index n = static_cast<Index>(a.size());
  if (n == 0) return 0.0;
  RMatrix cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cost(i, j) = std::pow(distance(a[i], b[j]), 2);
  const auto perm = solve_assignment(cost);
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) worst = std::max(worst, distance(a[i], b[perm[i]]));
  return worst;
}

double sigma(std::span<const Point2> v) {
  if (v.size() < 2) throw Error(ErrorCode::invalid_argument, "sigma needs n >= 2");
  return pairwise_min(v) + 1.0;
}

double rho(std::span<const Point2> v) {
  if (v.size() < 2) throw Error(ErrorCode::invalid_argument, "rho needs n >= 2");
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) s += std::pow(distance(v[i], v[j]), 2);
  return std::sqrt(s);
}

std::vector<int> Partition::cluster_of() const {
  std::vector<int> label(static_cast<size_t>(n), -1);
  for (size_t c = 0; c < clusters.size(); ++c)
    for (int i : clusters[c]) label[static_cast<size_t>(i)] = static_cast<int>(c);
  return label;
}

bool Partition::same_cluster(int i, int j) const {
  for (const auto& c : clusters) {
    const bool hi = std::find(c.begin(), c.end(), i) != c.end();
    const bool hj = std::find(c.begin(), c.end(), j) != c.end();
    if (hi || hj) return hi && hj;
  }
  return false;
}

Partition make_partition(int n, std::vector<std::vector<int>> clusters) {
  std::vector<int> seen(static_cast<size_t>(std::max(n, 0)), 0);
  for (auto& c : clusters) {
    if (c.empty()) throw Error(ErrorCode::invalid_argument, "partition has an empty cluster");
    std::sort(c.begin(), c.end());
    for (int i : c) {
      if (i < 0 || i >= n || seen[static_cast<size_t>(i)]++) {
        throw Error(ErrorCode::invalid_argument, "partition clusters must be a disjoint cover");
      }
    }
  }
  if (std::count(seen.begin(), seen.end(), 1) != n) {
    throw Error(ErrorCode::invalid_argument, "partition clusters must cover all indices");
  }
  std::sort(clusters.begin(), clusters.end());
  return {n, std::move(clusters)};
}

Partition finest_partition(int n) {
  std::vector<std::vector<int>> c;
  for (int i = 0; i < n; ++i) c.push_back({i});
  return make_partition(n, c);
}

Partition coarsest_partition(int n) {
  std::vector<int> all(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
  return make_partition(n, {all});
}

std::vector<Partition> all_partitions(int n) {
  std::vector<Partition> out;
  std::vector<int> code(static_cast<size_t>(n), 0);
  // Restricted growth strings.
  auto emit = [&]() {
    const int k = *std::max_element(code.begin(), code.end()) + 1;
    std::vector<std::vector<int>> c(static_cast<size_t>(k));
    for (int i = 0; i < n; ++i) c[static_cast<size_t>(code[static_cast<size_t>(i)])].push_back(i);
    out.push_back(make_partition(n, c));
  };
  std::function<void(int, int)> rec = [&](int i, int maxv) {
    if (i == n) {
      emit();
      return;
    }
    for (int v = 0; v <= maxv + 1; ++v) {
      code[static_cast<size_t>(i)] = v;
      rec(i + 1, std::max(maxv, v));
    }
  };
  if (n > 0) {
    code[0] = 0;
    rec(1, 0);
  }
  std::stable_sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    if (a.k() != b.k()) return a.k() > b.k();
    return a.clusters < b.clusters;
  });
  return out;
}

Partition parse_partition(const std::string& text, int n) {
  std::vector<std::vector<int>> clusters;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '|')) {
    std::vector<int> c;
    std::stringstream ps(part);
    std::string item;
    while (std::getline(ps, item, ',')) {
      try {
        size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        c.push_back(v - 1);
      } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "bad partition label '" + item + "'");
      }
    }
    clusters.push_back(c);
  }
  return make_partition(n, clusters);
}

std::string format_partition(const Partition& p) {
  std::ostringstream out;
  for (size_t c = 0; c < p.clusters.size(); ++c) {
    if (c) out << '|';
    for (size_t i = 0; i < p.clusters[c].size(); ++i) {
      if (i) out << ',';
      out << p.clusters[c][i] + 1;
    }
  }
  return out.str();
}

static bool refines(const Partition& p, const Partition& q) {
  const auto label = q.cluster_of();
  for (const auto& c : p.clusters)
    for (int i : c)
      if (label[static_cast<size_t>(i)] != label[static_cast<size_t>(c.front())]) return false;
  return true;
}

Order partition_order(const Partition& p, const Partition& q) {
  if (p.n != q.n) throw Error(ErrorCode::dimension_mismatch, "partitions of different n");
  const bool pq = refines(p, q);
  const bool qp = refines(q, p);
  if (pq && qp) return Order::equal;
  if (pq) return Order::less;
  if (qp) return Order::greater;
  return Order::incomparable;
}

bool in_region(std::span<const Point2> v, const RegionSpec& spec) {
  const int n = spec.partition.n;
  if (static_cast<int>(v.size()) != n) {
    throw Error(ErrorCode::dimension_mismatch, "region spec and configuration differ in n");
  }
  const double len = configuration_norm(v);
  if (!(len > spec.R)) return false;
  const bool finest = spec.partition.k() == n;
  const double cross = std::sqrt(2.0 / (n * (n - 1.0))) * len;
  const auto label = spec.partition.cluster_of();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double gap = distance(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
      if (finest) {
        if (!(gap > spec.eps * len)) return false;
      } else if (label[static_cast<size_t>(i)] == label[static_cast<size_t>(j)]) {
        if (!(gap < 2.0 * spec.eps * len)) return false;
      } else if (!(gap > cross)) {
        return false;
      }
    }
  }
  return true;
}

std::optional<Partition> classify_region(std::span<const Point2> v,
                                         std::vector<RegionSpec> specs) {
  std::stable_sort(specs.begin(), specs.end(), [](const RegionSpec& a, const RegionSpec& b) {
    return a.partition.k() > b.partition.k();
  });
  for (const auto& s : specs)
    if (in_region(v, s)) return s.partition;
  return std::nullopt;
}

std::vector<RegionSpec> default_region_specs(int n, double t, double eps, double tau) {
  std::vector<RegionSpec> specs;
  const double R = 10.0 * n * std::sqrt(t);
  for (auto& p : all_partitions(n)) specs.push_back({p, eps, R, tau});
  return specs;
}

}  // namespace hkq
