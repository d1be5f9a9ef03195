#include "hkq/asymptotics.hpp"

#include <cmath>
#include <mutex>
#include <random>

#include "hkq/error.hpp"
#include "hkq/oracles.hpp"
#include "hkq/parallel.hpp"
#include "hkq/quotient_metric.hpp"

namespace hkq {

namespace {

struct QuantityName {
  Quantity q;
  const char* name;
};

constexpr QuantityName kQuantityNames[] = {
    {Quantity::metric_deviation, "metric_deviation"},
    {Quantity::ansatz_residual, "ansatz_residual"},
    {Quantity::solution_offset, "solution_offset"},
    {Quantity::g_inf_distance, "g_inf_distance"},
    {Quantity::dh_norm, "dh_norm"},
    {Quantity::commutator_bound, "commutator_bound"},
    {Quantity::margin, "margin"},
    {Quantity::dbar_norm, "dbar_norm"},
    {Quantity::cross_term, "cross_term"},
    {Quantity::off_block_norm, "off_block_norm"},
    {Quantity::ansatz_level_residual, "ansatz_level_residual"},
    {Quantity::qale_deviation, "qale_deviation"},
};

Complex gaussian_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const double re = nd(rng);
  return {re, nd(rng)};
}

Point2 unit_direction(std::mt19937_64& rng) {
  Point2 p{gaussian_complex(rng), gaussian_complex(rng)};
  return (1.0 / norm(p)) * p;
}

DecayRecord base_record(Quantity q, double scale, std::string chart) {
  DecayRecord r;
  r.quantity = q;
  r.scale = scale;
  r.chart = std::move(chart);
  return r;
}

void set_geometry(DecayRecord& r, std::span<const Point2> v) {
  r.rho = rho(v);
  r.sigma = sigma(v);
}

// Max eigenvalue magnitude of L^-1 (G - E) L^-T, E = L L^T.
double relative_gram_deviation(const RMatrix& g, const RMatrix& e) {
  Eigen::LLT<RMatrix> llt(e);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::degenerate_differential, "reference Gram is not positive definite");
  }
  const RMatrix l = llt.matrixL();
  RMatrix m = l.triangularView<Eigen::Lower>().solve(g - e);
  m = l.triangularView<Eigen::Lower>().solve(m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

const char* to_string(Quantity q) {
  for (const auto& e : kQuantityNames)
    if (e.q == q) return e.name;
  return "unknown";
}

Quantity parse_quantity(const std::string& name) {
  for (const auto& e : kQuantityNames)
    if (name == e.name) return e.q;
  throw Error(ErrorCode::invalid_argument, "unknown quantity: " + name);
}

double FitResult::constant() const { return std::exp(intercept); }

FitResult fit_power_law(std::span<const DecayRecord> records) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (!r.valid || !(r.deviation > 0.0) || !(r.scale > 0.0)) continue;
    xs.push_back(std::log(r.scale));
    ys.push_back(std::log(r.deviation));
  }
  FitResult f;
  f.n_points = static_cast<int>(xs.size());
  if (xs.size() < 5) {
    throw Error(ErrorCode::insufficient_span, "power-law fit needs at least 5 valid points");
  }
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  f.min_scale = std::exp(*lo);
  f.max_scale = std::exp(*hi);
  if ((*hi - *lo) / std::log(10.0) < 1.5) {
    throw Error(ErrorCode::insufficient_span, "power-law fit needs at least 1.5 decades of scale");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - f.intercept - f.slope * xs[i];
    ssr += e * e;
  }
  f.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

std::vector<double> log_grid(double a, double b, int points) {
  if (!(a > 0.0) || !(b > a) || points < 2) {
    throw Error(ErrorCode::invalid_argument, "log grid needs 0 < a < b and at least 2 points");
  }
  std::vector<double> g(static_cast<size_t>(points));
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < points; ++i) g[static_cast<size_t>(i)] = std::exp(la + (lb - la) * i / (points - 1));
  g.front() = a;
  g.back() = b;
  return g;
}

std::vector<DecayRecord> decay_scan(const RayEvaluator& ray, std::span<const double> grid,
                                    Quantity quantity, const ScanOptions& options,
                                    std::vector<DecayRecord> done) {
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "scan grid must be strictly increasing");
    }
  }
  if (done.size() > grid.size()) {
    throw Error(ErrorCode::invalid_argument, "resumed records exceed the grid");
  }
  std::vector<DecayRecord> out(grid.size());
  std::vector<char> ready(grid.size(), 0);
  for (size_t i = 0; i < done.size(); ++i) {
    out[i] = std::move(done[i]);
    ready[i] = 1;
  }
  std::mutex emit_mutex;
  size_t next_emit = 0;
  auto emit_ready = [&]() {
    while (next_emit < out.size() && ready[next_emit]) {
      if (options.on_record) options.on_record(next_emit, out[next_emit]);
      ++next_emit;
    }
  };
  {
    std::lock_guard<std::mutex> lock(emit_mutex);
    emit_ready();
  }
  const size_t start = done.size();
  parallel_for(grid.size() - start, options.jobs, [&](size_t j) {
    const size_t i = start + j;
    DecayRecord r;
    try {
      r = ray(grid[i]);
      if (!std::isfinite(r.deviation)) {
        r.valid = false;
        r.reason = "non-finite-deviation";
      }
    } catch (const Error& e) {
      r = base_record(quantity, grid[i], "");
      r.valid = false;
      r.reason = std::string(to_string(e.code())) + ": " + e.what();
    }
    r.scale = grid[i];
    r.quantity = quantity;
    std::lock_guard<std::mutex> lock(emit_mutex);
    out[i] = std::move(r);
    ready[i] = 1;
    emit_ready();
  });
  size_t invalid = 0;
  for (const auto& r : out) invalid += r.valid ? 0 : 1;
  if (!out.empty() &&
      static_cast<double>(invalid) > options.max_invalid_fraction * static_cast<double>(out.size())) {
    throw Error(ErrorCode::scan_aborted, std::to_string(invalid) + " of " +
                                             std::to_string(out.size()) + " scan points invalid");
  }
  return out;
}

AleRay::AleRay(double t, std::uint64_t seed) : t_(t) {
  std::mt19937_64 rng(seed);
  const Point2 d = unit_direction(rng);
  lambda_ = d.lambda;
  mu_ = d.mu;
}

DecayRecord AleRay::operator()(double R) const {
  DecayRecord r = base_record(Quantity::metric_deviation, R, "hilb2");
  const Complex l = R * lambda_, m = R * mu_;
  r.deviation = hilb2_metric_deviation(l, m, t_);
  const Point2 v[2] = {{l, m}, {-l, -m}};
  set_geometry(r, v);
  return r;
}

SeparatedRay::SeparatedRay(int n, Quantity quantity, double t, std::uint64_t seed,
                           RayOptions options)
    : n_(n), quantity_(quantity), t_(t), options_(options) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "separated ray needs n >= 2");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) base_.points.push_back({gaussian_complex(rng), gaussian_complex(rng)});
  base_ = recentered(base_);
  const double gap = pairwise_min(base_.points);
  for (auto& p : base_.points) p = (1.0 / gap) * p;
}

Configuration SeparatedRay::configuration(double sigma_value) const {
  Configuration q = base_;
  for (auto& p : q.points) p = (sigma_value - 1.0) * p;
  return q;
}

DecayRecord SeparatedRay::operator()(double sigma_value) const {
  const Configuration q = configuration(sigma_value);
  DecayRecord r = base_record(quantity_, sigma_value, "p0");
  set_geometry(r, q.points);
  const SeparatedOptions& so = options_.separated;
  const SeparatedChart chart(n_, t_, so);
  const RVector params = chart.parameters(q);
  switch (quantity_) {
    case Quantity::ansatz_residual:
      r.deviation = residual_F(q, ansatz(q, t_), t_).norm();
      break;
    case Quantity::solution_offset:
      r.deviation = newton_solve(q, t_, so).report.dist_from_ansatz;
      break;
    case Quantity::margin:
      r.deviation = free_action_margin(newton_solve(q, t_, so).datum);
      break;
    case Quantity::metric_deviation: {
      const ChartJet jet = chart.jet(params);
      const RMatrix g = HorizontalProjector(jet.point).gram(jet.tangents);
      // Flat metric sum_i |dq_i|^2 with dq_n = -sum_{i<n} dq_i.
      const Index dim = chart.parameter_dimension();
      RMatrix e = RMatrix::Identity(dim, dim);
      for (Index a = 0; a < dim; ++a)
        for (Index b = 0; b < dim; ++b)
          if (a % 4 == b % 4) e(a, b) += 1.0;
      r.deviation = relative_gram_deviation(g, e);
      break;
    }
    case Quantity::commutator_bound: {
      const ChartJet jet = chart.jet(params);
      const HorizontalProjector proj(jet.point);
      double worst = 0.0;
      for (const auto& v : jet.tangents) {
        const TangentVector hv = proj.project(v);
        const double num = commutator(hv.A, hv.A.adjoint()).norm() +
                           commutator(hv.B, hv.B.adjoint()).norm();
        const double den = hv.A.squaredNorm() + hv.B.squaredNorm();
        worst = std::max(worst, num / den);
      }
      r.deviation = worst;
      break;
    }
    case Quantity::dbar_norm: {
      const auto [sol, du] = chart.unknowns_jet(params);
      // Pair real rows of complex unknowns; the real x rows pair with zero.
      const Index n = n_;
      const Index nup = n * (n - 1) / 2;
      double worst = 0.0;
      for (Index k = 0; k + 1 < du.cols(); k += 2) {
        double sq = 0.0;
        for (Index c = 0; c < 2 * nup; ++c) {
          const Complex d_re(du(2 * c, k), du(2 * c + 1, k));
          const Complex d_im(du(2 * c, k + 1), du(2 * c + 1, k + 1));
          sq += std::norm(0.5 * (d_re + kI * d_im));
        }
        for (Index i = 0; i < n; ++i) {
          const Index row = 4 * nup + i;
          sq += std::norm(0.5 * Complex(du(row, k), du(row, k + 1)));
        }
        worst = std::max(worst, std::sqrt(sq));
      }
      r.deviation = worst;
      break;
    }
    default:
      throw Error(ErrorCode::invalid_argument,
                  std::string("quantity not available on separated rays: ") + to_string(quantity_));
  }
  return r;
}

ClusterRay::ClusterRay(const Partition& p, Quantity quantity, ClusterMode mode,
                       ClusterScale scale_kind, double t, std::uint64_t seed, RayOptions options,
                       double center_ratio)
    : partition_(p),
      quantity_(quantity),
      mode_(mode),
      scale_kind_(scale_kind),
      t_(t),
      options_(options),
      center_ratio_(center_ratio) {
  if (p.k() < 2) throw Error(ErrorCode::invalid_argument, "cluster ray needs at least two clusters");
  std::mt19937_64 rng(seed);
  std::vector<Index> sizes;
  std::vector<std::shared_ptr<const LocalChart>> subs;
  std::vector<RVector> cluster_params;
  for (const auto& c : p.clusters) {
    const Index s = static_cast<Index>(c.size());
    sizes.push_back(s);
    if (s == 1) {
      subs.push_back(nullptr);
    } else if (s == 2) {
      subs.push_back(std::make_shared<Hilb2Chart>(t));
      const Point2 w = unit_direction(rng);
      RVector v(4);
      v << w.lambda.real(), w.lambda.imag(), w.mu.real(), w.mu.imag();
      cluster_params.push_back(v);
    } else {
      auto sc = std::make_shared<SeparatedChart>(s, t, options_.separated);
      SeparatedRay inner(static_cast<int>(s), Quantity::margin, t, rng(), options_);
      const double gap = 1.05 * options_.separated.r_sep_factor * std::sqrt(t);
      cluster_params.push_back(sc->parameters(inner.configuration(gap + 1.0)));
      subs.push_back(sc);
    }
  }
  chart_ = std::make_shared<ClusterChart>(sizes, subs, t, options_.cluster);
  const Index cdim = chart_->center_dimension();
  RVector centers(cdim);
  std::normal_distribution<double> nd;
  for (Index i = 0; i < cdim; ++i) centers(i) = nd(rng);
  RVector full = RVector::Zero(chart_->parameter_dimension());
  full.head(cdim) = centers;
  const ClusterData cd = chart_->cluster_data([&] {
    RVector x = full;
    Index o = cdim;
    for (const auto& v : cluster_params) {
      x.segment(o, v.size()) = v;
      o += v.size();
    }
    return x;
  }());
  center_dir_ = centers / cd.center_norm();
  cluster_dir_.resize(full.size() - cdim);
  Index o = 0;
  for (const auto& v : cluster_params) {
    cluster_dir_.segment(o, v.size()) = v;
    o += v.size();
  }
  for (size_t j = 0; j < cd.clusters.size(); ++j) {
    if (cd.clusters[j].n() < 2) continue;
    for (const auto& pt : joint_spectrum(cd.clusters[j]).points) cluster_sq_ += norm(pt) * norm(pt);
  }
}

RVector ClusterRay::parameters(double scale) const {
  double c = 0.0, w = 1.0;
  const double n = static_cast<double>(partition_.n);
  if (scale_kind_ == ClusterScale::center_norm) {
    c = scale;
    w = mode_ == ClusterMode::joint ? scale / center_ratio_ : 1.0;
  } else if (mode_ == ClusterMode::fixed_sigma) {
    const double c2 = scale * scale / n - cluster_sq_;
    if (!(c2 > 0.0)) throw Error(ErrorCode::invalid_argument, "rho below the cluster contribution");
    c = std::sqrt(c2);
  } else {
    w = scale / std::sqrt(n * (center_ratio_ * center_ratio_ + cluster_sq_));
    c = center_ratio_ * w;
  }
  RVector p(chart_->parameter_dimension());
  p.head(center_dir_.size()) = c * center_dir_;
  p.tail(cluster_dir_.size()) = w * cluster_dir_;
  return p;
}

DecayRecord ClusterRay::operator()(double scale) const {
  DecayRecord r = base_record(quantity_, scale, format_partition(partition_));
  const RVector params = parameters(scale);
  const ClusterChart& chart = *chart_;
  switch (quantity_) {
    case Quantity::qale_deviation:
      r.deviation = qale_deviation_at(chart, params);
      break;
    case Quantity::dh_norm:
      r.deviation = dh_norm_at(chart, params);
      break;
    case Quantity::cross_term:
      r.deviation = cross_term_at(chart, params);
      break;
    case Quantity::off_block_norm:
      r.deviation = block_ansatz(chart.cluster_data(params), options_.cluster).off_block_norm;
      break;
    case Quantity::ansatz_level_residual:
      r.deviation = level_defect(block_ansatz(chart.cluster_data(params), options_.cluster).z0).norm();
      break;
    case Quantity::g_inf_distance: {
      const BlockAnsatz a = block_ansatz(chart.cluster_data(params), options_.cluster);
      const FlowResult f = flow_to_level(a.z0, t_);
      if (!f.converged) throw Error(ErrorCode::no_convergence, "flow did not reach the level set");
      r.deviation = (f.g_inf - CMatrix::Identity(f.g_inf.rows(), f.g_inf.cols())).norm();
      break;
    }
    default:
      throw Error(ErrorCode::invalid_argument,
                  std::string("quantity not available on cluster rays: ") + to_string(quantity_));
  }
  // Geometry of the ray point: v_i = q_j + (cluster spectrum).
  const ClusterData cd = chart.cluster_data(params);
  std::vector<Point2> v;
  for (size_t j = 0; j < cd.clusters.size(); ++j) {
    if (cd.clusters[j].n() == 1) {
      v.push_back(cd.centers[j]);
      continue;
    }
    for (const auto& pt : joint_spectrum(cd.clusters[j]).points) v.push_back(cd.centers[j] + pt);
  }
  set_geometry(r, v);
  return r;
}

std::vector<DecayRecord> qale_deviation(QaleMode mode, std::span<const double> rho_grid,
                                        const ScanOptions& options, double t, std::uint64_t seed,
                                        const RayOptions& ray_options) {
  const ClusterRay ray(parse_partition("1,2|3", 3), Quantity::qale_deviation,
                       mode == QaleMode::joint ? ClusterMode::joint : ClusterMode::fixed_sigma,
                       ClusterScale::rho, t, seed, ray_options);
  return decay_scan([&](double s) { return ray(s); }, rho_grid, Quantity::qale_deviation, options);
}

RayEvaluator make_ray(Quantity quantity, int n, const Partition& partition, ClusterMode mode,
                      double t, std::uint64_t seed, const RayOptions& options) {
  if (partition.n != n) throw Error(ErrorCode::dimension_mismatch, "partition size differs from n");
  if (partition.k() == n) {
    if (n == 2 && quantity == Quantity::metric_deviation) {
      auto ray = std::make_shared<AleRay>(t, seed);
      return [ray](double s) { return (*ray)(s); };
    }
    auto ray = std::make_shared<SeparatedRay>(n, quantity, t, seed, options);
    return [ray](double s) { return (*ray)(s); };
  }
  const ClusterScale kind =
      quantity == Quantity::qale_deviation ? ClusterScale::rho : ClusterScale::center_norm;
  auto ray = std::make_shared<ClusterRay>(partition, quantity, mode, kind, t, seed, options);
  return [ray](double s) { return (*ray)(s); };
}

}  // namespace hkq
