#include "hkq/donaldson_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "hkq/error.hpp"
#include "hkq/quotient_metric.hpp"

namespace hkq {

Index ClusterData::n() const {
  Index n = 0;
  for (const auto& c : clusters) n += c.n();
  return n;
}

std::vector<Index> ClusterData::sizes() const {
  std::vector<Index> s;
  for (const auto& c : clusters) s.push_back(c.n());
  return s;
}

double ClusterData::center_norm() const {
  double s = 0.0;
  for (size_t j = 0; j < centers.size(); ++j) {
    s += static_cast<double>(clusters[j].n()) * (std::norm(centers[j].lambda) + std::norm(centers[j].mu));
  }
  return std::sqrt(s);
}

ADHMDatum singleton_datum(double t) {
  ADHMDatum z = ADHMDatum::zero(1, t);
  z.x(0) = std::sqrt(t);
  return z;
}

void validate(const ClusterData& data, const ClusterOptions& options) {
  const size_t k = data.clusters.size();
  if (k == 0 || data.centers.size() != k) {
    throw Error(ErrorCode::dimension_mismatch, "cluster data: one center per cluster required");
  }
  Point2 weighted{0.0, 0.0};
  for (size_t j = 0; j < k; ++j) {
    const ADHMDatum& zeta = data.clusters[j];
    validate(zeta);
    if (std::abs(zeta.t - data.t) > 1e-14 * std::max(1.0, data.t) ||
        !on_level(zeta, options.tol_level)) {
      throw Error(ErrorCode::invalid_argument, "cluster datum is not on the level set");
    }
    weighted = weighted + static_cast<double>(zeta.n()) * data.centers[j];
  }
  const double qn = data.center_norm();
  if (norm(weighted) > 1e-12 * std::max(1.0, qn)) {
    throw Error(ErrorCode::invalid_argument, "cluster centers are not weighted-centered");
  }
  if (!options.enforce_bounds || k == 1) return;
  const double n = static_cast<double>(data.n());
  const double r_cluster = options.r_cluster_factor * n * std::sqrt(data.t);
  if (qn < r_cluster) {
    std::ostringstream msg;
    msg << "|q| = " << qn << " below R_cluster = " << r_cluster;
    throw Error(ErrorCode::invalid_argument, msg.str());
  }
  const double sep = qn / std::sqrt(n * (n - 1.0));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j)
      if (!(distance(data.centers[i], data.centers[j]) > sep)) {
        throw Error(ErrorCode::invalid_argument, "cluster centers are not separated");
      }
  for (const auto& zeta : data.clusters) {
    const double size2 = zeta.A.squaredNorm() + zeta.B.squaredNorm();
    if (size2 > options.tau * options.tau * qn * qn) {
      throw Error(ErrorCode::invalid_argument, "cluster exceeds the tau bound");
    }
  }
}

namespace {

std::vector<Index> block_offsets(const std::vector<Index>& sizes) {
  std::vector<Index> off(sizes.size() + 1, 0);
  for (size_t j = 0; j < sizes.size(); ++j) off[j + 1] = off[j] + sizes[j];
  return off;
}

// Visits off-block upper entries (row, col) in the fixed order.
template <class F>
void for_each_off_block(const std::vector<Index>& off, F&& f) {
  const size_t k = off.size() - 1;
  for (size_t bi = 0; bi < k; ++bi)
    for (size_t bj = bi + 1; bj < k; ++bj)
      for (Index r = off[bi]; r < off[bi + 1]; ++r)
        for (Index c = off[bj]; c < off[bj + 1]; ++c) f(r, c);
}

Index off_block_count(const std::vector<Index>& off) {
  Index m = 0;
  for_each_off_block(off, [&](Index, Index) { ++m; });
  return m;
}

RVector pack_off_block(const std::vector<Index>& off, const CMatrix& h, const CMatrix& c) {
  const Index m = off_block_count(off);
  RVector f(4 * m);
  Index k = 0;
  for (const CMatrix* mat : {&h, &c})
    for_each_off_block(off, [&](Index r, Index col) {
      f(k++) = (*mat)(r, col).real();
      f(k++) = (*mat)(r, col).imag();
    });
  return f;
}

void add_off_block(const std::vector<Index>& off, const RVector& u, CMatrix& a, CMatrix& b) {
  Index k = 0;
  for (CMatrix* mat : {&a, &b})
    for_each_off_block(off, [&](Index r, Index col) {
      (*mat)(r, col) += Complex(u(k), u(k + 1));
      k += 2;
    });
}

RMatrix off_block_jacobian(const std::vector<Index>& off, const ADHMDatum& z) {
  const Index m = off_block_count(off);
  RMatrix jac(4 * m, 4 * m);
  for (Index l = 0; l < 4 * m; ++l) {
    TangentVector dz = TangentVector::zero(z.n());
    add_off_block(off, unit_vector(4 * m, l), dz.A, dz.B);
    jac.col(l) = pack_off_block(off, level_defect_derivative(z, dz), complex_moment_derivative(z, dz));
  }
  return jac;
}

ADHMDatum block_diagonal(const ClusterData& data, const std::vector<Index>& off) {
  ADHMDatum z = ADHMDatum::zero(data.n(), data.t);
  for (size_t j = 0; j < data.clusters.size(); ++j) {
    const ADHMDatum& zeta = data.clusters[j];
    const Index o = off[j], s = zeta.n();
    z.A.block(o, o, s, s) = zeta.A + data.centers[j].lambda * CMatrix::Identity(s, s);
    z.B.block(o, o, s, s) = zeta.B + data.centers[j].mu * CMatrix::Identity(s, s);
    z.x.segment(o, s) = zeta.x;
  }
  return z;
}

RVector solve_spd(const RMatrix& g, const RVector& rhs, double floor) {
  Eigen::LLT<RMatrix> llt(g);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::non_free_point, "Q_z is not positive definite");
  }
  const double dmin = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
  if (!(dmin * dmin > 0.0) || !(dmin * dmin >= 1e-3 * floor)) {
    throw Error(ErrorCode::non_free_point, "Q_z is numerically singular");
  }
  return llt.solve(rhs);
}

// a with Q_z a = mu(z) - t/2i; returns the Hermitian generator -i a.
CMatrix flow_generator(const ADHMDatum& z, double floor) {
  const GaugeAlgebraElement target{(-0.5 * kI) * level_defect(z)};
  const RVector c = solve_spd(q_gram(z), gauge_coefficients(target), floor);
  return -kI * gauge_from_coefficients(c, z.n()).h;
}

}  // namespace

BlockAnsatz block_ansatz(const ClusterData& data, const ClusterOptions& options) {
  validate(data, options);
  const auto off = block_offsets(data.sizes());
  ADHMDatum z = block_diagonal(data, off);
  const Index m = off_block_count(off);
  const double tol = options.tol * std::max(1.0, data.t);
  BlockAnsatz out;
  RVector u = RVector::Zero(4 * m);
  for (int iter = 0; m > 0; ++iter) {
    const RVector f = pack_off_block(off, level_defect(z), complex_moment(z));
    const double res = f.norm();
    out.report.history.push_back(res);
    if (!std::isfinite(res)) throw Error(ErrorCode::no_convergence, "block ansatz Newton diverged");
    if (res <= tol) break;
    if (iter >= options.max_iter) {
      throw Error(ErrorCode::no_convergence, "block ansatz Newton did not converge");
    }
    Eigen::FullPivLU<RMatrix> lu(off_block_jacobian(off, z));
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::jacobian_singular, "block ansatz Jacobian is rank-deficient");
    }
    const RVector step = lu.solve(f);
    u -= step;
    add_off_block(off, -step, z.A, z.B);
    out.report.iterations = iter + 1;
    if (step.norm() <= 4e-16 * std::max(1.0, u.norm()) && res <= 1e3 * tol) {
      out.report.history.push_back(pack_off_block(off, level_defect(z), complex_moment(z)).norm());
      break;
    }
  }
  remove_trace(z.A);
  remove_trace(z.B);
  out.report.final_residual = out.report.history.empty() ? 0.0 : out.report.history.back();
  out.report.dist_from_ansatz = u.norm();
  out.off_block_norm = u.norm();
  out.z0 = std::move(z);
  return out;
}

PolarDecomposition polar_decompose(const CMatrix& g) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw Error(ErrorCode::dimension_mismatch, "polar_decompose: square matrix required");
  }
  return polar_decompose_near_identity(g - CMatrix::Identity(g.rows(), g.cols()));
}

PolarDecomposition polar_decompose_near_identity(const CMatrix& e) {
  const Index n = e.rows();
  const CMatrix g = CMatrix::Identity(n, n) + e;
  if (!(condition_number(g) < 1e14)) {
    throw Error(ErrorCode::singular_matrix, "polar_decompose: singular input");
  }
  // g* g = e^{2h}; log1p keeps relative accuracy for small h.
  const CMatrix p = e + e.adjoint() + e.adjoint() * e;
  PolarDecomposition out;
  out.h = 0.5 * log1p_hermitian(p);
  out.unitary = g + g * expm1_hermitian(-out.h);
  return out;
}

TangentVector tangent_action(const CMatrix& h, const TangentVector& v) {
  return infinitesimal_action(ADHMDatum::from_coordinates(v, 0.0), h);
}

FlowResult flow_to_level(const ADHMDatum& z0_in, double t, const FlowOptions& options) {
  ADHMDatum z0 = z0_in;
  z0.t = t;
  validate(z0);
  const Index n = z0.n();
  const Index zdim = real_dimension(n);
  using State = std::vector<double>;

  auto pack = [&](const ADHMDatum& z, const CMatrix& g) {
    State x(static_cast<size_t>(zdim + 2 * n * n));
    Eigen::Map<RVector>(x.data(), zdim) = realify(z.coordinates());
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        x[static_cast<size_t>(zdim + 2 * (j * n + i))] = g(i, j).real();
        x[static_cast<size_t>(zdim + 2 * (j * n + i) + 1)] = g(i, j).imag();
      }
    return x;
  };
  auto unpack = [&](const State& x, ADHMDatum& z, CMatrix& g) {
    z = ADHMDatum::from_coordinates(unrealify(Eigen::Map<const RVector>(x.data(), zdim), n), t);
    g.resize(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        g(i, j) = Complex(x[static_cast<size_t>(zdim + 2 * (j * n + i))],
                          x[static_cast<size_t>(zdim + 2 * (j * n + i) + 1)]);
  };

  const double floor = options.free_action_floor;
  auto system = [&](const State& x, State& dxdt, double) {
    ADHMDatum z;
    CMatrix g;
    unpack(x, z, g);
    const CMatrix gen = flow_generator(z, floor);
    const TangentVector dz = infinitesimal_action(z, gen);
    dxdt = pack(ADHMDatum::from_coordinates(dz, t), gen * g);
  };

  FlowResult res;
  const double margin0 = free_action_margin(z0);
  if (!(margin0 >= floor)) {
    throw Error(ErrorCode::non_free_point, "initial point has free-action margin below floor");
  }
  const MomentResidual r0 = moment_residual(z0);
  res.initial_deviation = 0.5 * r0.real_residual;
  {
    const double c = std::sqrt(margin0);
    const double delta = std::min(1.0, c * std::exp(-2.0) / (4.0 * norm(z0.coordinates())));
    res.sufficient_condition = res.initial_deviation < 4.0 / (c * c) * delta;
  }
  auto sample_at = [&](double s, const State& x) {
    ADHMDatum z;
    CMatrix g;
    unpack(x, z, g);
    const MomentResidual r = moment_residual(z);
    const double m = free_action_margin(z);
    if (!(m >= floor)) {
      throw Error(ErrorCode::non_free_point, "free-action margin dropped below floor mid-flow");
    }
    res.trajectory.push_back({s, r.real_residual, r.complex_residual, m});
    return r.real_residual;
  };

  State x = pack(z0, CMatrix::Identity(n, n));
  std::vector<double> extra = options.sample_times;
  std::sort(extra.begin(), extra.end());
  size_t next_extra = 0;
  double s = 0.0;
  double current = sample_at(0.0, x);
  while (next_extra < extra.size() && extra[next_extra] <= 0.0) ++next_extra;

  if (current >= options.tol) {
    namespace odeint = boost::numeric::odeint;
    auto stepper =
        odeint::make_dense_output(options.atol, options.rtol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x, 0.0, 1e-2);
    const int max_steps = 1000000;
    while (true) {
      const auto interval = stepper.do_step(system);
      ++res.steps;
      const double t0 = interval.first, t1 = interval.second;
      if (!(t1 - t0 > 1e-12 * std::max(1.0, t1)) || res.steps > max_steps) {
        throw Error(ErrorCode::stiff_failure, "flow step size underflow");
      }
      while (next_extra < extra.size() && extra[next_extra] <= std::min(t1, options.s_max)) {
        State xs(x.size());
        stepper.calc_state(extra[next_extra], xs);
        sample_at(extra[next_extra], xs);
        ++next_extra;
      }
      s = t1;
      x = stepper.current_state();
      current = sample_at(s, x);
      if (current < options.tol || s >= options.s_max) break;
    }
  }
  std::stable_sort(res.trajectory.begin(), res.trajectory.end(),
                   [](const FlowSample& a, const FlowSample& b) { return a.s < b.s; });
  res.s_end = s;
  res.converged = current < options.tol;
  unpack(x, res.z_end, res.g_inf);
  const PolarDecomposition p = polar_decompose(res.g_inf);
  res.unitary = p.unitary;
  res.h = p.h;
  res.z_h = gauge_act_near_identity(expm1_hermitian(p.h), z0);
  res.drift = norm(res.z_end.coordinates() - gauge_act(res.g_inf, z0).coordinates());
  return res;
}

NewtonHResult newton_on_h(const ADHMDatum& z0_in, double t, const NewtonHOptions& options) {
  ADHMDatum z0 = z0_in;
  z0.t = t;
  validate(z0);
  const Index n = z0.n();
  const double tol = options.tol * std::max(1.0, t);
  NewtonHResult out;
  CMatrix e = CMatrix::Zero(n, n);  // g = Id + e
  ADHMDatum z = z0;
  CMatrix defect = level_defect(z);
  double res = defect.norm();
  out.history.push_back(res);
  int polish = 0;  // full steps taken below tol while they still halve the residual
  for (int iter = 0; res > tol || polish < 2; ++iter) {
    if (iter >= options.max_iter) {
      if (res <= tol) break;
      throw Error(ErrorCode::no_convergence, "Newton on h did not converge");
    }
    const bool polishing = res <= tol;
    if (polishing) ++polish;
    // Q_z(k) = (i/2) r; step e^{ik} with ik Hermitian.
    const GaugeAlgebraElement target{(0.5 * kI) * defect};
    const RVector c = solve_spd(q_gram(z), gauge_coefficients(target), options.free_action_floor);
    const CMatrix step = kI * gauge_from_coefficients(c, n).h;
    double scale = 1.0;
    bool accepted = false;
    const int halvings = polishing ? 0 : options.max_halvings;
    const double required = polishing ? 0.5 : 1.0;
    for (int halving = 0; halving <= halvings; ++halving, scale *= 0.5) {
      const CMatrix s_e = expm1_hermitian(scale * step);
      const CMatrix e_try = s_e + e + s_e * e;
      const ADHMDatum z_try = gauge_act_near_identity(e_try, z0);
      const CMatrix d_try = level_defect(z_try);
      const double r_try = d_try.norm();
      if (r_try < required * res) {
        e = e_try;
        z = z_try;
        defect = d_try;
        res = r_try;
        accepted = true;
        break;
      }
    }
    if (!accepted && polishing) break;
    out.iterations = iter + 1;
    out.history.push_back(res);
    if (!accepted) {
      if (res <= 1e3 * tol) break;  // roundoff floor
      throw Error(ErrorCode::no_convergence, "Newton on h stalled (damping exhausted)");
    }
  }
  const PolarDecomposition p = polar_decompose_near_identity(e);
  out.g = CMatrix::Identity(n, n) + e;
  out.h = p.h;
  out.z_h = gauge_act_near_identity(expm1_hermitian(p.h), z0);
  out.residual = level_defect(out.z_h).norm();
  return out;
}

ClusterChart::ClusterChart(std::vector<Index> sizes,
                           std::vector<std::shared_ptr<const LocalChart>> sub_charts, double t,
                           ClusterOptions options, LevelMethod method)
    : sizes_(std::move(sizes)),
      sub_charts_(std::move(sub_charts)),
      t_(t),
      options_(options),
      method_(method) {
  if (sizes_.empty() || sub_charts_.size() != sizes_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "cluster chart: one sub-chart per cluster");
  }
  param_offsets_.push_back(center_dimension());
  for (size_t j = 0; j < sizes_.size(); ++j) {
    if (sizes_[j] < 1) throw Error(ErrorCode::invalid_argument, "cluster sizes must be positive");
    if (sizes_[j] == 1 && sub_charts_[j]) {
      throw Error(ErrorCode::invalid_argument, "singleton clusters take no sub-chart");
    }
    if (sizes_[j] > 1 && !sub_charts_[j]) {
      throw Error(ErrorCode::invalid_argument, "cluster of size > 1 needs a sub-chart");
    }
    const Index dim = sub_charts_[j] ? sub_charts_[j]->parameter_dimension() : 0;
    param_offsets_.push_back(param_offsets_.back() + dim);
  }
}

Index ClusterChart::parameter_dimension() const { return param_offsets_.back(); }

std::vector<Point2> ClusterChart::centers(const RVector& params) const {
  const Index kk = k();
  std::vector<Point2> q;
  Point2 weighted{0.0, 0.0};
  for (Index j = 0; j + 1 < kk; ++j) {
    const Point2 p{Complex(params(4 * j), params(4 * j + 1)),
                   Complex(params(4 * j + 2), params(4 * j + 3))};
    q.push_back(p);
    weighted = weighted + static_cast<double>(sizes_[static_cast<size_t>(j)]) * p;
  }
  q.push_back((-1.0 / static_cast<double>(sizes_.back())) * weighted);
  return q;
}

ClusterData ClusterChart::cluster_data(const RVector& params) const {
  if (params.size() != parameter_dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "cluster chart parameters have wrong length");
  }
  ClusterData d;
  d.t = t_;
  d.centers = centers(params);
  for (size_t j = 0; j < sizes_.size(); ++j) {
    if (!sub_charts_[j]) {
      d.clusters.push_back(singleton_datum(t_));
    } else {
      const Index o = param_offsets_[j];
      d.clusters.push_back(sub_charts_[j]->evaluate(params.segment(o, param_offsets_[j + 1] - o)));
    }
  }
  return d;
}

ClusterPoint ClusterChart::solve(const RVector& params) const {
  ClusterPoint p;
  p.data = cluster_data(params);
  p.ansatz = block_ansatz(p.data, options_);
  if (method_ == LevelMethod::newton) {
    const NewtonHResult r = newton_on_h(p.ansatz.z0, t_);
    p.z_h = r.z_h;
    p.h = r.h;
  } else {
    FlowOptions fo;
    fo.tol = 1e-12 * std::max(1.0, t_);
    fo.rtol = 1e-12;
    const FlowResult r = flow_to_level(p.ansatz.z0, t_, fo);
    p.z_h = r.z_h;
    p.h = r.h;
  }
  return p;
}

ADHMDatum ClusterChart::evaluate(const RVector& params) const { return solve(params).z_h; }

std::vector<TangentVector> ClusterChart::ansatz_tangents(const ClusterPoint& point,
                                                         const RVector& params) const {
  const Index dim = parameter_dimension();
  const Index n = point.ansatz.z0.n();
  const auto off = block_offsets(sizes_);
  std::vector<ChartJet> jets(sizes_.size());
  for (size_t j = 0; j < sizes_.size(); ++j) {
    if (!sub_charts_[j]) continue;
    const Index o = param_offsets_[j];
    jets[j] = sub_charts_[j]->jet(params.segment(o, param_offsets_[j + 1] - o));
  }
  const Eigen::FullPivLU<RMatrix> lu(off_block_jacobian(off, point.ansatz.z0));
  std::vector<TangentVector> out;
  for (Index l = 0; l < dim; ++l) {
    const RVector e = unit_vector(dim, l);
    const std::vector<Point2> dq = centers(e);  // linear in the parameters
    TangentVector dz = TangentVector::zero(n);
    for (size_t j = 0; j < sizes_.size(); ++j) {
      const Index o = off[j], s = sizes_[j];
      dz.A.block(o, o, s, s).diagonal().array() += dq[j].lambda;
      dz.B.block(o, o, s, s).diagonal().array() += dq[j].mu;
      if (!sub_charts_[j]) continue;
      const Index po = param_offsets_[j];
      const TangentVector dzeta = jets[j].pushforward(e.segment(po, param_offsets_[j + 1] - po));
      dz.A.block(o, o, s, s) += dzeta.A;
      dz.B.block(o, o, s, s) += dzeta.B;
      dz.x.segment(o, s) += dzeta.x;
    }
    const RVector df = pack_off_block(off, level_defect_derivative(point.ansatz.z0, dz),
                                      complex_moment_derivative(point.ansatz.z0, dz));
    if (df.size() > 0) add_off_block(off, -lu.solve(df), dz.A, dz.B);
    out.push_back(dz);
  }
  return out;
}

ChartJet ClusterChart::jet(const RVector& params) const {
  const ClusterPoint p = solve(params);
  const CMatrix eh = expm1_hermitian(p.h);
  ChartJet j{p.z_h, {}};
  for (const auto& v : ansatz_tangents(p, params)) j.tangents.push_back(gauge_act_near_identity(eh, v));
  return j;
}

double ClusterChart::local_scale(const RVector& params, Index k) const {
  if (k < center_dimension()) {
    double s = 0.0;
    const auto q = centers(params);
    for (size_t j = 0; j < q.size(); ++j)
      s += static_cast<double>(sizes_[j]) * (std::norm(q[j].lambda) + std::norm(q[j].mu));
    return std::max(1.0, std::sqrt(s));
  }
  for (size_t j = 0; j < sizes_.size(); ++j) {
    if (k < param_offsets_[j + 1]) {
      const Index o = param_offsets_[j];
      return sub_charts_[j]->local_scale(params.segment(o, param_offsets_[j + 1] - o), k - o);
    }
  }
  throw Error(ErrorCode::dimension_mismatch, "parameter index out of range");
}

ProductPoint ClusterChart::product_point(const RVector& params) const {
  ProductPoint p;
  std::vector<std::vector<int>> clusters;
  int next = 0;
  for (Index s : sizes_) {
    std::vector<int> c;
    for (Index i = 0; i < s; ++i) c.push_back(next++);
    clusters.push_back(c);
  }
  p.partition = {next, clusters};
  for (size_t j = 0; j < sizes_.size(); ++j) {
    p.charts.push_back(sub_charts_[j].get());
    const Index o = param_offsets_[j];
    p.params.push_back(params.segment(o, param_offsets_[j + 1] - o));
  }
  return p;
}

ProductTangent ClusterChart::product_tangent(const RVector& direction) const {
  ProductTangent v;
  v.center_velocities = centers(direction);
  for (size_t j = 0; j < sizes_.size(); ++j) {
    const Index o = param_offsets_[j];
    v.cluster_directions.push_back(direction.segment(o, param_offsets_[j + 1] - o));
  }
  return v;
}

namespace {

RMatrix reference_gram(const ClusterChart& chart, const RVector& params) {
  const Index dim = chart.parameter_dimension();
  std::vector<ProductTangent> probes;
  for (Index l = 0; l < dim; ++l) probes.push_back(chart.product_tangent(unit_vector(dim, l)));
  return product_reference_gram(chart.product_point(params), probes);
}

}  // namespace

double qale_deviation_at(const ClusterChart& chart, const RVector& params) {
  const ChartJet jet = chart.jet(params);
  const RMatrix g = HorizontalProjector(jet.point).gram(jet.tangents);
  const RMatrix ref = reference_gram(chart, params);
  Eigen::LLT<RMatrix> llt(ref);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::degenerate_differential, "reference metric is not positive definite");
  }
  const RMatrix l = llt.matrixL();
  RMatrix m = l.triangularView<Eigen::Lower>().solve(g - ref);
  m = l.triangularView<Eigen::Lower>().solve(m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double dh_norm_at(const ClusterChart& chart, const RVector& params, double relative_step) {
  // One step length for every direction, set by the center scale |q|.
  const double step = relative_step * chart.local_scale(params, 0);
  double worst = 0.0;
  for (Index l = 0; l < chart.parameter_dimension(); ++l) {
    const RVector e = unit_vector(chart.parameter_dimension(), l);
    const CMatrix hp = chart.solve(params + step * e).h;
    const CMatrix hm = chart.solve(params - step * e).h;
    worst = std::max(worst, (hp - hm).norm() / (2.0 * step));
  }
  return worst;
}

double cross_term_at(const ClusterChart& chart, const RVector& params) {
  const ClusterPoint p = chart.solve(params);
  const auto tangents = chart.ansatz_tangents(p, params);
  const RMatrix ref = reference_gram(chart, params);
  double worst = 0.0;
  for (size_t l = 0; l < tangents.size(); ++l) {
    const double c = inner(tangents[l], tangent_action(p.h, tangents[l]));
    worst = std::max(worst, std::abs(c) / ref(static_cast<Index>(l), static_cast<Index>(l)));
  }
  return worst;
}

}  // namespace hkq
