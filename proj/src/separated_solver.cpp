#include "hkq/separated_solver.hpp"

#include <cmath>
#include <sstream>

#include "hkq/error.hpp"

namespace hkq {

namespace {

Index pair_count(Index n) { return n * (n - 1) / 2; }

// Packs the Hermitian defect H and the commutator C in residual_F order.
RVector pack_equations(const CMatrix& h, const CMatrix& c) {
  const Index n = h.rows();
  const Index m = pair_count(n);
  RVector f(4 * m + n);
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      f(k++) = h(i, j).real();
      f(k++) = h(i, j).imag();
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      f(k++) = c(i, j).real();
      f(k++) = c(i, j).imag();
    }
  for (Index i = 0; i < n; ++i) f(k++) = h(i, i).real();
  return f;
}

// dz for the l-th unknown coordinate.
TangentVector unknown_direction(Index n, Index l) {
  TangentVector v = TangentVector::zero(n);
  const Index m = pair_count(n);
  Index k = 0;
  for (int slot = 0; slot < 2; ++slot) {
    CMatrix& target = slot == 0 ? v.A : v.B;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        if (l == k) target(i, j) = 1.0;
        if (l == k + 1) target(i, j) = kI;
        k += 2;
      }
  }
  if (l >= 4 * m) v.x(l - 4 * m) = 1.0;
  return v;
}

RMatrix jacobian(const ADHMDatum& z) {
  const Index n = z.n();
  const Index dim = 4 * pair_count(n) + n;
  RMatrix jac(dim, dim);
  for (Index l = 0; l < dim; ++l) {
    const TangentVector dz = unknown_direction(n, l);
    jac.col(l) = pack_equations(level_defect_derivative(z, dz), complex_moment_derivative(z, dz));
  }
  return jac;
}

void check_configuration(const Configuration& q, double t) {
  if (q.n() < 1) throw Error(ErrorCode::invalid_argument, "configuration is empty");
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "level t must be positive");
  validate_centered(q);
}

}  // namespace

TriangularUnknowns ansatz(const Configuration& q, double t) {
  const Index n = q.n();
  TriangularUnknowns u{CMatrix::Zero(n, n), CMatrix::Zero(n, n), CVector::Constant(n, std::sqrt(t))};
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Point2 d = q.points[static_cast<size_t>(i)] - q.points[static_cast<size_t>(j)];
      const double r2 = std::norm(d.lambda) + std::norm(d.mu);
      if (!(r2 > 0.0)) throw Error(ErrorCode::coincident_points, "ansatz: coincident points");
      u.a(i, j) = d.lambda * t / r2;
      u.b(i, j) = d.mu * t / r2;
    }
  return u;
}

ADHMDatum assemble(const Configuration& q, const TriangularUnknowns& u, double t) {
  const Index n = q.n();
  ADHMDatum z = ADHMDatum::zero(n, t);
  z.A = u.a.triangularView<Eigen::StrictlyUpper>();
  z.B = u.b.triangularView<Eigen::StrictlyUpper>();
  for (Index i = 0; i < n; ++i) {
    z.A(i, i) = q.points[static_cast<size_t>(i)].lambda;
    z.B(i, i) = q.points[static_cast<size_t>(i)].mu;
  }
  remove_trace(z.A);
  remove_trace(z.B);
  z.x = u.x;
  return z;
}

RVector residual_F(const Configuration& q, const TriangularUnknowns& u, double t) {
  const ADHMDatum z = assemble(q, u, t);
  return pack_equations(level_defect(z), complex_moment(z));
}

RVector pack_unknowns(const TriangularUnknowns& u) {
  const Index n = u.x.size();
  RVector r(4 * pair_count(n) + n);
  Index k = 0;
  for (const CMatrix* m : {&u.a, &u.b})
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        r(k++) = (*m)(i, j).real();
        r(k++) = (*m)(i, j).imag();
      }
  for (Index i = 0; i < n; ++i) r(k++) = u.x(i).real();
  return r;
}

TriangularUnknowns unpack_unknowns(const RVector& r, Index n) {
  if (r.size() != 4 * pair_count(n) + n) {
    throw Error(ErrorCode::dimension_mismatch, "unknown vector has wrong length");
  }
  TriangularUnknowns u{CMatrix::Zero(n, n), CMatrix::Zero(n, n), CVector::Zero(n)};
  Index k = 0;
  for (CMatrix* m : {&u.a, &u.b})
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        (*m)(i, j) = Complex(r(k), r(k + 1));
        k += 2;
      }
  for (Index i = 0; i < n; ++i) u.x(i) = r(k++);
  return u;
}

SeparatedSolution newton_solve(const Configuration& q, double t, const SeparatedOptions& options) {
  check_configuration(q, t);
  const Index n = q.n();
  if (options.enforce_separation && n >= 2) {
    const double r_sep = options.r_sep_factor * std::sqrt(t);
    if (pairwise_min(q.points) < r_sep) {
      std::ostringstream msg;
      msg << "pairwise_min " << pairwise_min(q.points) << " below R_sep " << r_sep;
      throw Error(ErrorCode::invalid_argument, msg.str());
    }
  }
  const TriangularUnknowns start = ansatz(q, t);
  const RVector u0 = pack_unknowns(start);
  RVector u = u0;
  const double tol = options.tol * std::max(1.0, t);
  NewtonReport report;
  for (int iter = 0;; ++iter) {
    const ADHMDatum z = assemble(q, unpack_unknowns(u, n), t);
    const RVector f = pack_equations(level_defect(z), complex_moment(z));
    const double res = f.norm();
    report.history.push_back(res);
    if (!std::isfinite(res)) throw Error(ErrorCode::no_convergence, "Newton diverged");
    if (res <= tol) break;
    if (iter >= options.max_iter) {
      std::ostringstream msg;
      msg << "Newton did not reach " << tol << " in " << options.max_iter
          << " iterations (residual " << res << ")";
      throw Error(ErrorCode::no_convergence, msg.str());
    }
    Eigen::FullPivLU<RMatrix> lu(jacobian(z));
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::jacobian_singular, "Newton Jacobian is rank-deficient");
    }
    const RVector step = lu.solve(f);
    u -= step;
    report.iterations = iter + 1;
    // Roundoff stagnation: accept when already close.
    if (step.norm() <= 4e-16 * u.norm() && res <= 1e3 * tol) {
      const ADHMDatum zf = assemble(q, unpack_unknowns(u, n), t);
      report.history.push_back(pack_equations(level_defect(zf), complex_moment(zf)).norm());
      break;
    }
  }
  SeparatedSolution sol;
  sol.unknowns = unpack_unknowns(u, n);
  sol.datum = assemble(q, sol.unknowns, t);
  report.final_residual = report.history.back();
  report.dist_from_ansatz = (u - u0).norm();
  sol.report = std::move(report);
  return sol;
}

SeparatedChart::SeparatedChart(Index n, double t, SeparatedOptions options)
    : n_(n), t_(t), options_(options) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "separated chart needs n >= 2");
}

Configuration SeparatedChart::configuration(const RVector& params) const {
  if (params.size() != parameter_dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "chart parameters have wrong length");
  }
  Configuration q = from_real(params);
  Point2 sum{0.0, 0.0};
  for (const auto& p : q.points) sum = sum + p;
  q.points.push_back(-1.0 * sum);
  return q;
}

RVector SeparatedChart::parameters(const Configuration& q) const {
  if (q.n() != n_) throw Error(ErrorCode::dimension_mismatch, "configuration has wrong n");
  return to_real(q.points).head(4 * (n_ - 1));
}

ADHMDatum SeparatedChart::evaluate(const RVector& params) const {
  return newton_solve(configuration(params), t_, options_).datum;
}

std::pair<SeparatedSolution, RMatrix> SeparatedChart::unknowns_jet(const RVector& params) const {
  SeparatedSolution sol = newton_solve(configuration(params), t_, options_);
  const ADHMDatum& z = sol.datum;
  const Eigen::FullPivLU<RMatrix> lu(jacobian(z));
  const Index dim = parameter_dimension();
  RMatrix du(pack_unknowns(sol.unknowns).size(), dim);
  for (Index k = 0; k < dim; ++k) {
    const Configuration dq = configuration(unit_vector(dim, k));
    TangentVector dz = TangentVector::zero(n_);
    for (Index i = 0; i < n_; ++i) {
      dz.A(i, i) = dq.points[static_cast<size_t>(i)].lambda;
      dz.B(i, i) = dq.points[static_cast<size_t>(i)].mu;
    }
    const RVector df =
        pack_equations(level_defect_derivative(z, dz), complex_moment_derivative(z, dz));
    du.col(k) = -lu.solve(df);
  }
  return {std::move(sol), du};
}

ChartJet SeparatedChart::jet(const RVector& params) const {
  auto [sol, du] = unknowns_jet(params);
  ChartJet j{sol.datum, {}};
  const Index dim = parameter_dimension();
  for (Index k = 0; k < dim; ++k) {
    const Configuration dq = configuration(unit_vector(dim, k));
    const TriangularUnknowns d = unpack_unknowns(du.col(k), n_);
    TangentVector v = TangentVector::zero(n_);
    v.A = d.a;
    v.B = d.b;
    for (Index i = 0; i < n_; ++i) {
      v.A(i, i) = dq.points[static_cast<size_t>(i)].lambda;
      v.B(i, i) = dq.points[static_cast<size_t>(i)].mu;
    }
    v.x = d.x;
    j.tangents.push_back(v);
  }
  return j;
}

double SeparatedChart::local_scale(const RVector& params, Index) const {
  return std::max(1.0, configuration_norm(configuration(params).points));
}

}  // namespace hkq
