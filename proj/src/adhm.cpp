#include "hkq/adhm.hpp"

#include <cmath>
#include <string>

#include "hkq/error.hpp"

namespace hkq {

TangentVector TangentVector::zero(Index n) {
  return {CMatrix::Zero(n, n), CMatrix::Zero(n, n), CVector::Zero(n), CRowVector::Zero(n)};
}

TangentVector& TangentVector::operator+=(const TangentVector& o) {
  A += o.A;
  B += o.B;
  x += o.x;
  y += o.y;
  return *this;
}

TangentVector& TangentVector::operator-=(const TangentVector& o) {
  A -= o.A;
  B -= o.B;
  x -= o.x;
  y -= o.y;
  return *this;
}

TangentVector& TangentVector::operator*=(Complex s) {
  A *= s;
  B *= s;
  x *= s;
  y *= s;
  return *this;
}

TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
TangentVector operator-(TangentVector a) { return a *= Complex(-1.0); }
TangentVector operator*(Complex s, TangentVector v) { return v *= s; }
TangentVector operator*(double s, TangentVector v) { return v *= Complex(s); }

double inner(const TangentVector& v, const TangentVector& w) {
  Complex s = (v.A.array() * w.A.array().conjugate()).sum();
  s += (v.B.array() * w.B.array().conjugate()).sum();
  s += (v.x.array() * w.x.array().conjugate()).sum();
  s += (v.y.array() * w.y.array().conjugate()).sum();
  return s.real();
}

double norm(const TangentVector& v) { return std::sqrt(inner(v, v)); }

Index real_dimension(Index n) { return 2 * (2 * n * n + 2 * n); }

RVector realify(const TangentVector& v) {
  const Index n = v.n();
  const Index half = 2 * n * n + 2 * n;
  RVector r(2 * half);
  Index k = 0;
  auto put = [&](const Complex& c) {
    r(k) = c.real();
    r(k + half) = c.imag();
    ++k;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) put(v.A(i, j));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) put(v.B(i, j));
  for (Index i = 0; i < n; ++i) put(v.x(i));
  for (Index i = 0; i < n; ++i) put(v.y(i));
  return r;
}

TangentVector unrealify(const RVector& r, Index n) {
  const Index half = 2 * n * n + 2 * n;
  if (r.size() != 2 * half) {
    throw Error(ErrorCode::dimension_mismatch, "unrealify: wrong vector length");
  }
  TangentVector v = TangentVector::zero(n);
  Index k = 0;
  auto get = [&]() {
    Complex c(r(k), r(k + half));
    ++k;
    return c;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) v.A(i, j) = get();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) v.B(i, j) = get();
  for (Index i = 0; i < n; ++i) v.x(i) = get();
  for (Index i = 0; i < n; ++i) v.y(i) = get();
  return v;
}

ADHMDatum ADHMDatum::zero(Index n, double t) {
  return {CMatrix::Zero(n, n), CMatrix::Zero(n, n), CVector::Zero(n), CRowVector::Zero(n), t};
}

TangentVector ADHMDatum::coordinates() const { return {A, B, x, y}; }

ADHMDatum ADHMDatum::from_coordinates(const TangentVector& v, double t) {
  return {v.A, v.B, v.x, v.y, t};
}

double trace_tolerance(const ADHMDatum& z) {
  double m = 0.0;
  if (z.A.size() > 0) m = std::max(m, z.A.cwiseAbs().maxCoeff());
  if (z.B.size() > 0) m = std::max(m, z.B.cwiseAbs().maxCoeff());
  return 1e-12 * static_cast<double>(z.n()) * m;
}

void validate(const ADHMDatum& z) {
  const Index n = z.A.rows();
  if (n < 1 || z.A.cols() != n || z.B.rows() != n || z.B.cols() != n || z.x.size() != n ||
      z.y.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "ADHM datum fields have inconsistent sizes");
  }
  if (!std::isfinite(z.t) || z.t < 0.0) {
    throw Error(ErrorCode::invalid_argument, "level t must be finite and nonnegative");
  }
  if (!z.A.allFinite() || !z.B.allFinite() || !z.x.allFinite() || !z.y.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "ADHM datum has non-finite entries");
  }
  const double tol = trace_tolerance(z);
  if (std::abs(z.A.trace()) > tol || std::abs(z.B.trace()) > tol) {
    throw Error(ErrorCode::invalid_argument, "A and B must be trace-free");
  }
}

static void check_same_n(const ADHMDatum& z, const TangentVector& v) {
  if (v.A.rows() != z.n() || v.A.cols() != z.n() || v.B.rows() != z.n() || v.x.size() != z.n() ||
      v.y.size() != z.n()) {
    throw Error(ErrorCode::dimension_mismatch, "tangent vector does not match datum size");
  }
}

double inner(const GaugeAlgebraElement& a, const GaugeAlgebraElement& b) {
  return (a.h.array() * b.h.array().conjugate()).sum().real();
}

double norm(const GaugeAlgebraElement& a) { return std::sqrt(inner(a, a)); }

std::vector<CMatrix> gauge_basis(Index n) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<size_t>(n * n));
  const double r = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    CMatrix e = CMatrix::Zero(n, n);
    e(j, j) = kI;
    basis.push_back(e);
  }
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      CMatrix e = CMatrix::Zero(n, n);
      e(j, k) = r;
      e(k, j) = -r;
      basis.push_back(e);
      CMatrix f = CMatrix::Zero(n, n);
      f(j, k) = kI * r;
      f(k, j) = kI * r;
      basis.push_back(f);
    }
  }
  return basis;
}

RVector gauge_coefficients(const GaugeAlgebraElement& h) {
  const auto basis = gauge_basis(h.h.rows());
  RVector c(static_cast<Index>(basis.size()));
  for (size_t a = 0; a < basis.size(); ++a) c(static_cast<Index>(a)) = inner(h, {basis[a]});
  return c;
}

GaugeAlgebraElement gauge_from_coefficients(const RVector& c, Index n) {
  const auto basis = gauge_basis(n);
  if (c.size() != static_cast<Index>(basis.size())) {
    throw Error(ErrorCode::dimension_mismatch, "gauge coefficient vector has wrong length");
  }
  CMatrix h = CMatrix::Zero(n, n);
  for (size_t a = 0; a < basis.size(); ++a) h += c(static_cast<Index>(a)) * basis[a];
  return {h};
}

CMatrix level_defect(const ADHMDatum& z) {
  CMatrix m = commutator(z.A, z.A.adjoint()) + commutator(z.B, z.B.adjoint());
  m += z.x * z.x.adjoint();
  m -= z.y.adjoint() * z.y;
  m.diagonal().array() -= z.t;
  return m;
}

GaugeAlgebraElement real_moment(const ADHMDatum& z) {
  CMatrix m = commutator(z.A, z.A.adjoint()) + commutator(z.B, z.B.adjoint());
  m += z.x * z.x.adjoint();
  m -= z.y.adjoint() * z.y;
  return {(-0.5 * kI) * m};
}

CMatrix complex_moment(const ADHMDatum& z) { return commutator(z.A, z.B) + z.x * z.y; }

MomentResidual moment_residual(const ADHMDatum& z) {
  return {level_defect(z).norm(), complex_moment(z).norm()};
}

CMatrix level_defect_derivative(const ADHMDatum& z, const TangentVector& dz) {
  check_same_n(z, dz);
  CMatrix m = commutator(dz.A, z.A.adjoint()) + commutator(z.A, dz.A.adjoint()) +
              commutator(dz.B, z.B.adjoint()) + commutator(z.B, dz.B.adjoint());
  m += dz.x * z.x.adjoint() + z.x * dz.x.adjoint();
  m -= dz.y.adjoint() * z.y + z.y.adjoint() * dz.y;
  return m;
}

GaugeAlgebraElement real_moment_derivative(const ADHMDatum& z, const TangentVector& dz) {
  return {(-0.5 * kI) * level_defect_derivative(z, dz)};
}

CMatrix complex_moment_derivative(const ADHMDatum& z, const TangentVector& dz) {
  check_same_n(z, dz);
  return commutator(dz.A, z.B) + commutator(z.A, dz.B) + dz.x * z.y + z.x * dz.y;
}

bool on_level(const ADHMDatum& z, double tol_level) {
  const MomentResidual r = moment_residual(z);
  if (r.real_residual > tol_level || r.complex_residual > tol_level) return false;
  if (z.t > 0.0 && z.y.norm() > tol_level) return false;
  return true;
}

TangentVector infinitesimal_action(const ADHMDatum& z, const CMatrix& h) {
  if (h.rows() != z.n() || h.cols() != z.n()) {
    throw Error(ErrorCode::dimension_mismatch, "gauge element does not match datum size");
  }
  return {commutator(h, z.A), commutator(h, z.B), h * z.x, -(z.y * h)};
}

TangentVector infinitesimal_action(const ADHMDatum& z, const GaugeAlgebraElement& h) {
  return infinitesimal_action(z, h.h);
}

GaugeAlgebraElement infinitesimal_action_adjoint(const ADHMDatum& z, const TangentVector& v) {
  check_same_n(z, v);
  CMatrix k = commutator(v.A, z.A.adjoint()) + commutator(v.B, z.B.adjoint());
  k += v.x * z.x.adjoint();
  k -= z.y.adjoint() * v.y;
  return {skew_hermitian_part(k)};
}

namespace {

// g M g^-1 written as M + E M + M F + E M F with E = g - Id, F = g^-1 - Id,
// so that for g near Id the correction carries no cancellation error.
struct NearIdentity {
  CMatrix e;
  CMatrix f;

  explicit NearIdentity(const CMatrix& e_in) : e(e_in) {
    const CMatrix g = CMatrix::Identity(e.rows(), e.cols()) + e;
    if (!(condition_number(g) < 1e12)) {
      throw Error(ErrorCode::singular_matrix, "gauge_act: g is singular or ill-conditioned");
    }
    f = -g.partialPivLu().solve(e);
  }
  CMatrix conjugate(const CMatrix& m) const { return m + (e * m + m * f + e * m * f); }
  CVector left(const CVector& x) const { return x + e * x; }
  CRowVector right(const CRowVector& y) const { return y + y * f; }
};

}  // namespace

ADHMDatum gauge_act(const CMatrix& g, const ADHMDatum& z) {
  return gauge_act_near_identity(g - CMatrix::Identity(g.rows(), g.cols()), z);
}

TangentVector gauge_act(const CMatrix& g, const TangentVector& v) {
  return gauge_act_near_identity(g - CMatrix::Identity(g.rows(), g.cols()), v);
}

ADHMDatum gauge_act_near_identity(const CMatrix& e, const ADHMDatum& z) {
  if (e.rows() != z.n() || e.cols() != z.n()) {
    throw Error(ErrorCode::dimension_mismatch, "gauge_act: g has wrong size");
  }
  const NearIdentity act(e);
  ADHMDatum out{act.conjugate(z.A), act.conjugate(z.B), act.left(z.x), act.right(z.y), z.t};
  remove_trace(out.A);
  remove_trace(out.B);
  return out;
}

TangentVector gauge_act_near_identity(const CMatrix& e, const TangentVector& v) {
  if (e.rows() != v.n() || e.cols() != v.n()) {
    throw Error(ErrorCode::dimension_mismatch, "gauge_act: g has wrong size");
  }
  const NearIdentity act(e);
  return {act.conjugate(v.A), act.conjugate(v.B), act.left(v.x), act.right(v.y)};
}

TangentVector quaternion_apply(Axis axis, const TangentVector& v) {
  if (axis == Axis::I) return kI * v;
  TangentVector j{v.B.adjoint(), -v.A.adjoint(), v.y.adjoint(), -v.x.adjoint()};
  if (axis == Axis::J) return j;
  return kI * j;
}

GaugeAlgebraElement q_operator(const ADHMDatum& z, const GaugeAlgebraElement& h) {
  return infinitesimal_action_adjoint(z, infinitesimal_action(z, h));
}

RMatrix q_gram(const ADHMDatum& z) {
  const auto basis = gauge_basis(z.n());
  const Index m = static_cast<Index>(basis.size());
  std::vector<TangentVector> images;
  images.reserve(basis.size());
  for (const auto& e : basis) images.push_back(infinitesimal_action(z, e));
  RMatrix g(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a; b < m; ++b) {
      g(a, b) = inner(images[a], images[b]);
      g(b, a) = g(a, b);
    }
  }
  return g;
}

Complex complex_symplectic(const TangentVector& v, const TangentVector& w) {
  return (v.A * w.B - v.B * w.A).trace() + (w.y * v.x)(0, 0) - (v.y * w.x)(0, 0);
}

}  // namespace hkq
