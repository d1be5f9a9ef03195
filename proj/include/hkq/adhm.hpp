#pragma once

#include <vector>

#include "hkq/linalg.hpp"

namespace hkq {

// Displacement (dA, dB, dx, dy) in the flat space M_n.
struct TangentVector {
  CMatrix A;
  CMatrix B;
  CVector x;
  CRowVector y;

  static TangentVector zero(Index n);
  Index n() const { return A.rows(); }

  TangentVector& operator+=(const TangentVector& o);
  TangentVector& operator-=(const TangentVector& o);
  TangentVector& operator*=(Complex s);
};

TangentVector operator+(TangentVector a, const TangentVector& b);
TangentVector operator-(TangentVector a, const TangentVector& b);
TangentVector operator-(TangentVector a);
TangentVector operator*(Complex s, TangentVector v);
TangentVector operator*(double s, TangentVector v);

// Re[tr(A A'*) + tr(B B'*) + x'* x + y y'*].
double inner(const TangentVector& v, const TangentVector& w);
double norm(const TangentVector& v);

// Real coordinates (real parts then imaginary parts); the Euclidean dot
// product of two images equals inner().
RVector realify(const TangentVector& v);
TangentVector unrealify(const RVector& r, Index n);
Index real_dimension(Index n);

// A point z = (A, B, x, y) with its level t.
struct ADHMDatum {
  CMatrix A;
  CMatrix B;
  CVector x;
  CRowVector y;
  double t = 1.0;

  static ADHMDatum zero(Index n, double t);
  Index n() const { return A.rows(); }
  TangentVector coordinates() const;
  static ADHMDatum from_coordinates(const TangentVector& v, double t);
};

// Throws dimension_mismatch / invalid_argument on malformed data.
void validate(const ADHMDatum& z);
double trace_tolerance(const ADHMDatum& z);

// Element h of u(n), h* = -h.
struct GaugeAlgebraElement {
  CMatrix h;
};

double inner(const GaugeAlgebraElement& a, const GaugeAlgebraElement& b);
double norm(const GaugeAlgebraElement& a);

// Orthonormal basis of u(n) for Re tr(h k*): i E_jj, (E_jk - E_kj)/sqrt2,
// i(E_jk + E_kj)/sqrt2.
std::vector<CMatrix> gauge_basis(Index n);
RVector gauge_coefficients(const GaugeAlgebraElement& h);
GaugeAlgebraElement gauge_from_coefficients(const RVector& c, Index n);

struct MomentResidual {
  double real_residual = 0.0;
  double complex_residual = 0.0;
};

GaugeAlgebraElement real_moment(const ADHMDatum& z);
CMatrix complex_moment(const ADHMDatum& z);
// Hermitian matrix 2i mu(z) - t Id.
CMatrix level_defect(const ADHMDatum& z);
MomentResidual moment_residual(const ADHMDatum& z);

// Derivatives of 2i mu and mu_C along dz.
CMatrix level_defect_derivative(const ADHMDatum& z, const TangentVector& dz);
GaugeAlgebraElement real_moment_derivative(const ADHMDatum& z, const TangentVector& dz);
CMatrix complex_moment_derivative(const ADHMDatum& z, const TangentVector& dz);

bool on_level(const ADHMDatum& z, double tol_level = 1e-10);

// l_z(h) = ([h,A], [h,B], hx, -yh); also accepts any h in gl_n(C).
TangentVector infinitesimal_action(const ADHMDatum& z, const CMatrix& h);
TangentVector infinitesimal_action(const ADHMDatum& z, const GaugeAlgebraElement& h);
GaugeAlgebraElement infinitesimal_action_adjoint(const ADHMDatum& z, const TangentVector& v);

// (gAg^-1, gBg^-1, gx, yg^-1); g must have condition number below 1e12.
ADHMDatum gauge_act(const CMatrix& g, const ADHMDatum& z);
TangentVector gauge_act(const CMatrix& g, const TangentVector& v);
// Action of g = Id + e, for e known more accurately than g - Id.
ADHMDatum gauge_act_near_identity(const CMatrix& e, const ADHMDatum& z);
TangentVector gauge_act_near_identity(const CMatrix& e, const TangentVector& v);

enum class Axis { I, J, K };
TangentVector quaternion_apply(Axis axis, const TangentVector& v);

GaugeAlgebraElement q_operator(const ADHMDatum& z, const GaugeAlgebraElement& h);
// Gram matrix of Q_z in gauge_basis(n).
RMatrix q_gram(const ADHMDatum& z);

// tr(A B' - B A') + y' x - y x'.
Complex complex_symplectic(const TangentVector& v, const TangentVector& w);

}  // namespace hkq
