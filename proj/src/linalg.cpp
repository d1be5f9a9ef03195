#include "hkq/linalg.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hkq/error.hpp"

namespace hkq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::singular_matrix: return "singular-matrix";
    case ErrorCode::non_free_point: return "non-free-point";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::jacobian_singular: return "jacobian-singular";
    case ErrorCode::stiff_failure: return "stiff-failure";
    case ErrorCode::coincident_points: return "coincident-points";
    case ErrorCode::origin_input: return "origin-input";
    case ErrorCode::degenerate_differential: return "degenerate-differential";
    case ErrorCode::not_triangularizable: return "not-simultaneously-triangularizable";
    case ErrorCode::insufficient_span: return "insufficient-span";
    case ErrorCode::scan_aborted: return "scan-aborted";
    case ErrorCode::malformed_input: return "malformed-input";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

CMatrix commutator(const CMatrix& x, const CMatrix& y) {
  const Index n = x.rows();
  if (x.cols() != n || y.rows() != n || y.cols() != n) {
    throw Error(ErrorCode::dimension_mismatch, "commutator: shape mismatch");
  }
  CMatrix nx = x;
  CMatrix ny = y;
  nx.diagonal().setZero();
  ny.diagonal().setZero();
  CMatrix out = nx * ny - ny * nx;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      out(i, j) += (x(i, i) - x(j, j)) * y(i, j) + x(i, j) * (y(j, j) - y(i, i));
    }
  }
  return out;
}

void remove_trace(CMatrix& m) {
  const Index n = m.rows();
  if (n == 0) return;
  const Complex mean = m.trace() / static_cast<double>(n);
  m.diagonal().array() -= mean;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

CMatrix skew_hermitian_part(const CMatrix& m) { return 0.5 * (m - m.adjoint()); }

CMatrix expm_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const RVector w = es.eigenvalues().array().exp();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix expm_skew_hermitian(const CMatrix& k) {
  // k = i H with H Hermitian.
  const CMatrix herm = hermitian_part(-kI * k);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  const CVector phase = (kI * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix expm1_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const RVector w = es.eigenvalues().unaryExpr([](double l) { return std::expm1(l); });
  return hermitian_part(es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint());
}

CMatrix log1p_hermitian(const CMatrix& p) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(p));
  const RVector w = es.eigenvalues().unaryExpr([](double l) { return std::log1p(l); });
  return hermitian_part(es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint());
}

double condition_number(const CMatrix& g) {
  Eigen::JacobiSVD<CMatrix> svd(g);
  const RVector s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

std::vector<int> solve_assignment(const RMatrix& cost) {
  // Shortest augmenting path formulation, 1-based potentials.
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) {
    throw Error(ErrorCode::dimension_mismatch, "assignment: cost matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n);
  for (int j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace hkq
