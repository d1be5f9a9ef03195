#pragma once

#include <vector>

#include "hkq/adhm.hpp"
#include "hkq/chart.hpp"
#include "hkq/configuration.hpp"

namespace hkq {

// Strictly upper triangular a, b and the vector x (gauge-fixed real).
struct TriangularUnknowns {
  CMatrix a;
  CMatrix b;
  CVector x;
};

struct SeparatedOptions {
  double tol = 1e-12;  // on |F|, scaled by max(1, t)
  int max_iter = 50;
  double r_sep_factor = 10.0;  // R_sep = factor * sqrt(t)
  bool enforce_separation = true;
};

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  double dist_from_ansatz = 0.0;
  std::vector<double> history;  // |F| before each step and at the end
};

struct SeparatedSolution {
  ADHMDatum datum;
  TriangularUnknowns unknowns;
  NewtonReport report;
};

TriangularUnknowns ansatz(const Configuration& q, double t);

// Stacked residual: upper entries of H = [A,A*]+[B,B*]+xx*-t (re, im), upper
// entries of [A,B] (re, im), then the real diagonal of H.
RVector residual_F(const Configuration& q, const TriangularUnknowns& u, double t);

// Unknown vector (a row-major upper (re, im), b likewise, Re x).
RVector pack_unknowns(const TriangularUnknowns& u);
TriangularUnknowns unpack_unknowns(const RVector& r, Index n);

ADHMDatum assemble(const Configuration& q, const TriangularUnknowns& u, double t);

SeparatedSolution newton_solve(const Configuration& q, double t, const SeparatedOptions& options = {});

// Psi_0 over (q_1, ..., q_{n-1}) with q_n = -sum; parameters packed as to_real().
class SeparatedChart : public LocalChart {
 public:
  SeparatedChart(Index n, double t, SeparatedOptions options = {});
  Index parameter_dimension() const override { return 4 * (n_ - 1); }
  ADHMDatum evaluate(const RVector& params) const override;
  ChartJet jet(const RVector& params) const override;
  double local_scale(const RVector& params, Index k) const override;

  Configuration configuration(const RVector& params) const;
  RVector parameters(const Configuration& q) const;
  // Solution and d(packed unknowns)/d(params), one column per parameter.
  std::pair<SeparatedSolution, RMatrix> unknowns_jet(const RVector& params) const;
  double level() const { return t_; }

 private:
  Index n_;
  double t_;
  SeparatedOptions options_;
};

}  // namespace hkq
