#pragma once

#include <Eigen/Dense>

namespace esbid {

// Convex quadratic program
//   minimize    0.5 x'Qx + c'x
//   subject to  A x = b,  G x <= h
// Q symmetric positive semidefinite. Either constraint block may be empty
// (zero rows).
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }
};

enum class QpStatus { Optimal, MaxIterations };

struct QpOptions {
  int max_iters = 150;
  double tol = 1e-9;  // relative KKT residual target
};

// eq_duals follow the sensitivity convention: eq_duals[i] is the derivative
// of the optimal objective with respect to b[i]. Stationarity then reads
//   Qx + c - A' eq_duals + G' ineq_duals = 0.
struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd x;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;  // >= 0
  Eigen::VectorXd slacks;      // h - Gx >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;   // scaled, max over stationarity/feasibility/gap
  int iterations = 0;
};

// Primal-dual interior point with a predictor-corrector step. Factors the
// condensed KKT system once per iteration with a dense LU. Never inverts
// matrices explicitly. Returns MaxIterations when the tolerance is not
// reached; the caller decides whether that means infeasibility.
QpSolution solve_qp(const QpProblem& prob, const QpOptions& opts = {});

}  // namespace esbid
