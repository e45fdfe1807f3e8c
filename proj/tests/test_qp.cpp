#include <cmath>

#include <doctest.h>

#include "esbid/errors.hpp"
#include "esbid/qp.hpp"
#include "esbid/rng.hpp"

using namespace esbid;

namespace {

QpProblem empty_problem(int n) {
  QpProblem p;
  p.Q = Eigen::MatrixXd::Zero(n, n);
  p.c = Eigen::VectorXd::Zero(n);
  p.A = Eigen::MatrixXd::Zero(0, n);
  p.b = Eigen::VectorXd::Zero(0);
  p.G = Eigen::MatrixXd::Zero(0, n);
  p.h = Eigen::VectorXd::Zero(0);
  return p;
}

// max over stationarity, primal feasibility and complementarity, all scaled.
double recomputed_kkt(const QpProblem& p, const QpSolution& s) {
  Eigen::VectorXd r_d = p.Q * s.x + p.c;
  if (p.num_eq() > 0) r_d -= p.A.transpose() * s.eq_duals;
  if (p.num_ineq() > 0) r_d += p.G.transpose() * s.ineq_duals;
  double worst = r_d.cwiseAbs().maxCoeff() / (1.0 + p.c.cwiseAbs().maxCoeff());
  if (p.num_eq() > 0)
    worst = std::max(worst, (p.A * s.x - p.b).cwiseAbs().maxCoeff() /
                                (1.0 + p.b.cwiseAbs().maxCoeff()));
  if (p.num_ineq() > 0) {
    const Eigen::VectorXd viol = (p.G * s.x - p.h).cwiseMax(0.0);
    worst = std::max(worst, viol.maxCoeff() / (1.0 + p.h.cwiseAbs().maxCoeff()));
    for (int i = 0; i < p.num_ineq(); ++i)
      worst = std::max(worst, std::abs(s.ineq_duals[i] * s.slacks[i]) /
                                  (1.0 + std::abs(s.objective)));
  }
  return worst;
}

}  // namespace

TEST_CASE("unconstrained quadratic solves to the stationary point") {
  QpProblem p = empty_problem(2);
  p.Q << 2.0, 0.0, 0.0, 4.0;
  p.c << -2.0, -8.0;
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.x[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.objective == doctest::Approx(-9.0).epsilon(1e-9));
}

TEST_CASE("equality constraint shifts the optimum and prices the right-hand side") {
  // minimize x^2 subject to x = 3; optimal value 9, d(opt)/db = 2b = 6.
  QpProblem p = empty_problem(1);
  p.Q << 2.0;
  p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.b = Eigen::VectorXd::Constant(1, 3.0);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(s.objective == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(s.eq_duals[0] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("active box constraint carries its multiplier") {
  // minimize (x-2)^2 subject to x <= 1: optimum at the bound with z = 2.
  QpProblem p = empty_problem(1);
  p.Q << 2.0;
  p.c << -4.0;
  p.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.h = Eigen::VectorXd::Constant(1, 1.0);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(-3.0).epsilon(1e-7));
  CHECK(s.ineq_duals[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.slacks[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
}

TEST_CASE("linear objective over an interval lands on the priced vertex") {
  // minimize -x subject to x <= 5, -x <= 0.
  QpProblem p = empty_problem(1);
  p.c << -1.0;
  p.G = Eigen::MatrixXd(2, 1);
  p.G << 1.0, -1.0;
  p.h = Eigen::VectorXd(2);
  p.h << 5.0, 0.0;
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(-5.0).epsilon(1e-7));
  CHECK(s.ineq_duals[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(s.ineq_duals[1]) < 1e-6);
}

TEST_CASE("mixed constraints match the hand-solved optimum") {
  // minimize x^2 + y^2 subject to x + y = 2, x <= 0.5.
  QpProblem p = empty_problem(2);
  p.Q << 2.0, 0.0, 0.0, 2.0;
  p.A = Eigen::MatrixXd(1, 2);
  p.A << 1.0, 1.0;
  p.b = Eigen::VectorXd::Constant(1, 2.0);
  p.G = Eigen::MatrixXd(1, 2);
  p.G << 1.0, 0.0;
  p.h = Eigen::VectorXd::Constant(1, 0.5);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(s.x[1] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(s.objective == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(s.eq_duals[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(s.ineq_duals[0] == doctest::Approx(2.0).epsilon(1e-6));

  SUBCASE("duals equal finite differences of the optimal value") {
    const double delta = 1e-5;
    auto value_at = [&](double b0, double h0) {
      QpProblem q = p;
      q.b[0] = b0;
      q.h[0] = h0;
      const QpSolution r = solve_qp(q);
      REQUIRE(r.status == QpStatus::Optimal);
      return r.objective;
    };
    const double db = (value_at(2.0 + delta, 0.5) - value_at(2.0 - delta, 0.5)) / (2 * delta);
    CHECK(db == doctest::Approx(s.eq_duals[0]).epsilon(1e-4));
    const double dh = (value_at(2.0, 0.5 + delta) - value_at(2.0, 0.5 - delta)) / (2 * delta);
    CHECK(dh == doctest::Approx(-s.ineq_duals[0]).epsilon(1e-4));
  }
}

TEST_CASE("random feasible programs solve to tight KKT residuals") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const int me = 1 + static_cast<int>(rng.below(2));
    const int mi = 2 + static_cast<int>(rng.below(6));

    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
    QpProblem p = empty_problem(n);
    p.Q = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) p.c[i] = rng.uniform(-2.0, 2.0);

    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = rng.uniform(-1.0, 1.0);

    p.A = Eigen::MatrixXd(me, n);
    for (int i = 0; i < me; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = rng.uniform(-1.0, 1.0);
    p.b = p.A * x0;

    p.G = Eigen::MatrixXd(mi, n);
    for (int i = 0; i < mi; ++i)
      for (int j = 0; j < n; ++j) p.G(i, j) = rng.uniform(-1.0, 1.0);
    p.h = p.G * x0;
    for (int i = 0; i < mi; ++i) p.h[i] += rng.uniform(0.1, 1.0);  // x0 strictly feasible

    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::Optimal);
    CHECK(s.kkt_residual <= 1e-8);
    CHECK(recomputed_kkt(p, s) <= 1e-6);
    CHECK(s.ineq_duals.minCoeff() >= -1e-9);
    CHECK(s.slacks.minCoeff() >= -1e-7);
  }
}

TEST_CASE("contradictory constraints do not come back optimal") {
  // x = 1 conflicts with x <= 0.
  QpProblem p = empty_problem(1);
  p.Q << 2.0;
  p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  p.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.h = Eigen::VectorXd::Constant(1, 0.0);
  CHECK(solve_qp(p).status == QpStatus::MaxIterations);

  // x <= 0 conflicts with x >= 1.
  QpProblem q = empty_problem(1);
  q.Q << 2.0;
  q.G = Eigen::MatrixXd(2, 1);
  q.G << 1.0, -1.0;
  q.h = Eigen::VectorXd(2);
  q.h << 0.0, -1.0;
  CHECK(solve_qp(q).status == QpStatus::MaxIterations);
}

TEST_CASE("shape validation rejects inconsistent inputs") {
  QpProblem p = empty_problem(2);
  p.Q = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(solve_qp(p), UsageError);

  p = empty_problem(2);
  p.A = Eigen::MatrixXd::Zero(1, 3);
  p.b = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(solve_qp(p), UsageError);

  p = empty_problem(2);
  p.G = Eigen::MatrixXd::Zero(2, 2);
  p.h = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(solve_qp(p), UsageError);

  CHECK_THROWS_AS(solve_qp(empty_problem(0)), UsageError);
}
