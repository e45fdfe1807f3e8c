#include "esbid/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esbid/errors.hpp"

namespace esbid {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

void check_shapes(const QpProblem& p) {
  const int n = p.num_vars();
  if (p.Q.rows() != n || p.Q.cols() != n) throw UsageError("solve_qp: Q must be n x n");
  if (p.A.rows() != p.num_eq() || (p.num_eq() > 0 && p.A.cols() != n))
    throw UsageError("solve_qp: A/b shapes inconsistent");
  if (p.G.rows() != p.num_ineq() || (p.num_ineq() > 0 && p.G.cols() != n))
    throw UsageError("solve_qp: G/h shapes inconsistent");
  if (n == 0) throw UsageError("solve_qp: no variables");
}

// Largest alpha in (0, 1] with v + alpha*dv >= (1-frac)*v componentwise.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double frac) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -frac * v[i] / dv[i]);
  }
  return alpha;
}

// Equality-constrained case: a single saddle-point solve.
QpSolution solve_equality_only(const QpProblem& p, const QpOptions& opts) {
  const int n = p.num_vars();
  const int me = p.num_eq();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + me, n + me);
  K.topLeftCorner(n, n) = p.Q;
  if (me > 0) {
    K.topRightCorner(n, me) = p.A.transpose();
    K.bottomLeftCorner(me, n) = p.A;
  }
  Eigen::VectorXd rhs(n + me);
  rhs.head(n) = -p.c;
  if (me > 0) rhs.tail(me) = p.b;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::VectorXd sol = lu.solve(rhs);

  QpSolution out;
  out.x = sol.head(n);
  out.eq_duals = -sol.tail(me);
  out.ineq_duals = Eigen::VectorXd();
  out.slacks = Eigen::VectorXd();
  out.objective = 0.5 * out.x.dot(p.Q * out.x) + p.c.dot(out.x);
  out.iterations = 1;

  Eigen::VectorXd r_d = p.Q * out.x + p.c;
  if (me > 0) r_d -= p.A.transpose() * out.eq_duals;
  const double scale_d = 1.0 + inf_norm(p.c);
  const double rel_d = inf_norm(r_d) / scale_d;
  double rel_p = 0.0;
  if (me > 0) rel_p = inf_norm(p.A * out.x - p.b) / (1.0 + inf_norm(p.b));
  out.kkt_residual = std::max(rel_d, rel_p);
  out.status = out.kkt_residual <= std::max(opts.tol, 1e-8) ? QpStatus::Optimal
                                                            : QpStatus::MaxIterations;
  return out;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpOptions& opts) {
  check_shapes(p);
  const int n = p.num_vars();
  const int me = p.num_eq();
  const int mi = p.num_ineq();

  if (mi == 0) return solve_equality_only(p, opts);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
  Eigen::VectorXd s(mi), z(mi);
  for (int i = 0; i < mi; ++i) {
    s[i] = std::max(1.0, p.h[i]);
    z[i] = 1.0;
  }

  const double scale_d = 1.0 + inf_norm(p.c);
  const double scale_b = 1.0 + inf_norm(p.b);
  const double scale_h = 1.0 + inf_norm(p.h);
  constexpr double kReg = 1e-12;

  QpSolution out;
  const int kkt_dim = n + me;
  Eigen::MatrixXd K(kkt_dim, kkt_dim);
  Eigen::VectorXd rhs(kkt_dim);

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    Eigen::VectorXd r_d = p.Q * x + p.c + p.G.transpose() * z;
    if (me > 0) r_d += p.A.transpose() * y;
    Eigen::VectorXd r_p = me > 0 ? Eigen::VectorXd(p.A * x - p.b) : Eigen::VectorXd();
    Eigen::VectorXd r_g = p.G * x + s - p.h;

    const double mu = s.dot(z) / mi;
    const double obj = 0.5 * x.dot(p.Q * x) + p.c.dot(x);
    const double rel_d = inf_norm(r_d) / scale_d;
    const double rel_p = me > 0 ? inf_norm(r_p) / scale_b : 0.0;
    const double rel_g = inf_norm(r_g) / scale_h;
    const double rel_mu = mu / (1.0 + std::abs(obj));
    const double kkt = std::max({rel_d, rel_p, rel_g, rel_mu});

    out.kkt_residual = kkt;
    if (!std::isfinite(kkt)) break;
    if (kkt <= opts.tol) {
      out.status = QpStatus::Optimal;
      break;
    }
    // Complementarity converged but feasibility stuck: no progress possible.
    if (rel_mu < 1e-13 && std::max(rel_p, rel_g) > 1e-7 && iter > 20) break;

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    K.setZero();
    K.topLeftCorner(n, n) = p.Q + p.G.transpose() * w.asDiagonal() * p.G;
    K.topLeftCorner(n, n).diagonal().array() += kReg;
    if (me > 0) {
      K.topRightCorner(n, me) = p.A.transpose();
      K.bottomLeftCorner(me, n) = p.A;
      K.bottomRightCorner(me, me).diagonal().array() -= kReg;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> plu(K);
    Eigen::FullPivLU<Eigen::MatrixXd> flu;
    bool use_full = false;

    auto kkt_solve = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd step = use_full ? Eigen::VectorXd(flu.solve(r)) : Eigen::VectorXd(plu.solve(r));
      Eigen::VectorXd resid = r - K * step;
      step += use_full ? Eigen::VectorXd(flu.solve(resid)) : Eigen::VectorXd(plu.solve(resid));
      if (!use_full) {
        resid = r - K * step;
        if (!(resid.norm() <= 1e-8 * (1.0 + r.norm()))) {
          flu.compute(K);
          use_full = true;
          step = flu.solve(r);
          resid = r - K * step;
          step += flu.solve(resid);
        }
      }
      return step;
    };

    auto solve_direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx,
                               Eigen::VectorXd& dy, Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      const Eigen::VectorXd t = (rc + z.cwiseProduct(r_g)).cwiseQuotient(s);
      rhs.head(n) = -r_d - p.G.transpose() * t;
      if (me > 0) rhs.tail(me) = -r_p;
      const Eigen::VectorXd step = kkt_solve(rhs);
      dx = step.head(n);
      dy = me > 0 ? Eigen::VectorXd(step.tail(me)) : Eigen::VectorXd();
      ds = -r_g - p.G * dx;
      dz = (rc - z.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dx_a, dy_a, ds_a, dz_a;
    solve_direction(-s.cwiseProduct(z), dx_a, dy_a, ds_a, dz_a);

    const double ap_a = max_step(s, ds_a, 1.0);
    const double ad_a = max_step(z, dz_a, 1.0);
    const double mu_aff = (s + ap_a * ds_a).dot(z + ad_a * dz_a) / mi;
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    const Eigen::VectorXd rc_combined =
        -s.cwiseProduct(z) - ds_a.cwiseProduct(dz_a) + Eigen::VectorXd::Constant(mi, sigma * mu);
    Eigen::VectorXd dx, dy, ds, dz;
    solve_direction(rc_combined, dx, dy, ds, dz);

    const double ap = std::min(1.0, max_step(s, ds, 0.995));
    const double ad = std::min(1.0, max_step(z, dz, 0.995));

    x += ap * dx;
    s += ap * ds;
    if (me > 0) y += ad * dy;
    z += ad * dz;
  }

  out.x = x;
  out.eq_duals = -y;
  out.ineq_duals = z;
  out.slacks = s;
  out.objective = 0.5 * x.dot(p.Q * x) + p.c.dot(x);
  out.iterations = iter;
  if (out.status != QpStatus::Optimal) {
    // The loop may have stepped after the last residual evaluation.
    Eigen::VectorXd r_d = p.Q * x + p.c + p.G.transpose() * z;
    if (me > 0) r_d += p.A.transpose() * y;
    const double rel_d = inf_norm(r_d) / scale_d;
    const double rel_p = me > 0 ? inf_norm(p.A * x - p.b) / scale_b : 0.0;
    const double rel_g = inf_norm(p.G * x + s - p.h) / scale_h;
    const double rel_mu = (s.dot(z) / mi) / (1.0 + std::abs(out.objective));
    const double kkt = std::max({rel_d, rel_p, rel_g, rel_mu});
    if (std::isfinite(kkt)) out.kkt_residual = kkt;
    if (std::isfinite(kkt) && kkt <= std::max(opts.tol, 1e-8)) out.status = QpStatus::Optimal;
  }
  return out;
}

}  // namespace esbid
