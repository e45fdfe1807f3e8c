#include "esbid/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <utility>

#include "esbid/errors.hpp"
#include "esbid/qp.hpp"

namespace esbid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Variable slot: a QP column, or a constant when the box has zero width.
struct Slot {
  int col = -1;
  double fix = 0.0;
  double scale = 1.0;  // natural value = scale * solver value
};

struct RowAccum {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;

  void add(const Slot& s, double coef) {
    if (s.col >= 0)
      terms.emplace_back(s.col, coef);
    else
      rhs -= coef * s.fix;
  }
};

// Clearing QP in solver form plus the bookkeeping needed to reconstruct a
// full solution and read the balance-row duals.
struct BuiltQp {
  QpProblem prob;
  std::vector<Slot> p;      // i * T + t
  std::vector<Slot> pc, pd; // t
  std::vector<Slot> y;      // 0..T, y[0] always fixed to y_init
  std::vector<Slot> theta;  // i * T + t
  int balance_rows = 0;     // first balance_rows equality rows, index t * I + i
};

// Assembles the QP in internally rescaled variables: every boxed column is
// divided by its box width so all boxes become [0, 1], and structural
// inequality rows are normalized by their rhs. Balance rows keep natural
// units so their duals read as prices directly; other equality rows may carry
// an explicit row scale. Slot.scale undoes the column scaling on extraction.
class Assembler {
 public:
  Slot make_col(double lb, double ub) {
    if (lb == ub) return Slot{-1, lb};
    Slot s;
    s.col = static_cast<int>(lb_.size());
    const bool boxed = lb > -kInf && ub < kInf;
    s.scale = boxed ? ub - lb : 1.0;
    lb_.push_back(lb);
    ub_.push_back(ub);
    scale_.push_back(s.scale);
    qdiag_.push_back(0.0);
    lin_.push_back(0.0);
    return s;
  }

  void set_cost(const Slot& s, double quad, double lin) {
    if (s.col < 0) return;  // fixed at 0, contributes no cost
    qdiag_[s.col] = 2.0 * quad;  // objective uses c*p^2, solver uses 0.5 x'Qx
    lin_[s.col] = lin;
  }

  void push_eq(RowAccum r, double row_scale = 1.0) {
    eq_.push_back(std::move(r));
    eq_scale_.push_back(row_scale);
  }
  void push_ineq(RowAccum r) { ineq_.push_back(std::move(r)); }

  int num_cols() const { return static_cast<int>(lb_.size()); }

  QpProblem finish() {
    const int n = num_cols();
    // Column boxes become inequality rows ahead of the structural rows.
    std::vector<RowAccum> rows;
    for (int c = 0; c < n; ++c) {
      const double d = scale_[c];
      if (lb_[c] > -kInf) {
        RowAccum r;
        r.terms.emplace_back(c, -1.0);
        r.rhs = -lb_[c] / d;
        rows.push_back(std::move(r));
      }
      if (ub_[c] < kInf) {
        RowAccum r;
        r.terms.emplace_back(c, 1.0);
        r.rhs = ub_[c] / d;
        rows.push_back(std::move(r));
      }
    }
    for (auto& r : ineq_) {
      for (auto& [c, v] : r.terms) v *= scale_[c];
      const double kappa = std::abs(r.rhs) > 1e-12 ? std::abs(r.rhs) : 1.0;
      for (auto& [c, v] : r.terms) v /= kappa;
      r.rhs /= kappa;
      rows.push_back(std::move(r));
    }

    QpProblem p;
    p.Q = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n; ++c) p.Q(c, c) = qdiag_[c] * scale_[c] * scale_[c];
    p.c = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < n; ++c) p.c[c] = lin_[c] * scale_[c];
    p.A = Eigen::MatrixXd::Zero(static_cast<int>(eq_.size()), n);
    p.b = Eigen::VectorXd::Zero(static_cast<int>(eq_.size()));
    for (std::size_t r = 0; r < eq_.size(); ++r) {
      const double rs = eq_scale_[r];
      for (auto& [c, v] : eq_[r].terms) p.A(static_cast<int>(r), c) += v * scale_[c] * rs;
      p.b[static_cast<int>(r)] = eq_[r].rhs * rs;
    }
    p.G = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), n);
    p.h = Eigen::VectorXd::Zero(static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (auto& [c, v] : rows[r].terms) p.G(static_cast<int>(r), c) += v;
      p.h[static_cast<int>(r)] = rows[r].rhs;
    }
    return p;
  }

 private:
  std::vector<double> lb_, ub_, scale_, qdiag_, lin_;
  std::vector<RowAccum> eq_, ineq_;
  std::vector<double> eq_scale_;
};

BuiltQp build_clearing_qp(const MarketInstance& inst, const Bid& bid,
                          const std::vector<PeriodMode>& modes) {
  const int I = inst.bus_count();
  const int T = inst.horizon;
  const auto& st = inst.storage;
  Assembler as;
  BuiltQp out;

  out.p.resize(I * T);
  for (int i = 0; i < I; ++i) {
    const Generator& g = inst.generators[i];
    for (int t = 0; t < T; ++t) {
      out.p[i * T + t] = as.make_col(0.0, g.P);
      as.set_cost(out.p[i * T + t], g.c, g.o);
    }
  }

  out.pc.resize(T);
  out.pd.resize(T);
  for (int t = 0; t < T; ++t) {
    const PeriodMode m = modes[t];
    const bool charge_allowed = (m == PeriodMode::Free || m == PeriodMode::ChargeOnly);
    const bool discharge_allowed = (m == PeriodMode::Free || m == PeriodMode::DischargeOnly);
    out.pc[t] = as.make_col(0.0, charge_allowed ? bid.p_m : 0.0);
    out.pd[t] = as.make_col(0.0, discharge_allowed ? bid.p_m : 0.0);
  }

  out.y.resize(T + 1);
  out.y[0] = Slot{-1, st.y_init};
  for (int t = 1; t <= T; ++t) out.y[t] = as.make_col(0.0, bid.e_m);

  out.theta.resize(I * T);
  for (int i = 0; i < I; ++i)
    for (int t = 0; t < T; ++t)
      out.theta[i * T + t] =
          (i == inst.network.reference_bus) ? Slot{-1, 0.0} : as.make_col(-kInf, kInf);

  // Nodal balance, row index t * I + i:
  //   p_it - 1{storage bus}(pc_t - pd_t) - sum_k b_ik (theta_i - theta_k) = L_it
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < I; ++i) {
      RowAccum r;
      r.rhs = inst.loads(i, t);
      r.add(out.p[i * T + t], 1.0);
      if (i == st.bus) {
        r.add(out.pc[t], -1.0);
        r.add(out.pd[t], 1.0);
      }
      for (const Line& l : inst.network.lines) {
        if (l.from == i) {
          r.add(out.theta[l.from * T + t], -l.b);
          r.add(out.theta[l.to * T + t], l.b);
        } else if (l.to == i) {
          r.add(out.theta[l.to * T + t], -l.b);
          r.add(out.theta[l.from * T + t], l.b);
        }
      }
      as.push_eq(std::move(r));
    }
  }

  // State of charge: y[t+1] = y[t] + eta_c pc_t - pd_t / eta_d. Row scaled to
  // O(1) coefficients; its dual is never read as a price.
  const double dyn_norm =
      std::max({bid.e_m, st.eta_c * bid.p_m, bid.p_m / st.eta_d, 1e-12});
  for (int t = 0; t < T; ++t) {
    RowAccum r;
    r.add(out.y[t + 1], 1.0);
    r.add(out.y[t], -1.0);
    r.add(out.pc[t], -st.eta_c);
    r.add(out.pd[t], 1.0 / st.eta_d);
    as.push_eq(std::move(r), 1.0 / dyn_norm);
  }

  // Generator ramping between consecutive periods.
  for (int i = 0; i < I; ++i) {
    const Generator& g = inst.generators[i];
    if (g.P == 0.0) continue;
    for (int t = 0; t + 1 < T; ++t) {
      RowAccum up;
      up.add(out.p[i * T + t + 1], 1.0);
      up.add(out.p[i * T + t], -1.0);
      up.rhs += g.K;
      as.push_ineq(std::move(up));
      RowAccum dn;
      dn.add(out.p[i * T + t], 1.0);
      dn.add(out.p[i * T + t + 1], -1.0);
      dn.rhs += g.K;
      as.push_ineq(std::move(dn));
    }
  }

  // With both binaries relaxed, z_c + z_d <= 1 projects to pc + pd <= p_m.
  for (int t = 0; t < T; ++t) {
    if (modes[t] != PeriodMode::Free || bid.p_m == 0.0) continue;
    RowAccum r;
    r.add(out.pc[t], 1.0);
    r.add(out.pd[t], 1.0);
    r.rhs = bid.p_m;
    as.push_ineq(std::move(r));
  }

  // Line flow limits, both directions.
  for (const Line& l : inst.network.lines) {
    for (int t = 0; t < T; ++t) {
      RowAccum fwd;
      fwd.add(out.theta[l.from * T + t], l.b);
      fwd.add(out.theta[l.to * T + t], -l.b);
      fwd.rhs = l.F;
      as.push_ineq(std::move(fwd));
      RowAccum bwd;
      bwd.add(out.theta[l.from * T + t], -l.b);
      bwd.add(out.theta[l.to * T + t], l.b);
      bwd.rhs = l.F;
      as.push_ineq(std::move(bwd));
    }
  }

  out.balance_rows = I * T;
  out.prob = as.finish();
  return out;
}

// Phase-1 probe used when the main solve stalls: minimize total load shed
// over elastic copies of the balance rows. Zero optimum means the original
// problem is feasible and the stall was numerical.
bool elastic_says_feasible(const BuiltQp& built) {
  const int n = built.prob.num_vars();
  const int me = built.prob.num_eq();
  const int mi = built.prob.num_ineq();
  const int nb = built.balance_rows;
  const int ne = n + 2 * nb;

  QpProblem e;
  e.Q = Eigen::MatrixXd::Zero(ne, ne);
  e.c = Eigen::VectorXd::Zero(ne);
  e.c.tail(2 * nb).setOnes();
  e.A = Eigen::MatrixXd::Zero(me, ne);
  e.A.leftCols(n) = built.prob.A;
  for (int r = 0; r < nb; ++r) {
    e.A(r, n + 2 * r) = 1.0;
    e.A(r, n + 2 * r + 1) = -1.0;
  }
  e.b = built.prob.b;
  e.G = Eigen::MatrixXd::Zero(mi + 2 * nb, ne);
  e.G.topLeftCorner(mi, n) = built.prob.G;
  for (int r = 0; r < 2 * nb; ++r) e.G(mi + r, n + r) = -1.0;
  e.h = Eigen::VectorXd::Zero(mi + 2 * nb);
  e.h.head(mi) = built.prob.h;

  const QpSolution sol = solve_qp(e, QpOptions{300, 1e-10});
  if (sol.status != QpStatus::Optimal)
    throw NumericalError("market: feasibility probe did not converge");
  return sol.objective <= 1e-6;
}

struct SolveOutcome {
  bool feasible = false;
  QpSolution sol;
};

SolveOutcome solve_built(const BuiltQp& built) {
  SolveOutcome out;
  out.sol = solve_qp(built.prob, QpOptions{200, 1e-10});
  if (out.sol.status == QpStatus::Optimal) {
    out.feasible = true;
    return out;
  }
  if (elastic_says_feasible(built)) {
    out.sol = solve_qp(built.prob, QpOptions{500, 1e-10});
    if (out.sol.status != QpStatus::Optimal)
      throw NumericalError("market: clearing qp did not converge on a feasible problem");
    out.feasible = true;
  }
  return out;
}

double slot_value(const Slot& s, const Eigen::VectorXd& x) {
  return s.col >= 0 ? s.scale * x[s.col] : s.fix;
}

FixedModeSolution extract_solution(const MarketInstance& inst, const BuiltQp& built,
                                   const QpSolution& sol) {
  const int I = inst.bus_count();
  const int T = inst.horizon;
  FixedModeSolution r;
  r.feasible = true;
  r.objective = sol.objective;
  r.p.resize(I, T);
  r.theta.resize(I, T);
  r.lambda.resize(I, T);
  r.pc.resize(T);
  r.pd.resize(T);
  r.y.resize(T + 1);
  for (int i = 0; i < I; ++i)
    for (int t = 0; t < T; ++t) {
      r.p(i, t) = slot_value(built.p[i * T + t], sol.x);
      r.theta(i, t) = slot_value(built.theta[i * T + t], sol.x);
      r.lambda(i, t) = sol.eq_duals[t * I + i];
    }
  for (int t = 0; t < T; ++t) {
    r.pc[t] = slot_value(built.pc[t], sol.x);
    r.pd[t] = slot_value(built.pd[t], sol.x);
  }
  for (int t = 0; t <= T; ++t) r.y[t] = slot_value(built.y[t], sol.x);

  // Active set classification with an ambiguity band between thresholds.
  for (int k = 0; k < sol.slacks.size(); ++k) {
    const double rel = sol.slacks[k] / (1.0 + std::abs(built.prob.h[k]));
    if (rel <= 1e-7)
      r.active_ineq.push_back(k);
    else if (rel < 1e-5)
      r.active_set_clean = false;
  }
  return r;
}

void check_bid(const MarketInstance& inst, const Bid& bid) {
  const double etol = 1e-9 * (1.0 + inst.storage.E_max);
  const double ptol = 1e-9 * (1.0 + inst.storage.P_max);
  if (bid.e_m < -etol || bid.e_m > inst.storage.E_max + etol)
    throw UsageError("bid: e_m outside [0, E_max]");
  if (bid.p_m < -ptol || bid.p_m > inst.storage.P_max + ptol)
    throw UsageError("bid: p_m outside [0, P_max]");
}

Bid clamp_bid(const MarketInstance& inst, const Bid& bid) {
  return Bid{std::clamp(bid.e_m, 0.0, inst.storage.E_max),
             std::clamp(bid.p_m, 0.0, inst.storage.P_max)};
}

void verify_clearing(const MarketInstance& inst, const Bid& bid, const ClearingResult& r,
                     const ClearingOptions& opts) {
  const int I = inst.bus_count();
  const int T = inst.horizon;
  const auto& st = inst.storage;
  const double tol = opts.feas_tol;
  auto fail = [](const std::string& what) {
    throw NumericalError("clearing verification failed: " + what);
  };

  // Tolerances are relative to each constraint's own scale.
  const double tol_s = tol * (1.0 + bid.p_m);
  const double tol_y = tol * (1.0 + bid.e_m + bid.p_m);
  for (int t = 0; t < T; ++t) {
    if (std::min(r.pc[t], r.pd[t]) > tol_s) fail("simultaneous charge and discharge");
    if (r.pc[t] < -tol_s || r.pc[t] > r.zc[t] * bid.p_m + tol_s) fail("charge outside binary box");
    if (r.pd[t] < -tol_s || r.pd[t] > r.zd[t] * bid.p_m + tol_s)
      fail("discharge outside binary box");
    if (r.zc[t] + r.zd[t] > 1) fail("both binaries set");
    const double ynext = r.y[t] + st.eta_c * r.pc[t] - r.pd[t] / st.eta_d;
    if (std::abs(r.y[t + 1] - ynext) > tol_y) fail("state-of-charge dynamics");
  }
  for (int t = 0; t <= T; ++t)
    if (r.y[t] < -tol_y || r.y[t] > bid.e_m + tol_y) fail("state of charge outside [0, e_m]");

  for (int i = 0; i < I; ++i) {
    const Generator& g = inst.generators[i];
    const double tol_p = tol * (1.0 + g.P);
    for (int t = 0; t < T; ++t) {
      if (r.p(i, t) < -tol_p || r.p(i, t) > g.P + tol_p) fail("generation outside capacity");
      if (t + 1 < T && std::abs(r.p(i, t + 1) - r.p(i, t)) > g.K + tol * (1.0 + g.K))
        fail("ramp violated");
    }
  }
  for (const Line& l : inst.network.lines)
    for (int t = 0; t < T; ++t)
      if (std::abs(l.b * (r.theta(l.from, t) - r.theta(l.to, t))) > l.F + tol * (1.0 + l.F))
        fail("line flow above capacity");
  for (int t = 0; t < T; ++t)
    if (r.theta(inst.network.reference_bus, t) != 0.0) fail("reference angle not zero");

  double cost = 0.0;
  for (int i = 0; i < I; ++i)
    for (int t = 0; t < T; ++t) {
      const Generator& g = inst.generators[i];
      cost += g.c * r.p(i, t) * r.p(i, t) + g.o * r.p(i, t);
      double bal = r.p(i, t);
      if (i == st.bus) bal += r.pd[t] - r.pc[t];
      for (const Line& l : inst.network.lines) {
        if (l.from == i) bal -= l.b * (r.theta(l.from, t) - r.theta(l.to, t));
        if (l.to == i) bal -= l.b * (r.theta(l.to, t) - r.theta(l.from, t));
      }
      if (std::abs(bal - inst.loads(i, t)) > tol * (1.0 + std::abs(inst.loads(i, t)) + bid.p_m))
        fail("nodal balance");
    }
  if (std::abs(cost - r.total_cost) > 1e-6 * (1.0 + std::abs(cost)))
    fail("objective value inconsistent with dispatch");
}

}  // namespace

FixedModeSolution solve_qp_fixed_binaries(const MarketInstance& inst, const Bid& bid_in,
                                          const std::vector<PeriodMode>& modes,
                                          const ClearingOptions&) {
  if (static_cast<int>(modes.size()) != inst.horizon)
    throw UsageError("solve_qp_fixed_binaries: one mode per period required");
  check_bid(inst, bid_in);
  const Bid bid = clamp_bid(inst, bid_in);
  if (inst.storage.y_init > bid.e_m + 1e-12) return FixedModeSolution{};  // infeasible

  const BuiltQp built = build_clearing_qp(inst, bid, modes);
  const SolveOutcome o = solve_built(built);
  if (!o.feasible) return FixedModeSolution{};
  return extract_solution(inst, built, o.sol);
}

ClearingResult clear_market(const MarketInstance& inst, const Bid& bid_in,
                            const ClearingOptions& opts) {
  {
    const auto violations = validate_instance(inst);
    if (!violations.empty()) throw ConfigError("clear_market: invalid instance: " + violations[0]);
  }
  check_bid(inst, bid_in);
  const Bid bid = clamp_bid(inst, bid_in);
  const int T = inst.horizon;

  if (inst.storage.y_init > bid.e_m + 1e-12)
    throw InfeasibleError("clearing infeasible: initial state of charge " +
                          std::to_string(inst.storage.y_init) + " MWh exceeds offered capacity " +
                          std::to_string(bid.e_m) + " MWh");
  double cap = 0.0;
  for (const auto& g : inst.generators) cap += g.P;
  for (int t = 0; t < T; ++t) {
    const double load = inst.loads.col(t).sum();
    if (load > cap + bid.p_m + 1e-9)
      throw InfeasibleError("clearing infeasible: period " + std::to_string(t + 1) + " load " +
                            std::to_string(load) + " MW exceeds available capacity " +
                            std::to_string(cap + bid.p_m) + " MW");
  }

  const double int_tol = opts.integrality_tol * std::max(1.0, bid.p_m);

  struct Node {
    double bound;
    long id;
    std::vector<PeriodMode> modes;
    FixedModeSolution rel;
  };
  auto later = [](const Node& a, const Node& b) {
    return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
  };
  std::priority_queue<Node, std::vector<Node>, decltype(later)> queue(later);

  long next_id = 0;
  long node_count = 0;
  auto solve_node = [&](std::vector<PeriodMode> modes) -> std::optional<Node> {
    const BuiltQp built = build_clearing_qp(inst, bid, modes);
    const SolveOutcome o = solve_built(built);
    ++node_count;
    if (!o.feasible) return std::nullopt;
    Node n{o.sol.objective, next_id++, std::move(modes), extract_solution(inst, built, o.sol)};
    return n;
  };

  {
    auto root = solve_node(std::vector<PeriodMode>(T, PeriodMode::Free));
    if (!root)
      throw InfeasibleError("clearing infeasible: no dispatch satisfies the network constraints");
    queue.push(std::move(*root));
  }

  bool have_incumbent = false;
  double best_obj = kInf;
  FixedModeSolution best_sol;

  auto branch_on = [&](const Node& node, int t, bool charge_side) {
    std::vector<PeriodMode> m0 = node.modes;
    m0[t] = charge_side ? PeriodMode::DischargeOnly : PeriodMode::ChargeOnly;  // binary = 0
    if (auto child = solve_node(std::move(m0))) queue.push(std::move(*child));
    std::vector<PeriodMode> m1 = node.modes;
    m1[t] = charge_side ? PeriodMode::ChargeOnly : PeriodMode::DischargeOnly;  // binary = 1
    if (auto child = solve_node(std::move(m1))) queue.push(std::move(*child));
  };

  while (!queue.empty()) {
    Node node = queue.top();
    queue.pop();
    if (have_incumbent && node.bound >= best_obj - opts.prune_tol) continue;

    // Most fractional implied binary among periods charging and discharging
    // at once; ties resolve to the earliest period, charge before discharge.
    int branch_t = -1;
    bool branch_charge = true;
    double branch_frac = -1.0;
    for (int t = 0; t < T; ++t) {
      if (node.modes[t] != PeriodMode::Free) continue;
      if (std::min(node.rel.pc[t], node.rel.pd[t]) <= int_tol) continue;
      const double fc = std::min(node.rel.pc[t] / bid.p_m, 1.0 - node.rel.pc[t] / bid.p_m);
      const double fd = std::min(node.rel.pd[t] / bid.p_m, 1.0 - node.rel.pd[t] / bid.p_m);
      if (fc > branch_frac) {
        branch_frac = fc;
        branch_t = t;
        branch_charge = true;
      }
      if (fd > branch_frac) {
        branch_frac = fd;
        branch_t = t;
        branch_charge = false;
      }
    }

    if (branch_t >= 0) {
      branch_on(node, branch_t, branch_charge);
      continue;
    }

    // Integral relaxation: fix every remaining Free period to the side it
    // uses and re-solve exactly for the incumbent.
    std::vector<PeriodMode> fixed = node.modes;
    for (int t = 0; t < T; ++t)
      if (fixed[t] == PeriodMode::Free)
        fixed[t] = node.rel.pd[t] > int_tol ? PeriodMode::DischargeOnly : PeriodMode::ChargeOnly;
    const BuiltQp built = build_clearing_qp(inst, bid, fixed);
    const SolveOutcome o = solve_built(built);
    if (!o.feasible) {
      // Rounding the near-zero side off lost feasibility; branch instead.
      int t_max = -1;
      double v = -1.0;
      for (int t = 0; t < T; ++t)
        if (node.modes[t] == PeriodMode::Free && std::min(node.rel.pc[t], node.rel.pd[t]) > v) {
          v = std::min(node.rel.pc[t], node.rel.pd[t]);
          t_max = t;
        }
      if (t_max < 0)
        throw NumericalError("clear_market: fully fixed node lost feasibility");
      branch_on(node, t_max, true);
      continue;
    }
    const FixedModeSolution cand = extract_solution(inst, built, o.sol);
    if (!have_incumbent || cand.objective < best_obj) {
      have_incumbent = true;
      best_obj = cand.objective;
      best_sol = cand;
    }
  }

  if (!have_incumbent)
    throw NumericalError("clear_market: branch and bound terminated without an incumbent");

  ClearingResult res;
  res.p = best_sol.p;
  res.pc = best_sol.pc;
  res.pd = best_sol.pd;
  res.theta = best_sol.theta;
  res.lambda = best_sol.lambda;
  res.y = best_sol.y;
  res.total_cost = best_sol.objective;
  res.node_count = node_count;
  res.zc.resize(T);
  res.zd.resize(T);
  // Threshold matches the verification tolerance so a declared-off period
  // never carries more charge than verification accepts.
  const double on_tol = opts.feas_tol * (1.0 + bid.p_m);
  for (int t = 0; t < T; ++t) {
    res.zc[t] = best_sol.pc[t] > on_tol ? 1 : 0;
    res.zd[t] = best_sol.pd[t] > on_tol ? 1 : 0;
  }
  verify_clearing(inst, bid, res, opts);
  return res;
}

double storage_profit(const ClearingResult& r, const MarketInstance& inst) {
  double profit = 0.0;
  for (int t = 0; t < inst.horizon; ++t)
    profit += r.lambda(inst.storage.bus, t) * (r.pd[t] - r.pc[t]);
  return profit;
}

Objective bidding_objective(const MarketInstance& inst) {
  {
    const auto violations = validate_instance(inst);
    if (!violations.empty())
      throw ConfigError("bidding_objective: invalid instance: " + violations[0]);
  }
  if (!(inst.storage.E_max > 0.0) || !(inst.storage.P_max > 0.0))
    throw ConfigError("bidding_objective: storage capacities must be positive to define the bid box");

  Objective obj;
  obj.bounds.lower = Eigen::Vector2d(0.0, 0.0);
  obj.bounds.upper = Eigen::Vector2d(inst.storage.E_max, inst.storage.P_max);
  obj.reentrant = true;
  obj.evaluate = [inst](const Eigen::VectorXd& x) {
    if (x.size() != 2) throw UsageError("bidding objective expects x = (e_m, p_m)");
    const ClearingResult r = clear_market(inst, Bid{x[0], x[1]});
    return -storage_profit(r, inst);
  };
  return obj;
}

std::vector<std::string> validate_instance(const MarketInstance& inst) {
  std::vector<std::string> v;
  const int I = inst.bus_count();
  const int T = inst.horizon;
  if (I < 1) v.push_back("network: at least one bus required");
  if (T < 1) v.push_back("horizon: at least one period required");
  if (I < 1 || T < 1) return v;

  if (inst.network.reference_bus < 0 || inst.network.reference_bus >= I)
    v.push_back("network: reference_bus out of range");
  for (std::size_t k = 0; k < inst.network.lines.size(); ++k) {
    const Line& l = inst.network.lines[k];
    const std::string tag = "line " + std::to_string(k) + ": ";
    if (l.from < 0 || l.from >= I || l.to < 0 || l.to >= I)
      v.push_back(tag + "endpoint out of range");
    else if (l.from == l.to)
      v.push_back(tag + "self-loop");
    if (!(l.b > 0.0)) v.push_back(tag + "susceptance must be positive");
    if (!(l.F > 0.0)) v.push_back(tag + "flow capacity must be positive");
  }

  // Connectivity over valid lines.
  {
    std::vector<std::vector<int>> adj(I);
    for (const Line& l : inst.network.lines)
      if (l.from >= 0 && l.from < I && l.to >= 0 && l.to < I && l.from != l.to) {
        adj[l.from].push_back(l.to);
        adj[l.to].push_back(l.from);
      }
    std::vector<bool> seen(I, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int k : adj[i])
        if (!seen[k]) {
          seen[k] = true;
          stack.push_back(k);
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      v.push_back("network: graph is not connected");
  }

  if (static_cast<int>(inst.generators.size()) != I) {
    v.push_back("generators: exactly one per bus required (use P = 0 for buses without generation)");
  } else {
    std::set<int> buses;
    for (std::size_t k = 0; k < inst.generators.size(); ++k) {
      const Generator& g = inst.generators[k];
      const std::string tag = "generator " + std::to_string(k) + ": ";
      if (g.bus < 0 || g.bus >= I) v.push_back(tag + "bus out of range");
      else if (g.bus != static_cast<int>(k))
        v.push_back(tag + "must be listed at the position equal to its bus index");
      if (!buses.insert(g.bus).second) v.push_back(tag + "duplicate bus");
      if (g.c < 0.0) v.push_back(tag + "quadratic cost must be nonnegative");
      if (g.P < 0.0) v.push_back(tag + "capacity must be nonnegative");
      if (!(g.K > 0.0)) v.push_back(tag + "ramp limit must be positive");
    }
  }

  if (inst.loads.rows() != I || inst.loads.cols() != T)
    v.push_back("loads: dimensions must be bus count x horizon (" + std::to_string(I) + " x " +
                std::to_string(T) + ")");
  else
    for (int i = 0; i < I; ++i)
      for (int t = 0; t < T; ++t)
        if (inst.loads(i, t) < 0.0) {
          v.push_back("loads: negative load at bus " + std::to_string(i) + ", period " +
                      std::to_string(t + 1));
          i = I;  // report once
          break;
        }

  const auto& st = inst.storage;
  if (st.bus < 0 || st.bus >= I) v.push_back("storage: bus out of range");
  if (st.E_max < 0.0) v.push_back("storage: E_max must be nonnegative");
  if (st.P_max < 0.0) v.push_back("storage: P_max must be nonnegative");
  if (!(st.eta_c > 0.0) || st.eta_c > 1.0) v.push_back("storage: eta_c must lie in (0, 1]");
  if (!(st.eta_d > 0.0) || st.eta_d > 1.0) v.push_back("storage: eta_d must lie in (0, 1]");
  if (st.y_init < 0.0 || st.y_init > st.E_max)
    v.push_back("storage: y_init must lie in [0, E_max]");

  if (inst.loads.rows() == I && inst.loads.cols() == T &&
      static_cast<int>(inst.generators.size()) == I) {
    double cap = 0.0;
    for (const auto& g : inst.generators) cap += g.P;
    for (int t = 0; t < T; ++t)
      if (inst.loads.col(t).sum() > cap + st.P_max) {
        v.push_back("screening: period " + std::to_string(t + 1) +
                    " load exceeds total generation capacity plus storage P_max");
        break;
      }
  }
  return v;
}

}  // namespace esbid
