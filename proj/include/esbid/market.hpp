#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esbid/objective.hpp"

namespace esbid {

struct Line {
  int from = 0;
  int to = 0;
  double b = 0.0;  // susceptance
  double F = 0.0;  // flow capacity, MW
};

struct Network {
  int bus_count = 0;
  int reference_bus = 0;
  std::vector<Line> lines;
};

struct Generator {
  int bus = 0;
  double c = 0.0;  // quadratic cost, $/MW^2 h
  double o = 0.0;  // linear cost, $/MWh
  double P = 0.0;  // capacity, MW
  double K = 0.0;  // ramp limit, MW per period
};

struct StoragePhysical {
  int bus = 0;
  double E_max = 0.0;  // MWh
  double P_max = 0.0;  // MW
  double eta_c = 1.0;
  double eta_d = 1.0;
  double y_init = 0.0;  // MWh, state of charge entering period 1
};

// Periods are one hour, so MW and MWh per period coincide numerically.
struct MarketInstance {
  Network network;
  std::vector<Generator> generators;  // one per bus
  Eigen::MatrixXd loads;              // I x T, MW
  StoragePhysical storage;
  int horizon = 0;  // T

  int bus_count() const { return network.bus_count; }
};

// Capacities the storage owner offers into the market.
struct Bid {
  double e_m = 0.0;  // MWh
  double p_m = 0.0;  // MW
};

// Storage regime for one period inside branch and bound.
enum class PeriodMode : std::uint8_t {
  Free,           // both binaries relaxed: pc, pd >= 0, pc + pd <= p_m
  ChargeOnly,     // discharging excluded: pd = 0, pc in [0, p_m]
  DischargeOnly,  // charging excluded: pc = 0, pd in [0, p_m]
  Off,            // pc = pd = 0
};

struct ClearingOptions {
  double prune_tol = 1e-9;        // bound >= incumbent - prune_tol prunes
  double integrality_tol = 1e-6;  // relative to max(1, p_m)
  double feas_tol = 1e-6;         // post-solve invariant verification, MW
};

struct ClearingResult {
  Eigen::MatrixXd p;        // I x T generation
  Eigen::VectorXd pc, pd;   // T storage charge / discharge
  std::vector<int> zc, zd;  // T, each 0 or 1
  Eigen::VectorXd y;        // T+1 state of charge, y[0] entering period 1
  Eigen::MatrixXd theta;    // I x T bus angles
  Eigen::MatrixXd lambda;   // I x T nodal prices, $/MWh
  double total_cost = 0.0;
  long node_count = 0;      // relaxations solved during branch and bound
};

// Solution of the clearing QP for one storage regime assignment.
struct FixedModeSolution {
  bool feasible = false;
  Eigen::MatrixXd p, theta, lambda;
  Eigen::VectorXd pc, pd, y;
  double objective = 0.0;
  // Binding inequality rows, for active-set stability comparisons. clean is
  // false when some slack falls in the ambiguous band between the binding
  // and nonbinding thresholds.
  std::vector<int> active_ineq;
  bool active_set_clean = true;
};

// Solves the clearing with each period's storage regime given (fixed binaries
// or their relaxation). The lambda matrix holds the duals of the nodal
// balance equalities: lambda[i][t] is the marginal cost of load at (i, t).
FixedModeSolution solve_qp_fixed_binaries(const MarketInstance& instance, const Bid& bid,
                                          const std::vector<PeriodMode>& modes,
                                          const ClearingOptions& opts = {});

// Exact MIQP clearing by best-first branch and bound over the per-period
// charge/discharge binaries. Deterministic, including node_count.
ClearingResult clear_market(const MarketInstance& instance, const Bid& bid,
                            const ClearingOptions& opts = {});

// sum_t lambda[storage bus][t] * (pd[t] - pc[t])
double storage_profit(const ClearingResult& result, const MarketInstance& instance);

// The bidding problem as a minimization: evaluate(x) with x = (e_m, p_m)
// returns the negated storage profit of the induced clearing. Bounds are
// [0, E_max] x [0, P_max]; both capacities must be positive.
Objective bidding_objective(const MarketInstance& instance);

// Structural checks only; never solves. Empty list means valid.
std::vector<std::string> validate_instance(const MarketInstance& instance);

}  // namespace esbid
