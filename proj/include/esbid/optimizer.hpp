#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esbid/entropy.hpp"
#include "esbid/errors.hpp"
#include "esbid/kriging.hpp"
#include "esbid/objective.hpp"

namespace esbid {

struct InnerSearchConfig {
  int n_starts = 20;
  int max_iters = 200;       // poll rounds per start
  double init_step = 0.25;   // in unit-scaled space
  double shrink = 0.5;
  double min_step = 1e-6;

  void validate() const;
};

struct OptimizerConfig {
  int n_init = 0;  // 0 = auto: max(2(d+1), 10)
  int n_max = 100;
  KernelHyper hyper;      // empty vectors = defaults (upsilon 1, w 1.5)
  EntropyConfig entropy;
  std::uint64_t seed = 0;
  InnerSearchConfig inner;
  double dup_tol = 1e-6;  // scaled space
};

struct TraceRecord {
  int iter = 0;  // 1-based evaluation index
  Eigen::VectorXd x;
  double f = 0.0;
  double best_f = 0.0;  // running minimum
  double ms = 0.0;      // wall clock since run start
};

struct RunTrace {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
};

struct RunResult {
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  RunTrace trace;
  double wall_ms = 0.0;
};

// Objective evaluation threw; carries the failing point and the evaluations
// completed before the failure.
struct EvaluationError : std::runtime_error {
  EvaluationError(const std::string& msg, Eigen::VectorXd failing_point, RunTrace partial_trace)
      : std::runtime_error(msg), point(std::move(failing_point)), partial(std::move(partial_trace)) {}
  Eigen::VectorXd point;
  RunTrace partial;
};

// Surrogate loop: Latin hypercube initialization, then fit / minimize the
// acquisition / evaluate until n_max total evaluations. Returns the best
// evaluated point, never a surrogate optimum.
RunResult surrogate_optimize(const Objective& objective, const OptimizerConfig& cfg);

// Multi-start compass descent on the acquisition in unit-scaled space,
// starting from the best sample plus n_starts-1 Latin hypercube points.
// A winner within dup_tol of an existing sample is replaced by the highest
// entropy-gain point among 1000 fresh uniform candidates.
Eigen::VectorXd minimize_acquisition(const KrigingModel& model, const OptimizerConfig& cfg);

// Full uniform grid with both endpoints per dimension; ties go to the
// lexicographically smallest point. Refuses points_per_dim^d > 10^6.
RunResult grid_enumerate(const Objective& objective, int points_per_dim);

// Compass search on the true objective from the box midpoint.
RunResult pattern_search(const Objective& objective, const OptimizerConfig& cfg);

struct GaParams {
  int population = 20;
  int tournament_k = 2;
  double blend_alpha = 0.5;
  double mutation_rate = 0.2;    // per gene
  double mutation_sigma = 0.1;   // in unit-scaled space
};

RunResult genetic_algorithm(const Objective& objective, const OptimizerConfig& cfg,
                            const GaParams& ga = {});

RunResult random_search(const Objective& objective, const OptimizerConfig& cfg);

}  // namespace esbid
