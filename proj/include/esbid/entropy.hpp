#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "esbid/kriging.hpp"

namespace esbid {

struct EntropyConfig {
  double alpha = 20000.0;          // exploration weight, >= 0
  double coincidence_eps = 1e-12;  // below this scaled distance a point counts as sampled

  void validate() const;
};

// Collision probability of a candidate against sampled points, all in
// unit-scaled coordinates: beta = 1 / sum_m D_m^-2, clamped to [0, 1],
// exactly 0 when the candidate coincides with a sample within eps.
double beta_weight(const Eigen::VectorXd& x_scaled,
                   const std::vector<Eigen::VectorXd>& samples_scaled,
                   double coincidence_eps = 1e-12);

// Entropy gain -beta ln beta of adding x to the sampled set (natural log,
// 0 ln 0 = 0). Points are unit-scaled through the given bounds.
double delta_entropy(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& points,
                     const Bounds& bounds, double coincidence_eps = 1e-12);

double delta_entropy(const Eigen::VectorXd& x, const SampleSet& samples,
                     double coincidence_eps = 1e-12);

// Shannon entropy -sum p ln p of a finite distribution.
double shannon_entropy(std::span<const double> probs);

// Entropy accumulated along an insertion order: entry k holds the sum of
// delta_entropy over the first k points, each against its predecessors.
std::vector<double> cumulative_entropy(const std::vector<Eigen::VectorXd>& ordering,
                                       const Bounds& bounds,
                                       double coincidence_eps = 1e-12);

// Reorders points to greedily maximize cumulative entropy: starts at index 0,
// then repeatedly appends the remaining point with the largest gain, breaking
// ties by lowest original index. Returns original indices in visit order.
std::vector<int> greedy_order(const std::vector<Eigen::VectorXd>& points, const Bounds& bounds,
                              double coincidence_eps = 1e-12);

// Exploration-weighted surrogate value: predict(x) - alpha * delta_entropy(x),
// with the entropy gain taken against the model's own sample points.
double acquisition(const KrigingModel& model, const Eigen::VectorXd& x, const EntropyConfig& cfg);

}  // namespace esbid
