#include "esbid/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "esbid/errors.hpp"

namespace esbid {

void EntropyConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("entropy: alpha must be nonnegative");
  if (!(coincidence_eps > 0.0)) throw ConfigError("entropy: coincidence_eps must be positive");
}

double beta_weight(const Eigen::VectorXd& x_scaled,
                   const std::vector<Eigen::VectorXd>& samples_scaled, double coincidence_eps) {
  if (samples_scaled.empty()) throw UsageError("beta_weight: sample set is empty");
  double inv_sq_sum = 0.0;
  for (const auto& s : samples_scaled) {
    if (s.size() != x_scaled.size()) throw UsageError("beta_weight: dimension mismatch");
    const double d = (x_scaled - s).norm();
    if (d < coincidence_eps) return 0.0;
    inv_sq_sum += 1.0 / (d * d);
  }
  return std::min(1.0, 1.0 / inv_sq_sum);
}

static double neg_xlogx(double b) { return b > 0.0 ? -b * std::log(b) : 0.0; }

double delta_entropy(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& points,
                     const Bounds& bounds, double coincidence_eps) {
  std::vector<Eigen::VectorXd> scaled;
  scaled.reserve(points.size());
  for (const auto& p : points) scaled.push_back(scale_to_unit(p, bounds));
  return neg_xlogx(beta_weight(scale_to_unit(x, bounds), scaled, coincidence_eps));
}

double delta_entropy(const Eigen::VectorXd& x, const SampleSet& samples, double coincidence_eps) {
  return delta_entropy(x, samples.points(), samples.bounds(), coincidence_eps);
}

double shannon_entropy(std::span<const double> probs) {
  double total = 0.0;
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw UsageError("shannon_entropy: probabilities must be nonnegative");
    total += p;
    h += neg_xlogx(p);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw UsageError("shannon_entropy: probabilities must sum to 1");
  return h;
}

std::vector<double> cumulative_entropy(const std::vector<Eigen::VectorXd>& ordering,
                                       const Bounds& bounds, double coincidence_eps) {
  std::vector<double> totals;
  totals.reserve(ordering.size());
  std::vector<Eigen::VectorXd> placed_scaled;
  double acc = 0.0;
  for (const auto& p : ordering) {
    const Eigen::VectorXd u = scale_to_unit(p, bounds);
    if (!placed_scaled.empty()) acc += neg_xlogx(beta_weight(u, placed_scaled, coincidence_eps));
    placed_scaled.push_back(u);
    totals.push_back(acc);
  }
  return totals;
}

std::vector<int> greedy_order(const std::vector<Eigen::VectorXd>& points, const Bounds& bounds,
                              double coincidence_eps) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw UsageError("greedy_order: no points");
  std::vector<Eigen::VectorXd> scaled;
  scaled.reserve(n);
  for (const auto& p : points) scaled.push_back(scale_to_unit(p, bounds));

  std::vector<int> order;
  order.reserve(n);
  std::vector<bool> used(n, false);
  order.push_back(0);
  used[0] = true;
  std::vector<Eigen::VectorXd> placed{scaled[0]};

  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    double best_gain = -1.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double g = neg_xlogx(beta_weight(scaled[i], placed, coincidence_eps));
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    order.push_back(best);
    used[best] = true;
    placed.push_back(scaled[best]);
  }
  return order;
}

double acquisition(const KrigingModel& model, const Eigen::VectorXd& x, const EntropyConfig& cfg) {
  cfg.validate();
  return predict(model, x) - cfg.alpha * delta_entropy(x, model.samples, cfg.coincidence_eps);
}

}  // namespace esbid
