#pragma once

#include <vector>

#include <Eigen/Dense>

#include "esbid/bounds.hpp"

namespace esbid {

// Correlation hyperparameters, one (scale, exponent) pair per coordinate.
// upsilon_j > 0, 0 < w_j <= 2.
struct KernelHyper {
  Eigen::VectorXd upsilon;
  Eigen::VectorXd w;

  void validate(int dim) const;

  static KernelHyper defaults(int dim, double upsilon_value = 1.0, double w_value = 1.5);
};

// corr(x, y) = exp(-sum_j upsilon_j * |x_j - y_j|^{w_j})
double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelHyper& hyper);

// Observed points with values, kept inside a fixed box. Insertion rejects a
// point closer than dup_tol (Euclidean, unit-scaled coordinates) to any
// stored point so correlation matrices stay invertible.
class SampleSet {
 public:
  explicit SampleSet(Bounds bounds, double dup_tol = 1e-6);

  void add(const Eigen::VectorXd& x, double f);
  bool can_add(const Eigen::VectorXd& x) const;
  // Smallest unit-scaled Euclidean distance from x to any stored point.
  double min_scaled_distance(const Eigen::VectorXd& x) const;

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return bounds_.dim(); }
  const Bounds& bounds() const { return bounds_; }
  double dup_tol() const { return dup_tol_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }
  Eigen::VectorXd values_vector() const;
  // Index of the smallest value; earliest wins ties.
  int best_index() const;

 private:
  Bounds bounds_;
  double dup_tol_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> values_;
};

// Interpolating surrogate with constant trend.
//   mu_hat     = (1' R^-1 f) / (1' R^-1 1)
//   sigma2_hat = (f - 1 mu)' R^-1 (f - 1 mu) / N
//   predict(x) = mu_hat + r(x)' R^-1 (f - 1 mu)
struct KrigingModel {
  KernelHyper hyper;
  SampleSet samples;                   // frozen snapshot of the fitted data
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
  double jitter = 0.0;                 // diagonal shift applied to R
  Eigen::VectorXd weights;             // R^-1 (f - 1 mu)
};

// Builds R, factors it by Cholesky (escalating the diagonal jitter
// 0 -> 1e-10 -> ... -> 1e-4 only if factorization fails), and solves the
// trend and weight systems. Never forms R^-1 explicitly.
KrigingModel fit(const SampleSet& samples, const KernelHyper& hyper);

double predict(const KrigingModel& model, const Eigen::VectorXd& x);

}  // namespace esbid
