#include "esbid/kriging.hpp"

#include <cmath>
#include <string>

#include "esbid/errors.hpp"

namespace esbid {

void KernelHyper::validate(int dim) const {
  if (upsilon.size() != dim || w.size() != dim)
    throw ConfigError("kernel hyperparameters must match the point dimension");
  for (int j = 0; j < dim; ++j) {
    if (!(upsilon[j] > 0.0))
      throw ConfigError("kernel scale upsilon must be positive in coordinate " + std::to_string(j));
    if (!(w[j] > 0.0) || w[j] > 2.0)
      throw ConfigError("kernel exponent w must lie in (0, 2] in coordinate " + std::to_string(j));
  }
}

KernelHyper KernelHyper::defaults(int dim, double upsilon_value, double w_value) {
  KernelHyper h;
  h.upsilon = Eigen::VectorXd::Constant(dim, upsilon_value);
  h.w = Eigen::VectorXd::Constant(dim, w_value);
  return h;
}

double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelHyper& hyper) {
  if (x.size() != y.size()) throw UsageError("correlation: point dimensions differ");
  hyper.validate(static_cast<int>(x.size()));
  double expo = 0.0;
  for (int j = 0; j < x.size(); ++j)
    expo += hyper.upsilon[j] * std::pow(std::abs(x[j] - y[j]), hyper.w[j]);
  return std::exp(-expo);
}

SampleSet::SampleSet(Bounds bounds, double dup_tol)
    : bounds_(std::move(bounds)), dup_tol_(dup_tol) {
  bounds_.validate();
  if (!(dup_tol_ >= 0.0)) throw ConfigError("sample set: dup_tol must be nonnegative");
}

double SampleSet::min_scaled_distance(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = scale_to_unit(x, bounds_);
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : points_) {
    const double d = (u - scale_to_unit(p, bounds_)).norm();
    if (d < dmin) dmin = d;
  }
  return dmin;
}

bool SampleSet::can_add(const Eigen::VectorXd& x) const {
  if (x.size() != bounds_.lower.size() || !bounds_.contains(x)) return false;
  return points_.empty() || min_scaled_distance(x) >= dup_tol_;
}

void SampleSet::add(const Eigen::VectorXd& x, double f) {
  if (x.size() != bounds_.lower.size())
    throw UsageError("sample set: point dimension does not match bounds");
  if (!bounds_.contains(x)) throw UsageError("sample set: point lies outside bounds");
  if (!std::isfinite(f)) throw UsageError("sample set: value must be finite");
  if (!points_.empty() && min_scaled_distance(x) < dup_tol_)
    throw UsageError("sample set: point duplicates an existing sample within dup_tol");
  points_.push_back(x);
  values_.push_back(f);
}

Eigen::VectorXd SampleSet::values_vector() const {
  Eigen::VectorXd f(size());
  for (int i = 0; i < size(); ++i) f[i] = values_[i];
  return f;
}

int SampleSet::best_index() const {
  if (points_.empty()) throw UsageError("sample set: empty");
  int best = 0;
  for (int i = 1; i < size(); ++i)
    if (values_[i] < values_[best]) best = i;
  return best;
}

KrigingModel fit(const SampleSet& samples, const KernelHyper& hyper) {
  const int n = samples.size();
  if (n < 2) throw UsageError("fit: at least two samples required");
  const int d = samples.dim();
  hyper.validate(d);

  // The kernel acts on unit-scaled coordinates so the default
  // hyperparameters are meaningful regardless of the box's physical units.
  std::vector<Eigen::VectorXd> scaled;
  scaled.reserve(n);
  for (const auto& p : samples.points()) scaled.push_back(scale_to_unit(p, samples.bounds()));

  Eigen::MatrixXd R(n, n);
  for (int a = 0; a < n; ++a) {
    R(a, a) = 1.0;
    for (int b = a + 1; b < n; ++b) {
      const double r = correlation(scaled[a], scaled[b], hyper);
      R(a, b) = r;
      R(b, a) = r;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  bool ok = false;
  for (;;) {
    Eigen::MatrixXd Rj = R;
    if (jitter > 0.0) Rj.diagonal().array() += jitter;
    llt.compute(Rj);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
    if (jitter == 0.0)
      jitter = 1e-10;
    else if (jitter < 1e-4)
      jitter = std::min(jitter * 10.0, 1e-4);
    else
      break;
  }
  if (!ok) {
    // Identify the most correlated pair for the diagnostic.
    int pa = 0, pb = 1;
    double rmax = -1.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (R(a, b) > rmax) {
          rmax = R(a, b);
          pa = a;
          pb = b;
        }
    throw NumericalError(
        "fit: correlation matrix not factorizable at maximum jitter; samples " +
        std::to_string(pa) + " and " + std::to_string(pb) +
        " are nearly coincident (correlation " + std::to_string(rmax) + ")");
  }

  const Eigen::VectorXd f = samples.values_vector();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd Rinv_ones = llt.solve(ones);
  const Eigen::VectorXd Rinv_f = llt.solve(f);
  const double denom = ones.dot(Rinv_ones);
  if (!(denom > 0.0)) throw NumericalError("fit: degenerate trend system");
  const double mu = ones.dot(Rinv_f) / denom;

  const Eigen::VectorXd resid = f - mu * ones;
  const Eigen::VectorXd weights = llt.solve(resid);

  return KrigingModel{hyper,
                      samples,
                      mu,
                      std::max(0.0, resid.dot(weights) / n),
                      jitter,
                      weights};
}

double predict(const KrigingModel& model, const Eigen::VectorXd& x) {
  const int n = model.samples.size();
  if (n == 0) throw UsageError("predict: model not fitted");
  if (x.size() != model.samples.dim())
    throw UsageError("predict: point dimension does not match model");
  const Bounds& bounds = model.samples.bounds();
  const Eigen::VectorXd u = scale_to_unit(x, bounds);
  double acc = 0.0;
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd v = scale_to_unit(model.samples.points()[a], bounds);
    acc += correlation(u, v, model.hyper) * model.weights[a];
  }
  return model.mu_hat + acc;
}

}  // namespace esbid
