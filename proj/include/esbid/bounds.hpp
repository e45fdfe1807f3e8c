#pragma once

#include <Eigen/Dense>

#include "esbid/errors.hpp"

namespace esbid {

// Axis-aligned box with strictly positive width in every coordinate.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }

  void validate() const {
    if (lower.size() != upper.size())
      throw ConfigError("bounds: lower and upper must have equal length");
    if (lower.size() == 0) throw ConfigError("bounds: dimension must be at least 1");
    for (int j = 0; j < dim(); ++j) {
      if (!(lower[j] < upper[j]))
        throw ConfigError("bounds: lower must be strictly below upper in coordinate " +
                          std::to_string(j));
    }
  }

  bool contains(const Eigen::VectorXd& x) const {
    if (x.size() != lower.size()) return false;
    for (int j = 0; j < dim(); ++j) {
      if (x[j] < lower[j] || x[j] > upper[j]) return false;
    }
    return true;
  }

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

// Maps x componentwise to (x - lower) / (upper - lower), the unit cube.
inline Eigen::VectorXd scale_to_unit(const Eigen::VectorXd& x, const Bounds& b) {
  if (x.size() != b.lower.size())
    throw UsageError("scale_to_unit: point dimension does not match bounds");
  if (!b.contains(x)) throw UsageError("scale_to_unit: point lies outside bounds");
  return (x - b.lower).cwiseQuotient(b.upper - b.lower);
}

inline Eigen::VectorXd unscale_from_unit(const Eigen::VectorXd& u, const Bounds& b) {
  if (u.size() != b.lower.size())
    throw UsageError("unscale_from_unit: point dimension does not match bounds");
  return b.lower + u.cwiseProduct(b.upper - b.lower);
}

}  // namespace esbid
