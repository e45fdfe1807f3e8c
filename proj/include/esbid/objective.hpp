#pragma once

#include <functional>

#include <Eigen/Dense>

#include "esbid/bounds.hpp"

namespace esbid {

// Black-box minimization target over a box. evaluate must be deterministic:
// the same point always yields the same value.
struct Objective {
  Bounds bounds;
  std::function<double(const Eigen::VectorXd&)> evaluate;
  bool reentrant = false;
};

}  // namespace esbid
