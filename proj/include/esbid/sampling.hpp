#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "esbid/bounds.hpp"

namespace esbid {

// Latin hypercube design: per coordinate, each of the n equal-width strata
// holds exactly one point, stratum assignment is a uniform random permutation
// and the position within a stratum is uniform.
std::vector<Eigen::VectorXd> latin_hypercube(int n, const Bounds& bounds, std::uint64_t seed);

// Independent uniform draws over the box.
std::vector<Eigen::VectorXd> uniform_box(int n, const Bounds& bounds, std::uint64_t seed);

}  // namespace esbid
