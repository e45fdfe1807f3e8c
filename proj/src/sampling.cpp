#include "esbid/sampling.hpp"

#include <numeric>

#include "esbid/errors.hpp"
#include "esbid/rng.hpp"

namespace esbid {

std::vector<Eigen::VectorXd> latin_hypercube(int n, const Bounds& bounds, std::uint64_t seed) {
  if (n < 1) throw UsageError("latin_hypercube: n must be at least 1");
  bounds.validate();
  const int d = bounds.dim();
  Rng rng(seed);

  std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(d));
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[k]);
    }
    const double width = (bounds.upper[j] - bounds.lower[j]) / n;
    for (int i = 0; i < n; ++i) {
      const double offset = rng.uniform01();
      pts[i][j] = bounds.lower[j] + (perm[i] + offset) * width;
    }
  }
  return pts;
}

std::vector<Eigen::VectorXd> uniform_box(int n, const Bounds& bounds, std::uint64_t seed) {
  if (n < 1) throw UsageError("uniform_box: n must be at least 1");
  bounds.validate();
  const int d = bounds.dim();
  Rng rng(seed);

  std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(d));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      pts[i][j] = rng.uniform(bounds.lower[j], bounds.upper[j]);
  return pts;
}

}  // namespace esbid
