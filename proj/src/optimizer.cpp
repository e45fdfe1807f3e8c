#include "esbid/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "esbid/rng.hpp"
#include "esbid/sampling.hpp"

namespace esbid {

namespace {

using Clock = std::chrono::steady_clock;

void validate_common(const Objective& obj, const OptimizerConfig& cfg) {
  obj.bounds.validate();
  if (!obj.evaluate) throw ConfigError("objective: evaluate is not set");
  if (cfg.n_max < 1) throw ConfigError("optimizer: n_max must be at least 1");
  cfg.inner.validate();
  cfg.entropy.validate();
  if (!(cfg.dup_tol >= 0.0)) throw ConfigError("optimizer: dup_tol must be nonnegative");
}

// Budgeted evaluation bookkeeping shared by every method.
class Recorder {
 public:
  Recorder(const Objective& obj, int n_max, std::string method, std::uint64_t seed)
      : obj_(obj), n_max_(n_max), t0_(Clock::now()) {
    trace_.method = std::move(method);
    trace_.seed = seed;
  }

  bool budget_left() const { return static_cast<int>(trace_.records.size()) < n_max_; }
  int evals() const { return static_cast<int>(trace_.records.size()); }

  double evaluate(const Eigen::VectorXd& x) {
    if (!budget_left()) throw std::logic_error("internal: evaluation budget exceeded");
    double f = 0.0;
    try {
      f = obj_.evaluate(x);
    } catch (const std::exception& e) {
      throw EvaluationError(trace_.method + ": objective evaluation failed: " + e.what(), x,
                            trace_);
    }
    if (!have_best_ || f < best_f_) {
      best_f_ = f;
      best_x_ = x;
      have_best_ = true;
    }
    TraceRecord rec;
    rec.iter = evals() + 1;
    rec.x = x;
    rec.f = f;
    rec.best_f = best_f_;
    rec.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0_).count();
    trace_.records.push_back(std::move(rec));
    return f;
  }

  RunResult finish() {
    RunResult r;
    r.best_x = best_x_;
    r.best_f = best_f_;
    r.trace = std::move(trace_);
    r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0_).count();
    return r;
  }

 private:
  const Objective& obj_;
  int n_max_;
  Clock::time_point t0_;
  RunTrace trace_;
  bool have_best_ = false;
  double best_f_ = 0.0;
  Eigen::VectorXd best_x_;
};

KernelHyper resolve_hyper(const OptimizerConfig& cfg, int d) {
  if (cfg.hyper.upsilon.size() == 0 && cfg.hyper.w.size() == 0) return KernelHyper::defaults(d);
  cfg.hyper.validate(d);
  return cfg.hyper;
}

// Compass descent on fn over the unit cube; first improvement moves, full
// poll failure shrinks the step.
template <typename Fn>
std::pair<Eigen::VectorXd, double> compass_descent(Eigen::VectorXd u, Fn&& fn,
                                                   const InnerSearchConfig& inner) {
  const int d = static_cast<int>(u.size());
  double fu = fn(u);
  double step = inner.init_step;
  for (int round = 0; round < inner.max_iters && step >= inner.min_step; ++round) {
    bool improved = false;
    for (int j = 0; j < d && !improved; ++j) {
      for (const double sgn : {1.0, -1.0}) {
        Eigen::VectorXd v = u;
        v[j] = std::clamp(u[j] + sgn * step, 0.0, 1.0);
        if (v[j] == u[j]) continue;
        const double fv = fn(v);
        if (fv < fu) {
          u = std::move(v);
          fu = fv;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= inner.shrink;
  }
  return {std::move(u), fu};
}

}  // namespace

void InnerSearchConfig::validate() const {
  if (n_starts < 1) throw ConfigError("inner search: n_starts must be at least 1");
  if (max_iters < 1) throw ConfigError("inner search: max_iters must be at least 1");
  if (!(init_step > 0.0)) throw ConfigError("inner search: init_step must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("inner search: shrink must be in (0, 1)");
  if (!(min_step > 0.0)) throw ConfigError("inner search: min_step must be positive");
}

Eigen::VectorXd minimize_acquisition(const KrigingModel& model, const OptimizerConfig& cfg) {
  const Bounds& bounds = model.samples.bounds();
  cfg.inner.validate();
  cfg.entropy.validate();

  auto value = [&](const Eigen::VectorXd& u) {
    return acquisition(model, unscale_from_unit(u, bounds), cfg.entropy);
  };

  std::vector<Eigen::VectorXd> starts;
  starts.reserve(cfg.inner.n_starts);
  starts.push_back(scale_to_unit(model.samples.points()[model.samples.best_index()], bounds));
  if (cfg.inner.n_starts > 1)
    for (const auto& x : latin_hypercube(cfg.inner.n_starts - 1, bounds, mix_seed(cfg.seed, 1)))
      starts.push_back(scale_to_unit(x, bounds));

  Eigen::VectorXd best_u;
  double best_a = 0.0;
  bool first = true;
  for (const auto& s : starts) {
    auto [u, a] = compass_descent(s, value, cfg.inner);
    if (first || a < best_a) {
      best_u = std::move(u);
      best_a = a;
      first = false;
    }
  }

  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& x : model.samples.points())
    dmin = std::min(dmin, (best_u - scale_to_unit(x, bounds)).norm());
  if (dmin >= cfg.dup_tol) return unscale_from_unit(best_u, bounds);

  // Winner collides with a sample: take the highest entropy gain among
  // fresh uniform candidates instead.
  const auto candidates = uniform_box(1000, bounds, mix_seed(cfg.seed, 2));
  Eigen::VectorXd best_c = candidates[0];
  double best_gain = -1.0;
  for (const auto& c : candidates) {
    const double g = delta_entropy(c, model.samples, cfg.entropy.coincidence_eps);
    if (g > best_gain) {
      best_gain = g;
      best_c = c;
    }
  }
  return best_c;
}

RunResult surrogate_optimize(const Objective& obj, const OptimizerConfig& cfg) {
  validate_common(obj, cfg);
  const int d = obj.bounds.dim();
  const int n_init = cfg.n_init > 0 ? cfg.n_init : std::max(2 * (d + 1), 10);
  if (n_init < 2) throw ConfigError("surrogate: n_init must be at least 2");
  if (cfg.n_max < n_init) throw ConfigError("surrogate: n_max must be at least n_init");
  const KernelHyper hyper = resolve_hyper(cfg, d);

  Recorder rec(obj, cfg.n_max, "surrogate", cfg.seed);
  SampleSet samples(obj.bounds, cfg.dup_tol);

  for (const auto& x : latin_hypercube(n_init, obj.bounds, mix_seed(cfg.seed, 0))) {
    const double f = rec.evaluate(x);
    if (samples.can_add(x)) samples.add(x, f);
  }

  for (int k = 0; rec.budget_left(); ++k) {
    const KrigingModel model = fit(samples, hyper);
    OptimizerConfig inner_cfg = cfg;
    inner_cfg.seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(k));
    const Eigen::VectorXd x = minimize_acquisition(model, inner_cfg);
    const double f = rec.evaluate(x);
    if (samples.can_add(x)) samples.add(x, f);
  }
  return rec.finish();
}

RunResult grid_enumerate(const Objective& obj, int points_per_dim) {
  obj.bounds.validate();
  if (!obj.evaluate) throw ConfigError("objective: evaluate is not set");
  if (points_per_dim < 2) throw UsageError("grid_enumerate: points_per_dim must be at least 2");
  const int d = obj.bounds.dim();
  double total = 1.0;
  for (int j = 0; j < d; ++j) total *= points_per_dim;
  if (total > 1e6)
    throw UsageError("grid_enumerate: grid of " + std::to_string(points_per_dim) + "^" +
                     std::to_string(d) + " points exceeds the 10^6 budget");
  const long n_total = static_cast<long>(total);

  Recorder rec(obj, static_cast<int>(n_total), "enumerate", 0);

  Eigen::VectorXd best_x;
  double best_f = 0.0;
  bool first = true;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd x(d);
  for (long lin = 0; lin < n_total; ++lin) {
    for (int j = 0; j < d; ++j) {
      // Exact endpoints; interior points linearly spaced.
      x[j] = idx[j] == points_per_dim - 1
                 ? obj.bounds.upper[j]
                 : obj.bounds.lower[j] + idx[j] * (obj.bounds.upper[j] - obj.bounds.lower[j]) /
                                             (points_per_dim - 1);
    }
    const double f = rec.evaluate(x);
    // Near-ties keep the earlier (lexicographically smaller) point.
    if (first || f < best_f - 1e-7 * (1.0 + std::abs(best_f))) {
      best_f = f;
      best_x = x;
      first = false;
    }
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < points_per_dim) break;
      idx[j] = 0;
    }
  }
  RunResult r = rec.finish();
  r.best_x = best_x;
  r.best_f = best_f;
  return r;
}

RunResult pattern_search(const Objective& obj, const OptimizerConfig& cfg) {
  validate_common(obj, cfg);
  const int d = obj.bounds.dim();
  Recorder rec(obj, cfg.n_max, "pattern", cfg.seed);

  Eigen::VectorXd u = Eigen::VectorXd::Constant(d, 0.5);
  double fu = rec.evaluate(unscale_from_unit(u, obj.bounds));
  double step = cfg.inner.init_step;
  while (rec.budget_left() && step >= cfg.inner.min_step) {
    bool improved = false;
    for (int j = 0; j < d && !improved && rec.budget_left(); ++j) {
      for (const double sgn : {1.0, -1.0}) {
        Eigen::VectorXd v = u;
        v[j] = std::clamp(u[j] + sgn * step, 0.0, 1.0);
        if (v[j] == u[j]) continue;
        const double fv = rec.evaluate(unscale_from_unit(v, obj.bounds));
        if (fv < fu) {
          u = std::move(v);
          fu = fv;
          improved = true;
          break;
        }
        if (!rec.budget_left()) break;
      }
    }
    if (!improved) step *= cfg.inner.shrink;
  }
  return rec.finish();
}

RunResult genetic_algorithm(const Objective& obj, const OptimizerConfig& cfg,
                            const GaParams& ga) {
  validate_common(obj, cfg);
  if (ga.population < 2) throw ConfigError("ga: population must be at least 2");
  if (ga.tournament_k < 1) throw ConfigError("ga: tournament_k must be at least 1");
  const int d = obj.bounds.dim();
  Recorder rec(obj, cfg.n_max, "ga", cfg.seed);
  Rng rng(mix_seed(cfg.seed, 3));

  struct Indiv {
    Eigen::VectorXd u;
    double f = 0.0;
  };
  const int pop_n = ga.population;
  std::vector<Indiv> pop;
  pop.reserve(pop_n);
  for (int m = 0; m < pop_n && rec.budget_left(); ++m) {
    Eigen::VectorXd u(d);
    for (int j = 0; j < d; ++j) u[j] = rng.uniform01();
    const double f = rec.evaluate(unscale_from_unit(u, obj.bounds));
    pop.push_back({std::move(u), f});
  }

  auto tournament = [&]() -> const Indiv& {
    const Indiv* best = &pop[rng.below(pop.size())];
    for (int k = 1; k < ga.tournament_k; ++k) {
      const Indiv& challenger = pop[rng.below(pop.size())];
      if (challenger.f < best->f) best = &challenger;
    }
    return *best;
  };

  while (rec.budget_left()) {
    const auto elite_it = std::min_element(
        pop.begin(), pop.end(), [](const Indiv& a, const Indiv& b) { return a.f < b.f; });
    const Indiv elite = *elite_it;

    std::vector<Indiv> next;
    next.reserve(pop_n);
    for (int m = 0; m < pop_n && rec.budget_left(); ++m) {
      const Indiv& pa = tournament();
      const Indiv& pb = tournament();
      Eigen::VectorXd child(d);
      for (int j = 0; j < d; ++j) {
        const double lo = std::min(pa.u[j], pb.u[j]);
        const double hi = std::max(pa.u[j], pb.u[j]);
        const double span = hi - lo;
        child[j] = rng.uniform(lo - ga.blend_alpha * span, hi + ga.blend_alpha * span);
        if (rng.uniform01() < ga.mutation_rate) child[j] += ga.mutation_sigma * rng.normal01();
        child[j] = std::clamp(child[j], 0.0, 1.0);
      }
      const double f = rec.evaluate(unscale_from_unit(child, obj.bounds));
      next.push_back({std::move(child), f});
    }
    if (next.empty()) break;
    // Elitism: the previous best survives in place of the worst offspring.
    auto worst_it = std::max_element(
        next.begin(), next.end(), [](const Indiv& a, const Indiv& b) { return a.f < b.f; });
    if (elite.f < worst_it->f) *worst_it = elite;
    pop = std::move(next);
  }
  return rec.finish();
}

RunResult random_search(const Objective& obj, const OptimizerConfig& cfg) {
  validate_common(obj, cfg);
  Recorder rec(obj, cfg.n_max, "random", cfg.seed);
  for (const auto& x : uniform_box(cfg.n_max, obj.bounds, mix_seed(cfg.seed, 0)))
    rec.evaluate(x);
  return rec.finish();
}

}  // namespace esbid
