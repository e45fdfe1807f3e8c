#include "esbid/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "esbid/entropy.hpp"
#include "esbid/errors.hpp"
#include "esbid/market.hpp"
#include "esbid/market_io.hpp"
#include "esbid/trace_io.hpp"

namespace esbid::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& need(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ctx + ": missing field '" + key + "'");
  return *it;
}

std::string need_str(const json& obj, const char* key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_string()) throw ConfigError(ctx + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

Eigen::VectorXd num_array(const json& v, const char* key, const std::string& ctx) {
  if (!v.is_array()) throw ConfigError(ctx + ": field '" + key + "' must be an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(ctx + ": field '" + key + "' must be an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

bool needs_seed(const std::string& method) {
  return method == "surrogate" || method == "ga" || method == "random";
}

MarketInstance load_valid_instance(const std::string& path) {
  MarketInstance inst = load_instance(path);
  const std::vector<std::string> violations = validate_instance(inst);
  if (!violations.empty()) {
    std::string msg = "invalid instance '" + path + "':";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }
  return inst;
}

RunResult run_method(const std::string& method, const Objective& objective,
                     const OptimizerConfig& cfg, int grid_points) {
  if (method == "surrogate") return surrogate_optimize(objective, cfg);
  if (method == "pattern") return pattern_search(objective, cfg);
  if (method == "ga") return genetic_algorithm(objective, cfg);
  if (method == "random") return random_search(objective, cfg);
  if (method == "enumerate") {
    if (grid_points < 2)
      throw ConfigError("config: field 'grid_points' (>= 2) is required by method 'enumerate'");
    return grid_enumerate(objective, grid_points);
  }
  throw ConfigError("config: unknown method '" + method +
                    "' (expected surrogate, pattern, ga, random, or enumerate)");
}

void apply_overrides(RunConfig& cfg, const RunOverrides& over) {
  if (over.seed) {
    cfg.opt.seed = *over.seed;
    cfg.seed_set = true;
    cfg.seeds = {*over.seed};
  }
  if (over.n_max) cfg.opt.n_max = *over.n_max;
  if (over.alpha) cfg.opt.entropy.alpha = *over.alpha;
  if (over.out_dir) cfg.output_dir = *over.out_dir;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");

  static const std::vector<std::string> known = {
      "instance", "method",      "seed",       "n_init",  "n_max", "alpha",
      "upsilon",  "w",           "grid_points", "output_dir", "methods", "seeds"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("config: unknown field '" + it.key() + "'");
  }

  RunConfig cfg;
  const std::string raw_instance = need_str(doc, "instance", "config");
  const fs::path config_dir = fs::path(path).parent_path();
  fs::path inst_path(raw_instance);
  if (!inst_path.is_absolute() && !config_dir.empty() && fs::exists(config_dir / inst_path))
    inst_path = config_dir / inst_path;
  cfg.instance_path = inst_path.string();

  if (doc.contains("method")) cfg.method = need_str(doc, "method", "config");
  if (doc.contains("seed")) {
    const json& v = doc["seed"];
    if (!v.is_number_integer() || v.is_number_float() || v.get<std::int64_t>() < 0)
      throw ConfigError("config: field 'seed' must be a non-negative integer");
    cfg.opt.seed = v.get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (doc.contains("n_init")) {
    if (!doc["n_init"].is_number_integer())
      throw ConfigError("config: field 'n_init' must be an integer");
    cfg.opt.n_init = doc["n_init"].get<int>();
  }
  if (doc.contains("n_max")) {
    if (!doc["n_max"].is_number_integer())
      throw ConfigError("config: field 'n_max' must be an integer");
    cfg.opt.n_max = doc["n_max"].get<int>();
  }
  if (doc.contains("alpha")) {
    if (!doc["alpha"].is_number()) throw ConfigError("config: field 'alpha' must be a number");
    cfg.opt.entropy.alpha = doc["alpha"].get<double>();
  }
  if (doc.contains("upsilon")) {
    cfg.opt.hyper.upsilon = num_array(doc["upsilon"], "upsilon", "config");
    cfg.hyper_set = true;
  }
  if (doc.contains("w")) {
    cfg.opt.hyper.w = num_array(doc["w"], "w", "config");
    cfg.hyper_set = true;
  }
  if (doc.contains("grid_points")) {
    if (!doc["grid_points"].is_number_integer())
      throw ConfigError("config: field 'grid_points' must be an integer");
    cfg.grid_points = doc["grid_points"].get<int>();
  }
  if (doc.contains("output_dir")) cfg.output_dir = need_str(doc, "output_dir", "config");
  if (doc.contains("methods")) {
    const json& v = doc["methods"];
    if (!v.is_array()) throw ConfigError("config: field 'methods' must be an array of strings");
    for (const json& m : v) {
      if (!m.is_string())
        throw ConfigError("config: field 'methods' must be an array of strings");
      cfg.methods.push_back(m.get<std::string>());
    }
  }
  if (doc.contains("seeds")) {
    const json& v = doc["seeds"];
    if (!v.is_array())
      throw ConfigError("config: field 'seeds' must be an array of non-negative integers");
    for (const json& s : v) {
      if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
        throw ConfigError("config: field 'seeds' must be an array of non-negative integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  return cfg;
}

int cmd_market(const MarketArgs& args) {
  const MarketInstance inst = load_valid_instance(args.instance_path);
  const ClearingResult result = clear_market(inst, Bid{args.e_m, args.p_m});

  fs::create_directories(args.out_dir);
  const fs::path json_path = fs::path(args.out_dir) / "clearing.json";
  const fs::path csv_path = fs::path(args.out_dir) / "clearing.csv";
  write_clearing_json(json_path.string(), result, inst);
  write_clearing_csv(csv_path.string(), result, inst);

  std::cout << "total_cost = " << fmt_g(result.total_cost) << "\n";
  std::cout << "storage_profit = " << fmt_g(storage_profit(result, inst)) << "\n";
  std::cerr << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
  return 0;
}

int cmd_optimize(const std::string& config_path, const RunOverrides& over) {
  RunConfig cfg = load_run_config(config_path);
  apply_overrides(cfg, over);
  if (cfg.method.empty()) throw ConfigError("config: missing field 'method'");
  if (needs_seed(cfg.method) && !cfg.seed_set)
    throw ConfigError("config: method '" + cfg.method +
                      "' requires a seed (set \"seed\" or pass --seed)");

  const MarketInstance inst = load_valid_instance(cfg.instance_path);
  const Objective objective = bidding_objective(inst);
  const RunResult result = run_method(cfg.method, objective, cfg.opt, cfg.grid_points);

  fs::create_directories(cfg.output_dir);
  const fs::path trace_path = fs::path(cfg.output_dir) / "trace.csv";
  write_trace_csv(trace_path.string(), result.trace, objective.bounds.dim());

  json summary;
  summary["method"] = result.trace.method;
  if (cfg.seed_set) summary["seed"] = result.trace.seed;
  summary["evaluations"] = result.trace.records.size();
  summary["best_bid"] = {result.best_x[0], result.best_x[1]};
  summary["best_f"] = result.best_f;
  summary["storage_profit"] = -result.best_f;
  if (cfg.method == "surrogate") summary["alpha"] = cfg.opt.entropy.alpha;
  summary["wall_ms"] = result.wall_ms;
  const fs::path summary_path = fs::path(cfg.output_dir) / "summary.json";
  std::ofstream out(summary_path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + summary_path.string() + "'");
  out << summary.dump(2) << "\n";

  std::cout << "method = " << result.trace.method << "\n";
  std::cout << "evaluations = " << result.trace.records.size() << "\n";
  std::cout << "best_bid_e = " << fmt_g(result.best_x[0]) << "\n";
  std::cout << "best_bid_p = " << fmt_g(result.best_x[1]) << "\n";
  std::cout << "best_f = " << fmt_g(result.best_f) << "\n";
  std::cout << "storage_profit = " << fmt_g(-result.best_f) << "\n";
  std::cerr << "wrote " << trace_path.string() << " and " << summary_path.string() << "\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const RunOverrides& over) {
  RunConfig cfg = load_run_config(config_path);
  apply_overrides(cfg, over);
  if (cfg.methods.size() < 2)
    throw ConfigError("config: field 'methods' must list at least two methods");
  if (cfg.grid_points < 2)
    throw ConfigError("config: field 'grid_points' (>= 2) is required by compare");
  for (const std::string& m : cfg.methods) {
    if (needs_seed(m) && cfg.seeds.empty())
      throw ConfigError("config: method '" + m + "' requires a non-empty 'seeds' array");
  }

  const MarketInstance inst = load_valid_instance(cfg.instance_path);
  const Objective objective = bidding_objective(inst);

  const RunResult reference = grid_enumerate(objective, cfg.grid_points);
  const double denom = std::max(std::abs(reference.best_f), 1e-12);
  const auto rel = [&](double f) { return std::abs(f - reference.best_f) / denom; };

  std::vector<CompareRow> rows;
  rows.push_back({"enumerate", 0, reference.best_f, 0.0,
                  static_cast<int>(reference.trace.records.size()), 0.0});

  for (const std::string& method : cfg.methods) {
    if (method == "enumerate") continue;  // reference row above
    std::vector<std::uint64_t> seeds = needs_seed(method) ? cfg.seeds
                                                          : std::vector<std::uint64_t>{0};
    std::vector<double> errs;
    for (std::uint64_t seed : seeds) {
      OptimizerConfig run_cfg = cfg.opt;
      run_cfg.seed = seed;
      const RunResult r = run_method(method, objective, run_cfg, cfg.grid_points);
      rows.push_back({method, seed, r.best_f, rel(r.best_f),
                      static_cast<int>(r.trace.records.size()), 0.0});
      errs.push_back(rel(r.best_f));
    }
    std::cerr << method << ": median rel_error = " << fmt_g(median(errs)) << " over "
              << seeds.size() << " run(s)\n";
  }

  fs::create_directories(cfg.output_dir);
  const fs::path csv_path = fs::path(cfg.output_dir) / "comparison.csv";
  write_comparison_csv(csv_path.string(), rows);
  std::cout << comparison_to_csv(rows);
  std::cerr << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_entropy_demo(const EntropyDemoArgs& args) {
  std::vector<double> pts = args.points;
  if (pts.empty()) pts = {0.1, 0.3, 0.7, 0.8};
  for (double p : pts) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("entropy-demo: points must lie in [0, 1], got " + fmt_g(p));
  }
  const int n = static_cast<int>(pts.size());

  Bounds bounds;
  bounds.lower = Eigen::VectorXd::Zero(1);
  bounds.upper = Eigen::VectorXd::Ones(1);
  std::vector<Eigen::VectorXd> points;
  points.reserve(pts.size());
  for (double p : pts) points.push_back(Eigen::VectorXd::Constant(1, p));

  fs::create_directories(args.out_dir);

  const fs::path grid_path = fs::path(args.out_dir) / "entropy_grid.csv";
  {
    std::ofstream out(grid_path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + grid_path.string() + "'");
    out << "x,delta_h\n";
    for (int k = 0; k <= 1000; ++k) {
      const double x = static_cast<double>(k) / 1000.0;
      const double dh = delta_entropy(Eigen::VectorXd::Constant(1, x), points, bounds);
      out << fmt_g(x) << ',' << fmt_g(dh) << '\n';
    }
  }

  const fs::path ord_path = fs::path(args.out_dir) / "entropy_orderings.csv";
  {
    std::ofstream out(ord_path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + ord_path.string() + "'");
    out << "ordering,position,point_index,cumulative\n";
    const auto emit = [&](const std::string& label, const std::vector<int>& order) {
      std::vector<Eigen::VectorXd> ordered;
      ordered.reserve(order.size());
      for (int idx : order) ordered.push_back(points[idx]);
      const std::vector<double> cum = cumulative_entropy(ordered, bounds);
      for (int k = 0; k < n; ++k)
        out << label << ',' << (k + 1) << ',' << order[k] << ',' << fmt_g(cum[k]) << '\n';
    };

    std::vector<int> natural(n);
    for (int i = 0; i < n; ++i) natural[i] = i;
    emit("natural", natural);
    emit("greedy", greedy_order(points, bounds));
    std::vector<int> reversed(natural.rbegin(), natural.rend());
    emit("reverse", reversed);
    if (n <= 6) {
      std::vector<int> perm = natural;
      int count = 0;
      do {
        char label[16];
        std::snprintf(label, sizeof(label), "perm_%03d", count++);
        emit(label, perm);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }

  std::cerr << "wrote " << grid_path.string() << " and " << ord_path.string() << "\n";
  return 0;
}

int cmd_validate(const std::string& instance_path) {
  const MarketInstance inst = load_instance(instance_path);
  const std::vector<std::string> violations = validate_instance(inst);
  if (violations.empty()) {
    std::cout << "instance is valid\n";
    return 0;
  }
  for (const std::string& v : violations) std::cout << v << "\n";
  return 1;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Energy storage bidding toolkit: market clearing, surrogate bid optimization, benchmarks"};
  app.require_subcommand(1);

  MarketArgs market_args;
  CLI::App* market = app.add_subcommand("market", "Clear the market for one storage bid");
  market->add_option("--instance", market_args.instance_path, "Instance JSON file")->required();
  market->add_option("--em", market_args.e_m, "Bid energy capacity (MWh)")->required();
  market->add_option("--pm", market_args.p_m, "Bid power capacity (MW)")->required();
  market->add_option("--out", market_args.out_dir, "Output directory (default .)");

  std::string opt_config;
  RunOverrides opt_over;
  std::uint64_t opt_seed = 0;
  int opt_n_max = 0;
  double opt_alpha = 0.0;
  std::string opt_out;
  CLI::App* optimize = app.add_subcommand("optimize", "Search for the profit-maximizing bid");
  optimize->add_option("--config", opt_config, "Run configuration JSON file")->required();
  CLI::Option* o_seed = optimize->add_option("--seed", opt_seed, "Override the run seed");
  CLI::Option* o_nmax = optimize->add_option("--n-max", opt_n_max, "Override the evaluation budget");
  CLI::Option* o_alpha = optimize->add_option("--alpha", opt_alpha, "Override the exploration weight");
  CLI::Option* o_out = optimize->add_option("--out", opt_out, "Override the output directory");

  std::string cmp_config;
  std::uint64_t cmp_seed = 0;
  int cmp_n_max = 0;
  double cmp_alpha = 0.0;
  std::string cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "Benchmark methods against grid enumeration");
  compare->add_option("--config", cmp_config, "Run configuration JSON file")->required();
  CLI::Option* c_seed = compare->add_option("--seed", cmp_seed, "Replace the seed list with one seed");
  CLI::Option* c_nmax = compare->add_option("--n-max", cmp_n_max, "Override the evaluation budget");
  CLI::Option* c_alpha = compare->add_option("--alpha", cmp_alpha, "Override the exploration weight");
  CLI::Option* c_out = compare->add_option("--out", cmp_out, "Override the output directory");

  EntropyDemoArgs demo_args;
  CLI::App* demo = app.add_subcommand("entropy-demo", "Write entropy-gain curves for a point set");
  demo->add_option("--points", demo_args.points, "Points in [0,1] (default 0.1,0.3,0.7,0.8)")
      ->delimiter(',');
  demo->add_option("--out", demo_args.out_dir, "Output directory (default .)");

  std::string val_instance;
  CLI::App* validate = app.add_subcommand("validate", "Check an instance file for structural errors");
  validate->add_option("--instance", val_instance, "Instance JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (market->parsed()) return cmd_market(market_args);
    if (optimize->parsed()) {
      if (o_seed->count() > 0) opt_over.seed = opt_seed;
      if (o_nmax->count() > 0) opt_over.n_max = opt_n_max;
      if (o_alpha->count() > 0) opt_over.alpha = opt_alpha;
      if (o_out->count() > 0) opt_over.out_dir = opt_out;
      return cmd_optimize(opt_config, opt_over);
    }
    if (compare->parsed()) {
      RunOverrides over;
      if (c_seed->count() > 0) over.seed = cmp_seed;
      if (c_nmax->count() > 0) over.n_max = cmp_n_max;
      if (c_alpha->count() > 0) over.alpha = cmp_alpha;
      if (c_out->count() > 0) over.out_dir = cmp_out;
      return cmd_compare(cmp_config, over);
    }
    if (demo->parsed()) return cmd_entropy_demo(demo_args);
    if (validate->parsed()) return cmd_validate(val_instance);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation failure: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace esbid::cli
