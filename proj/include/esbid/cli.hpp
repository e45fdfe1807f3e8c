#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esbid/optimizer.hpp"

namespace esbid::cli {

struct MarketArgs {
  std::string instance_path;
  double e_m = 0.0;
  double p_m = 0.0;
  std::string out_dir = ".";
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_max;
  std::optional<double> alpha;
  std::optional<std::string> out_dir;
};

struct EntropyDemoArgs {
  std::vector<double> points;  // empty means the default 0.1, 0.3, 0.7, 0.8
  std::string out_dir = ".";
};

// Run configuration file, JSON. Required: "instance", "method". Optional:
// "seed", "n_init", "n_max", "alpha", "upsilon", "w", "grid_points",
// "output_dir", and for `compare`: "methods" and "seeds" arrays.
struct RunConfig {
  std::string instance_path;
  std::string method;
  OptimizerConfig opt;
  bool seed_set = false;
  bool hyper_set = false;
  int grid_points = 0;
  std::string output_dir = ".";
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
};

RunConfig load_run_config(const std::string& path);

int cmd_market(const MarketArgs& args);
int cmd_optimize(const std::string& config_path, const RunOverrides& over = {});
int cmd_compare(const std::string& config_path, const RunOverrides& over = {});
int cmd_entropy_demo(const EntropyDemoArgs& args);
int cmd_validate(const std::string& instance_path);

int run_cli(int argc, char** argv);

}  // namespace esbid::cli
