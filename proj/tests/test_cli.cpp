#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "esbid/cli.hpp"
#include "esbid/errors.hpp"
#include "esbid/market_io.hpp"
#include "esbid/trace_io.hpp"

using namespace esbid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "esbid_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string data_file(const std::string& rel) {
  return std::string(ESBID_DATA_DIR) + "/" + rel;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

// Captures std::cout for the duration of a callback; cmd_* print to it.
template <typename F>
std::string capture_stdout(F&& fn, int& rc) {
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  try {
    rc = fn();
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  return sink.str();
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

int run_argv(std::vector<std::string> args) {
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("esbid"));
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("market command writes the clearing schedule and prices") {
  const fs::path dir = fresh_dir("market");
  cli::MarketArgs args;
  args.instance_path = data_file("instances/arb2.json");
  args.e_m = 25.0;
  args.p_m = 25.0;
  args.out_dir = dir.string();

  int rc = -1;
  const std::string out = capture_stdout([&] { return cli::cmd_market(args); }, rc);
  CHECK(rc == 0);
  CHECK(value_after(out, "total_cost = ") == doctest::Approx(212.5).epsilon(1e-9));
  CHECK(value_after(out, "storage_profit = ") == doctest::Approx(25.0).epsilon(1e-7));

  const json doc = json::parse(read_file(dir / "clearing.json"));
  CHECK(doc["total_cost"].get<double>() == doctest::Approx(212.5).epsilon(1e-9));
  CHECK(doc["storage_profit"].get<double>() == doctest::Approx(25.0).epsilon(1e-7));
  CHECK(doc["node_count"].get<long>() >= 1);
  REQUIRE(doc["periods"].size() == 2);
  const json& p1 = doc["periods"][0];
  CHECK(p1["t"].get<int>() == 1);
  CHECK(p1["pc"].get<double>() == doctest::Approx(25.0).epsilon(1e-7));
  CHECK(p1["zc"].get<int>() == 1);
  CHECK(p1["y"].get<double>() == doctest::Approx(25.0).epsilon(1e-7));  // end of period
  CHECK(p1["lambda_storage"].get<double>() == doctest::Approx(1.5).epsilon(1e-7));
  REQUIRE(p1["lambda"].size() == 1);
  REQUIRE(p1["p"].size() == 1);
  const json& p2 = doc["periods"][1];
  CHECK(p2["pd"].get<double>() == doctest::Approx(25.0).epsilon(1e-7));
  CHECK(p2["lambda_storage"].get<double>() == doctest::Approx(2.5).epsilon(1e-7));

  const auto csv = lines_of(read_file(dir / "clearing.csv"));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0] == "t,pc,pd,y,lambda_at_storage_bus");
  CHECK(csv[1].rfind("1,25,", 0) == 0);
}

TEST_CASE("optimize command writes a trace and a summary") {
  const fs::path dir = fresh_dir("optimize");
  const fs::path config = dir / "run.json";
  write_file(config, std::string("{\n") +
                         "  \"instance\": \"" + data_file("instances/arb2.json") + "\",\n" +
                         "  \"method\": \"random\",\n  \"seed\": 3,\n  \"n_max\": 8,\n" +
                         "  \"output_dir\": \"" + (dir / "out").string() + "\"\n}\n");

  int rc = -1;
  const std::string out = capture_stdout([&] { return cli::cmd_optimize(config.string()); }, rc);
  CHECK(rc == 0);
  CHECK(out.find("method = random") != std::string::npos);
  CHECK(value_after(out, "evaluations = ") == 8);

  const auto trace = lines_of(read_file(dir / "out" / "trace.csv"));
  REQUIRE(trace.size() == 9);
  CHECK(trace[0] == "iter,method,x1,x2,f,best_f,ms");
  CHECK(trace[1].rfind("1,random,", 0) == 0);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].substr(trace[i].size() - 2) == ",0");  // no wall time in the file

  const json summary = json::parse(read_file(dir / "out" / "summary.json"));
  CHECK(summary["method"] == "random");
  CHECK(summary["seed"].get<std::uint64_t>() == 3);
  CHECK(summary["evaluations"].get<int>() == 8);
  REQUIRE(summary["best_bid"].size() == 2);
  CHECK(summary["storage_profit"].get<double>() == -summary["best_f"].get<double>());
  CHECK(!summary.contains("alpha"));  // only reported for the surrogate
  CHECK(summary["wall_ms"].get<double>() >= 0.0);
  CHECK(value_after(out, "best_f = ") == doctest::Approx(summary["best_f"].get<double>()));
}

TEST_CASE("repeated optimize runs produce byte-identical traces") {
  const fs::path dir = fresh_dir("optimize_repeat");
  for (const char* sub : {"a", "b"}) {
    const fs::path config = dir / (std::string("run_") + sub + ".json");
    write_file(config, std::string("{\n") +
                           "  \"instance\": \"" + data_file("instances/arb2.json") + "\",\n" +
                           "  \"method\": \"surrogate\",\n  \"seed\": 5,\n  \"n_max\": 12,\n" +
                           "  \"alpha\": 30,\n" +
                           "  \"output_dir\": \"" + (dir / sub).string() + "\"\n}\n");
    int rc = -1;
    capture_stdout([&] { return cli::cmd_optimize(config.string()); }, rc);
    REQUIRE(rc == 0);
  }
  CHECK(read_file(dir / "a" / "trace.csv") == read_file(dir / "b" / "trace.csv"));
}

TEST_CASE("optimize honors command line overrides") {
  const fs::path dir = fresh_dir("optimize_override");
  const fs::path config = dir / "run.json";
  write_file(config, std::string("{\n") +
                         "  \"instance\": \"" + data_file("instances/arb2.json") + "\",\n" +
                         "  \"method\": \"surrogate\",\n  \"n_max\": 40\n}\n");

  // No seed anywhere: a stochastic method must refuse to run.
  CHECK_THROWS_AS(cli::cmd_optimize(config.string()), ConfigError);

  cli::RunOverrides over;
  over.seed = 5;
  over.n_max = 12;
  over.alpha = 30.0;
  over.out_dir = (dir / "out").string();
  int rc = -1;
  capture_stdout([&] { return cli::cmd_optimize(config.string(), over); }, rc);
  CHECK(rc == 0);
  const json summary = json::parse(read_file(dir / "out" / "summary.json"));
  CHECK(summary["seed"].get<std::uint64_t>() == 5);
  CHECK(summary["evaluations"].get<int>() == 12);
  CHECK(summary["alpha"].get<double>() == 30.0);
}

TEST_CASE("run configuration errors name the offending field") {
  const fs::path dir = fresh_dir("config_errors");

  write_file(dir / "unknown.json", "{\"instance\": \"x\", \"method\": \"random\", \"bogus\": 1}");
  CHECK_THROWS_WITH_AS(cli::load_run_config((dir / "unknown.json").string()),
                       "config: unknown field 'bogus'", ConfigError);

  write_file(dir / "noinst.json", "{\"method\": \"random\"}");
  CHECK_THROWS_WITH_AS(cli::load_run_config((dir / "noinst.json").string()),
                       "config: missing field 'instance'", ConfigError);

  write_file(dir / "badseed.json", "{\"instance\": \"x\", \"seed\": -4}");
  CHECK_THROWS_WITH_AS(cli::load_run_config((dir / "badseed.json").string()),
                       "config: field 'seed' must be a non-negative integer", ConfigError);

  write_file(dir / "broken.json", "{\"instance\": ");
  CHECK_THROWS_AS(cli::load_run_config((dir / "broken.json").string()), ConfigError);

  CHECK_THROWS_AS(cli::load_run_config((dir / "missing.json").string()), ConfigError);

  write_file(dir / "badmethod.json",
             "{\"instance\": \"" + data_file("instances/arb2.json") +
                 "\", \"method\": \"annealing\", \"seed\": 1}");
  int rc = -1;
  try {
    capture_stdout([&] { return cli::cmd_optimize((dir / "badmethod.json").string()); }, rc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown method 'annealing'") != std::string::npos);
  }
}

TEST_CASE("instance paths resolve relative to the configuration file") {
  const fs::path dir = fresh_dir("relative_paths");
  fs::create_directories(dir / "inst");
  write_file(dir / "inst" / "copy.json", read_file(data_file("instances/arb2.json")));
  write_file(dir / "run.json",
             "{\"instance\": \"inst/copy.json\", \"method\": \"random\", \"seed\": 1}");
  const cli::RunConfig cfg = cli::load_run_config((dir / "run.json").string());
  CHECK(fs::exists(cfg.instance_path));
  CHECK(fs::equivalent(cfg.instance_path, dir / "inst" / "copy.json"));
}

TEST_CASE("compare command benchmarks methods against the grid reference") {
  const fs::path dir = fresh_dir("compare");
  const fs::path config = dir / "cmp.json";
  write_file(config, std::string("{\n") +
                         "  \"instance\": \"" + data_file("instances/arb2.json") + "\",\n" +
                         "  \"methods\": [\"random\", \"ga\"],\n  \"seeds\": [1, 2],\n" +
                         "  \"n_max\": 6,\n  \"grid_points\": 5,\n" +
                         "  \"output_dir\": \"" + (dir / "out").string() + "\"\n}\n");
  int rc = -1;
  const std::string out = capture_stdout([&] { return cli::cmd_compare(config.string()); }, rc);
  CHECK(rc == 0);

  const std::string file_text = read_file(dir / "out" / "comparison.csv");
  CHECK(out == file_text);  // stdout mirrors the file
  const auto rows = lines_of(file_text);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "method,seed,best_f,rel_error,evals,ms");
  CHECK(rows[1].rfind("enumerate,0,", 0) == 0);
  CHECK(rows[1].substr(rows[1].size() - 7) == ",0,25,0");  // zero error, 25 evals, ms 0
  CHECK(rows[2].rfind("random,1,", 0) == 0);
  CHECK(rows[3].rfind("random,2,", 0) == 0);
  CHECK(rows[4].rfind("ga,1,", 0) == 0);
  CHECK(rows[5].rfind("ga,2,", 0) == 0);
}

TEST_CASE("compare validates its configuration") {
  const fs::path dir = fresh_dir("compare_errors");
  write_file(dir / "one.json",
             "{\"instance\": \"x\", \"methods\": [\"random\"], \"grid_points\": 5}");
  CHECK_THROWS_WITH_AS(cli::cmd_compare((dir / "one.json").string()),
                       "config: field 'methods' must list at least two methods", ConfigError);

  write_file(dir / "nogrid.json",
             "{\"instance\": \"x\", \"methods\": [\"random\", \"ga\"], \"seeds\": [1]}");
  CHECK_THROWS_AS(cli::cmd_compare((dir / "nogrid.json").string()), ConfigError);

  write_file(dir / "noseeds.json",
             "{\"instance\": \"x\", \"methods\": [\"random\", \"ga\"], \"grid_points\": 5}");
  try {
    cli::cmd_compare((dir / "noseeds.json").string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("requires a non-empty 'seeds' array") != std::string::npos);
  }
}

TEST_CASE("entropy demo writes the gain curve and every ordering") {
  const fs::path dir = fresh_dir("entropy_demo");
  cli::EntropyDemoArgs args;
  args.out_dir = dir.string();
  int rc = -1;
  capture_stdout([&] { return cli::cmd_entropy_demo(args); }, rc);
  CHECK(rc == 0);

  const auto grid = lines_of(read_file(dir / "entropy_grid.csv"));
  REQUIRE(grid.size() == 1002);  // header plus x = k/1000 for k in 0..1000
  CHECK(grid[0] == "x,delta_h");
  CHECK(grid[1].rfind("0,", 0) == 0);
  CHECK(grid[1001].rfind("1,", 0) == 0);

  const std::string ord = read_file(dir / "entropy_orderings.csv");
  const auto ord_lines = lines_of(ord);
  CHECK(ord_lines[0] == "ordering,position,point_index,cumulative");
  CHECK(ord.find("natural,1,0,") != std::string::npos);
  CHECK(ord.find("reverse,1,3,") != std::string::npos);
  // Greedy visits 0.1 -> 0.7 -> 0.3 -> 0.8.
  CHECK(ord.find("greedy,1,0,") != std::string::npos);
  CHECK(ord.find("greedy,2,2,") != std::string::npos);
  CHECK(ord.find("greedy,3,1,") != std::string::npos);
  CHECK(ord.find("greedy,4,3,") != std::string::npos);
  CHECK(ord.find("perm_000,") != std::string::npos);
  CHECK(ord.find("perm_023,") != std::string::npos);
  CHECK(ord.find("perm_024,") == std::string::npos);

  cli::EntropyDemoArgs bad;
  bad.points = {0.2, 1.7};
  bad.out_dir = dir.string();
  CHECK_THROWS_AS(cli::cmd_entropy_demo(bad), ConfigError);
}

TEST_CASE("validate command reports violations through the exit code") {
  const fs::path dir = fresh_dir("validate");
  int rc = -1;
  std::string out =
      capture_stdout([&] { return cli::cmd_validate(data_file("instances/one_bus.json")); }, rc);
  CHECK(rc == 0);
  CHECK(out.find("instance is valid") != std::string::npos);

  std::string broken = read_file(data_file("instances/one_bus.json"));
  const auto pos = broken.find("0.95");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 4, "1.50");
  write_file(dir / "broken.json", broken);
  out = capture_stdout([&] { return cli::cmd_validate((dir / "broken.json").string()); }, rc);
  CHECK(rc == 1);
  CHECK(out.find("eta_c") != std::string::npos);
}

TEST_CASE("instance parsing errors identify the malformed field") {
  CHECK_THROWS_WITH_AS(parse_instance_text("{}"), "instance: missing field 'horizon'",
                       ConfigError);
  CHECK_THROWS_AS(parse_instance_text("not json"), ConfigError);

  const std::string base = read_file(data_file("instances/desk3.json"));
  {
    std::string t = base;
    const auto pos = t.find("\"b\"");
    REQUIRE(pos != std::string::npos);
    t.replace(pos, 3, "\"bb\"");
    try {
      parse_instance_text(t);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
  }
}

TEST_CASE("the command line front end dispatches and reports errors") {
  const fs::path dir = fresh_dir("front_end");
  int rc = -1;
  capture_stdout([&] { return run_argv({"validate", "--instance",
                                        data_file("instances/desk3.json")}); },
                 rc);
  CHECK(rc == 0);

  // Missing required subcommand and unknown flags exit nonzero via the parser.
  CHECK(run_argv({}) != 0);
  CHECK(run_argv({"market", "--instance", data_file("instances/one_bus.json")}) != 0);

  // Domain errors surface as exit code 1.
  capture_stdout([&] { return run_argv({"market", "--instance",
                                        data_file("instances/one_bus.json"),
                                        "--em", "9999", "--pm", "0",
                                        "--out", dir.string()}); },
                 rc);
  CHECK(rc == 1);

  capture_stdout([&] { return run_argv({"market", "--instance",
                                        data_file("instances/one_bus.json"),
                                        "--em", "0", "--pm", "0",
                                        "--out", dir.string()}); },
                 rc);
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "clearing.csv"));
}

TEST_CASE("csv helpers format numbers with twelve significant digits") {
  CHECK(fmt_g(212.5) == "212.5");
  CHECK(fmt_g(0.0) == "0");
  CHECK(fmt_g(-25.0) == "-25");
  CHECK(fmt_g(1.0 / 3.0) == "0.333333333333");

  RunTrace t;
  t.method = "random";
  t.seed = 1;
  TraceRecord rec;
  rec.iter = 1;
  rec.x = Eigen::VectorXd::Zero(2);
  rec.f = 1.5;
  rec.best_f = 1.5;
  rec.ms = 123.0;  // must not leak into the file
  t.records.push_back(rec);
  CHECK(trace_to_csv(t, 2) == "iter,method,x1,x2,f,best_f,ms\n1,random,0,0,1.5,1.5,0\n");
  CHECK_THROWS_AS(trace_to_csv(t, 3), UsageError);

  const std::vector<CompareRow> rows = {{"enumerate", 0, -25.0, 0.0, 2601, 0.0}};
  CHECK(comparison_to_csv(rows) ==
        "method,seed,best_f,rel_error,evals,ms\nenumerate,0,-25,0,2601,0\n");
}
