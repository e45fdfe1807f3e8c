#include "esbid/market_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "esbid/errors.hpp"

namespace esbid {

using nlohmann::json;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const json& need(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ctx + ": missing field '" + key + "'");
  return *it;
}

double need_num(const json& obj, const char* key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_number()) throw ConfigError(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int need_int(const json& obj, const char* key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_number_integer()) throw ConfigError(ctx + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

MarketInstance parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("instance: invalid JSON: ") + e.what());
  }

  MarketInstance inst;
  inst.horizon = need_int(doc, "horizon", "instance");

  const json& net = need(doc, "network", "instance");
  inst.network.reference_bus = need_int(net, "reference_bus", "network");
  const json& lines = need(net, "lines", "network");
  if (!lines.is_array()) throw ConfigError("network: field 'lines' must be an array");
  int max_bus = inst.network.reference_bus;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string ctx = "network.lines[" + std::to_string(k) + "]";
    const json& lj = lines[k];
    Line line;
    line.from = need_int(lj, "from", ctx);
    line.to = need_int(lj, "to", ctx);
    line.b = need_num(lj, "b", ctx);
    line.F = need_num(lj, "F", ctx);
    max_bus = std::max({max_bus, line.from, line.to});
    inst.network.lines.push_back(line);
  }

  const json& gens = need(doc, "generators", "instance");
  if (!gens.is_array()) throw ConfigError("instance: field 'generators' must be an array");
  if (gens.empty()) throw ConfigError("instance: field 'generators' must not be empty");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const std::string ctx = "generators[" + std::to_string(k) + "]";
    const json& gj = gens[k];
    Generator g;
    g.bus = need_int(gj, "bus", ctx);
    g.c = need_num(gj, "c", ctx);
    g.o = need_num(gj, "o", ctx);
    g.P = need_num(gj, "P", ctx);
    g.K = need_num(gj, "K", ctx);
    max_bus = std::max(max_bus, g.bus);
    inst.generators.push_back(g);
  }

  const json& storage = need(doc, "storage", "instance");
  inst.storage.bus = need_int(storage, "bus", "storage");
  inst.storage.E_max = need_num(storage, "E_max", "storage");
  inst.storage.P_max = need_num(storage, "P_max", "storage");
  inst.storage.eta_c = need_num(storage, "eta_c", "storage");
  inst.storage.eta_d = need_num(storage, "eta_d", "storage");
  inst.storage.y_init = need_num(storage, "y_init", "storage");
  max_bus = std::max(max_bus, inst.storage.bus);

  const json& loads = need(doc, "loads", "instance");
  if (!loads.is_array() || loads.empty())
    throw ConfigError("instance: field 'loads' must be a non-empty array of per-bus rows");
  const int bus_count = static_cast<int>(loads.size());
  if (bus_count < max_bus + 1)
    throw ConfigError("instance: 'loads' has " + std::to_string(bus_count) +
                      " rows but bus index " + std::to_string(max_bus) + " is referenced");
  inst.network.bus_count = bus_count;
  if (inst.horizon < 1) throw ConfigError("instance: field 'horizon' must be at least 1");
  inst.loads.resize(bus_count, inst.horizon);
  for (int i = 0; i < bus_count; ++i) {
    const std::string ctx = "loads[" + std::to_string(i) + "]";
    const json& row = loads[i];
    if (!row.is_array() || static_cast<int>(row.size()) != inst.horizon)
      throw ConfigError(ctx + ": expected an array of " + std::to_string(inst.horizon) +
                        " values");
    for (int t = 0; t < inst.horizon; ++t) {
      if (!row[t].is_number())
        throw ConfigError(ctx + "[" + std::to_string(t) + "]: must be a number");
      inst.loads(i, t) = row[t].get<double>();
    }
  }

  return inst;
}

MarketInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("instance: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance_text(ss.str());
}

std::string clearing_to_json(const ClearingResult& result, const MarketInstance& instance) {
  const int T = instance.horizon;
  const int sb = instance.storage.bus;
  json doc;
  doc["total_cost"] = result.total_cost;
  doc["storage_profit"] = storage_profit(result, instance);
  doc["node_count"] = result.node_count;
  json periods = json::array();
  for (int t = 0; t < T; ++t) {
    json pt;
    pt["t"] = t + 1;
    pt["pc"] = result.pc[t];
    pt["pd"] = result.pd[t];
    pt["zc"] = result.zc[t];
    pt["zd"] = result.zd[t];
    pt["y"] = result.y[t + 1];
    pt["lambda"] = json::array();
    for (int i = 0; i < instance.bus_count(); ++i) pt["lambda"].push_back(result.lambda(i, t));
    pt["lambda_storage"] = result.lambda(sb, t);
    json gen = json::array();
    for (std::size_t g = 0; g < instance.generators.size(); ++g)
      gen.push_back(result.p(static_cast<int>(g), t));
    pt["p"] = gen;
    periods.push_back(pt);
  }
  doc["periods"] = periods;
  return doc.dump(2) + "\n";
}

void write_clearing_json(const std::string& path, const ClearingResult& result,
                         const MarketInstance& instance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << clearing_to_json(result, instance);
}

void write_clearing_csv(const std::string& path, const ClearingResult& result,
                        const MarketInstance& instance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  const int sb = instance.storage.bus;
  out << "t,pc,pd,y,lambda_at_storage_bus\n";
  for (int t = 0; t < instance.horizon; ++t) {
    out << (t + 1) << ',' << fmt_g(result.pc[t]) << ',' << fmt_g(result.pd[t]) << ','
        << fmt_g(result.y[t + 1]) << ',' << fmt_g(result.lambda(sb, t)) << '\n';
  }
}

}  // namespace esbid
