#pragma once

#include <string>

#include "esbid/market.hpp"

namespace esbid {

// Parses the instance document described in the README. Malformed input
// raises ConfigError naming the offending field.
MarketInstance parse_instance_text(const std::string& text);
MarketInstance load_instance(const std::string& path);

std::string clearing_to_json(const ClearingResult& result, const MarketInstance& instance);
void write_clearing_json(const std::string& path, const ClearingResult& result,
                         const MarketInstance& instance);

// Per-period schedule: t,pc,pd,y,lambda_at_storage_bus with y the state of
// charge at the end of period t.
void write_clearing_csv(const std::string& path, const ClearingResult& result,
                        const MarketInstance& instance);

}  // namespace esbid
