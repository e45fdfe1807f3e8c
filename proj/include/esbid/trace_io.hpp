#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esbid/optimizer.hpp"

namespace esbid {

// Numbers in CSV output carry 12 significant digits.
std::string fmt_g(double v);

// Columns: iter,method,x1..xd,f,best_f,ms. The ms column is written as 0 so
// repeated runs of the same method and seed produce byte-identical files;
// measured wall time is reported in the run summary instead.
std::string trace_to_csv(const RunTrace& trace, int dim);
void write_trace_csv(const std::string& path, const RunTrace& trace, int dim);

struct CompareRow {
  std::string method;
  std::uint64_t seed = 0;
  double best_f = 0.0;
  double rel_error = 0.0;
  int evals = 0;
  double ms = 0.0;
};

std::string comparison_to_csv(const std::vector<CompareRow>& rows);
void write_comparison_csv(const std::string& path, const std::vector<CompareRow>& rows);

}  // namespace esbid
