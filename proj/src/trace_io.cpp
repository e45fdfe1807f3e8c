#include "esbid/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "esbid/errors.hpp"

namespace esbid {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string trace_to_csv(const RunTrace& trace, int dim) {
  if (dim < 1) throw UsageError("trace dimension must be positive");
  std::ostringstream out;
  out << "iter,method";
  for (int j = 0; j < dim; ++j) out << ",x" << (j + 1);
  out << ",f,best_f,ms\n";
  for (const TraceRecord& rec : trace.records) {
    if (rec.x.size() != dim) throw UsageError("trace record dimension mismatch");
    out << rec.iter << ',' << trace.method;
    for (int j = 0; j < dim; ++j) out << ',' << fmt_g(rec.x[j]);
    out << ',' << fmt_g(rec.f) << ',' << fmt_g(rec.best_f) << ",0\n";
  }
  return out.str();
}

void write_trace_csv(const std::string& path, const RunTrace& trace, int dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << trace_to_csv(trace, dim);
}

std::string comparison_to_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "method,seed,best_f,rel_error,evals,ms\n";
  for (const CompareRow& row : rows) {
    out << row.method << ',' << row.seed << ',' << fmt_g(row.best_f) << ','
        << fmt_g(row.rel_error) << ',' << row.evals << ',' << fmt_g(row.ms) << '\n';
  }
  return out.str();
}

void write_comparison_csv(const std::string& path, const std::vector<CompareRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << comparison_to_csv(rows);
}

}  // namespace esbid
