#pragma once

#include <string>
#include <vector>

#include "dpp/json_fwd.hpp"
#include "dpp/kernels.hpp"
#include "dpp/oracle.hpp"

namespace dpp {

// Projection container: one line of JSON header {n, rank, space} followed by
// a newline and n*n little-endian doubles, row-major.
void save_projection(const std::string& path, const ProjectionMatrix& p);
ProjectionMatrix load_projection(const std::string& path);

// Draw batches: one configuration per row, comma-separated node indices;
// empty row for an empty configuration.
void save_draws(const std::string& path, const std::vector<Configuration>& draws);
std::vector<Configuration> load_draws(const std::string& path);

// Kernel tables: CSV with header x,A,B or x,A,B,dA,dB.
struct KernelTable {
  std::vector<double> x;
  IntegrableKernel kernel;
};
KernelTable load_kernel_table(const std::string& path);

// Atomic text write: stage to a temporary file, then rename into place.
void write_text_atomic(const std::string& path, const std::string& content);

// 17 significant digits: enough for exact double round-trips.
std::string format_double(double v);

}  // namespace dpp
