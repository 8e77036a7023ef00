#pragma once

#include <vector>

#include "dpp/kernels.hpp"
#include "dpp/rng.hpp"

namespace dpp {

// Precomputed eigenbasis of a projection, shared read-only across draws.
struct SampleFrame {
  GroundSpace space;
  Eigen::MatrixXd basis;  // n x r, orthonormal columns spanning the range

  static SampleFrame from_projection(const ProjectionMatrix& p);
};

// One exact draw: sequential conditional sampling on the eigenbasis. Selects
// a node proportionally to the squared row norm of the current frame, then
// rotates the frame so the chosen coordinate lives in one column and drops
// that column. O(n r^2) per draw, always exactly r points.
Configuration sample(const SampleFrame& frame, const SamplerState& state);
Configuration sample(const ProjectionMatrix& p, const SamplerState& state);

// n independent draws; draw i uses counter state.counter + i, so the batch is
// reproducible and order-independent. Parallelized over draws, with a serial
// reference used by the tests and the benchmark.
std::vector<Configuration> sample_many(const ProjectionMatrix& p, int n,
                                       const SamplerState& state);
std::vector<Configuration> sample_many_serial(const ProjectionMatrix& p, int n,
                                              const SamplerState& state);

}  // namespace dpp
