#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpp/functionals.hpp"
#include "dpp/json_fwd.hpp"
#include "dpp/kernels.hpp"

namespace dpp {

// Exact law of a projection process on <= 24 points: probability det(P_S)
// for every r-subset S, keyed by bitmask.
struct EnumeratedLaw {
  int n = 0;
  int r = 0;
  std::vector<std::pair<std::uint32_t, double>> probs;  // sorted by mask

  double prob(std::uint32_t mask) const;
  double total() const;
};

EnumeratedLaw enumerate_law(const ProjectionMatrix& p);
EnumeratedLaw enumerate_law_serial(const ProjectionMatrix& p);

// Condition on the cylinder event (all particles present, all holes absent),
// renormalize, and erase the conditioned particles.
EnumeratedLaw conditional_law(const EnumeratedLaw& law, const std::vector<int>& particles,
                              const std::vector<int>& holes);

double total_variation(const EnumeratedLaw& a, const EnumeratedLaw& b);

struct CheckReport {
  std::string check;
  std::string instance;
  std::string metric;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Reduced Palm measure vs the Palm kernel's law (TV distance).
CheckReport check_palm(const ProjectionMatrix& p, int q);

// Hole-conditioned measure vs the hole kernel's law, including the
// impossible-event branch at Pi(q,q)=1.
CheckReport check_hole(const ProjectionMatrix& p, int q);

// Psi_g-reweighted law vs the law of the transformed kernel, plus the
// enumerated normalizer vs the determinant formula.
CheckReport check_mult(const ProjectionMatrix& p, const FunctionalSpec& g);

// Exact Radon-Nikodym check: for every positive-probability X, the law ratio
// under the permutation of the nodes `pts` (perm[i] = image index within pts)
// vs the closed-form value. Reports the max relative error.
CheckReport check_rn(const ProjectionMatrix& p, const std::vector<int>& pts,
                     const std::vector<int>& perm);

// Standard-error-based comparison of a Monte Carlo sample mean with a target.
struct MCReport {
  double mean = 0.0;
  double stderr_ = 0.0;
  double target = 0.0;
  double sigmas = 0.0;  // |mean - target| / stderr
  bool pass = false;
};

MCReport mc_compare(const std::vector<double>& values, double target, double sigma_mult);

// Deterministic random instances for verification suites.
// Generic rank-r frame projection (gaussian frame, orthonormalized).
ProjectionMatrix random_frame_projection(const GroundSpace& space, int r,
                                         std::uint64_t seed, std::uint64_t stream);
// Frame of the form h(x) * {1, x, ..., x^(r-1)} with random positive h:
// these carry an integrable (Christoffel-Darboux type) structure, which the
// closed-form Radon-Nikodym identities require.
ProjectionMatrix poly_frame_projection(const GroundSpace& space, int r,
                                       std::uint64_t seed, std::uint64_t stream);

}  // namespace dpp
