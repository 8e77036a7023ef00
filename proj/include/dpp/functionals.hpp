#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dpp/json_fwd.hpp"
#include "dpp/kernels.hpp"
#include "dpp/palm.hpp"

namespace dpp {

// A scalar function g (or f) on the ground space with exclusion points whose
// factor is forced to 1 and a truncation schedule (R, eps) per stage
// (discrete instances use eps = 0).
struct FunctionalSpec {
  std::function<double(double)> values;
  std::vector<double> exclusions;
  std::vector<std::pair<double, double>> schedule;  // (R, eps), R increasing, eps decreasing
};

// Linked truncation schedule R_k = R0 * 2^k, eps_k = eps0 * 2^-k.
std::vector<std::pair<double, double>> make_schedule(double r0, double eps0, int stages);

// E S_f = sum f(x) Pi(x,x) dmu(x).
double additive_expectation(const FunctionalSpec& f, const ProjectionMatrix& p);

// Var(Pi, f) = 1/2 * integral |f(x)-f(y)|^2 |Pi(x,y)|^2 dmu dmu.
double additive_variance(const FunctionalSpec& f, const ProjectionMatrix& p);
double additive_variance_serial(const FunctionalSpec& f, const ProjectionMatrix& p);

// E Psi_g = det(1 + (g-1) P); the real form of det(1 + sqrt(g-1) P sqrt(g-1)).
double multiplicative_expectation(const FunctionalSpec& g, const ProjectionMatrix& p);

// Same expectation through the three-band factorization g = g1 g2 g3
// (band around 1, small-g part, large-g part), each factor integrated under
// the successively transformed kernel. Agrees with the direct determinant.
struct StagedExpectation {
  double value = 1.0;
  std::array<double, 3> factors{1.0, 1.0, 1.0};
};
StagedExpectation staged_multiplicative_expectation(const FunctionalSpec& g,
                                                    const ProjectionMatrix& p);

// P^g = sqrt(g) P (1 + (g-1)P)^-1 sqrt(g): projection onto sqrt(g) L.
ProjectionMatrix transformed_kernel(const FunctionalSpec& g, const ProjectionMatrix& p);

// ((P^g1)^g2)^g3 for the same three-band split; equals transformed_kernel.
ProjectionMatrix transformed_kernel_staged(const FunctionalSpec& g,
                                           const ProjectionMatrix& p);

// Max violation of P^g(q,q) <= g(q) ||(1+(g-1)P)^-1|| P(q,q) over nodes
// (0 when the bound holds everywhere).
double diagonal_bound_check(const FunctionalSpec& g, const ProjectionMatrix& p);

struct TruncationStage {
  double R = 0.0;
  double eps = 0.0;
  double C = 1.0;    // normalization 1/E[Psi_(g truncated)]
  double psi = 1.0;  // normalized functional value at this stage
};

struct RegularizedResult {
  double value = 1.0;  // final-stage psi
  std::vector<TruncationStage> stages;
};

// Normalized multiplicative functional: per stage, C(R,eps) times the product
// of the truncated g over the particles of X, with C computed by determinant
// under the conditioning kernel p_cond.
RegularizedResult regularized_mult_functional(const FunctionalSpec& g,
                                              const ProjectionMatrix& p_cond,
                                              const Configuration& x);

// Centered additive functional S_f(X) - E S_f; with a schedule, per-stage
// values of the truncated family f * chi_{|x|<=R}.
double normalized_additive(const FunctionalSpec& f, const ProjectionMatrix& p,
                           const Configuration& x);
std::vector<std::pair<double, double>> normalized_additive_stages(
    const FunctionalSpec& f, const ProjectionMatrix& p, const Configuration& x);

struct RNReport {
  double value = 1.0;
  double psi_bar = 1.0;
  double det_ratio = 1.0;
  double density_ratio = 1.0;
  std::vector<TruncationStage> stages;

  nlohmann::json to_json() const;
};

// P(particles subset X, holes disjoint from X) as a signed determinant:
// (-1)^#holes * det of the (particles+holes) block of P with 1 subtracted on
// the hole diagonal. Discrete spaces.
double cyl_prob(const ProjectionMatrix& p, const std::vector<int>& particles,
                const std::vector<int>& holes);

// Radon-Nikodym derivative of the law under the permutation sigma of the
// nodes pts (first m occupied in X, the rest vacant), evaluated at X.
// sigma[i] gives the position of the image of pts[i] within pts.
RNReport rn_permutation(const ProjectionMatrix& p, const std::vector<int>& pts, int m,
                        const std::vector<int>& sigma, const Configuration& x);

// Transposition special case with the four-way case split resolved from X.
RNReport rn_transposition(const ProjectionMatrix& p, int pnode, int qnode,
                          const Configuration& x);

// Radon-Nikodym derivative under a diffeomorphism F supported in the window v
// (identity outside), evaluated at X; image points may lie off the grid.
RNReport rn_diffeo(const IntegrableKernel& k, const ProjectionMatrix& p,
                   const std::function<double(double)>& f_map,
                   const std::function<double(double)>& df_map,
                   std::array<double, 2> v, const Configuration& x,
                   const std::vector<std::pair<double, double>>& schedule);

}  // namespace dpp
