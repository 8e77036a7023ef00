#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpp/ground.hpp"
#include "dpp/linalg.hpp"

namespace dpp {

// Kernel in integrable form: Pi(x,y) = (A(x)B(y) - A(y)B(x))/(x-y), with the
// diagonal given by A'(x)B(x) - A(x)B'(x) in the continuous case. Discrete
// kernels may carry smooth extensions of A, B so the same diagonal rule
// applies; table-backed kernels may instead supply the diagonal directly.
struct IntegrableKernel {
  std::function<double(double)> A;
  std::function<double(double)> B;
  std::function<double(double)> dA;  // optional; required for continuous kernels
  std::function<double(double)> dB;
  std::function<double(double)> diag;  // exact diagonal Pi(x,x)
  SpaceKind domain = SpaceKind::Continuous;
  std::string name = "custom";
  // Below this |x-y| the raw quotient cancels catastrophically and a
  // symmetric midpoint expansion is used instead.
  double split_h = 1e-6;

  bool has_derivatives() const { return static_cast<bool>(dA) && static_cast<bool>(dB); }
  double eval(double x, double y) const;
};

// Finite weighted realization of the projection operator: entries
// sqrt(w_i w_j) * Pi(x_i, x_j), clipped to an exact projection.
struct ProjectionMatrix {
  GroundSpace space;
  HermitianMatrix P;
  int rank = 0;
  double quality = 0.0;  // max spectral deviation from {0,1} before clipping
};

IntegrableKernel make_sine_kernel();
IntegrableKernel make_discrete_sine_kernel(double theta);
IntegrableKernel make_custom_kernel(std::function<double(double)> A,
                                    std::function<double(double)> B,
                                    std::function<double(double)> dA = {},
                                    std::function<double(double)> dB = {},
                                    SpaceKind domain = SpaceKind::Continuous);

// Kernel backed by per-node tables (discrete domain); diagonal from dA/dB
// tables when given, otherwise diagonal evaluation raises.
IntegrableKernel kernel_from_table(std::vector<double> x, std::vector<double> A,
                                   std::vector<double> B,
                                   std::vector<double> dA = {},
                                   std::vector<double> dB = {});

// (A,B) -> (a11 A + a12 B, a21 A + a22 B) for unimodular alpha; leaves every
// kernel value unchanged.
IntegrableKernel gauge_transform(const IntegrableKernel& k,
                                 const std::array<std::array<double, 2>, 2>& alpha);

// Pushforward of a kernel under an increasing map F with derivative dF:
// (x,y) -> sqrt(dF(x) dF(y)) * Pi(F(x), F(y)). Not integrable in general,
// hence a bare evaluation closure.
using KernelFn = std::function<double(double, double)>;
KernelFn pushforward(const IntegrableKernel& k, std::function<double(double)> F,
                     std::function<double(double)> dF);

// Rebuild the weighted matrix of the pushforward kernel on the same nodes and
// clip it back to an exact projection.
ProjectionMatrix pushforward_matrix(const IntegrableKernel& k, const GroundSpace& space,
                                    const std::function<double(double)>& F,
                                    const std::function<double(double)>& dF,
                                    double clip_tol);

ProjectionMatrix discretize(const IntegrableKernel& k, const GroundSpace& space,
                            double clip_tol);

// P = V V^T for columns orthonormal in the weighted inner product
// <f,g> = sum_i w_i f(x_i) g(x_i); `frame` holds function values.
ProjectionMatrix projection_from_frame(const GroundSpace& space,
                                       const Eigen::MatrixXd& frame);

// Wrap an already-validated projection matrix (used by conditioning
// transforms, which preserve projectionness by construction).
ProjectionMatrix wrap_projection(GroundSpace space, Eigen::MatrixXd P, double tol = 1e-8);

struct AssumptionReport {
  double reproducing_residual = 0.0;  // max_q |(P f)(q) - <f, Pi(.,q)>_mu|
  double trace_residual = 0.0;        // |tr(chi_B P chi_B) - sum_B w Pi(q,q)|
};

AssumptionReport check_assumption(const IntegrableKernel& k, const GroundSpace& space,
                                  const std::vector<std::function<double(double)>>& probes,
                                  std::array<double, 2> window_b);

}  // namespace dpp
