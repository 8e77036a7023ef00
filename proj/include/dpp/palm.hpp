#pragma once

#include <vector>

#include "dpp/kernels.hpp"

namespace dpp {

// Documented fault-injection switch: when enabled, the rank-1 Palm update
// uses the wrong sign. Exists solely so the verification suite can prove it
// detects single-formula corruption; never enable in normal operation.
void set_fault_flip_palm_sign(bool on);
bool fault_flip_palm_sign();

// Reduced Palm kernel at node q:
//   Pi^q(x,y) = Pi(x,y) - Pi(x,q)Pi(q,y)/Pi(q,q),
// returning the input unchanged when Pi(q,q) is degenerate (conditioning on a
// never-occupied site). Rank drops by exactly 1 otherwise.
ProjectionMatrix palm_kernel(const ProjectionMatrix& p, int q);

// Sequential Palm conditioning at distinct nodes; order-independent.
ProjectionMatrix palm_iterated(const ProjectionMatrix& p, const std::vector<int>& qs);

// Same sequential conditioning without the spectral cleanup pass; the rank-1
// updates are exact on projection input, so this is the cheap path for inner
// loops that do not need eigenvalue re-rounding.
ProjectionMatrix palm_iterated_raw(const ProjectionMatrix& p,
                                   const std::vector<int>& qs);

// Hole conditioning at node q (discrete spaces only):
//   Pi^(q-hole)(x,y) = Pi(x,y) + Pi(x,q)Pi(q,y)/(1 - Pi(q,q)), q-row/col zeroed.
// Throws when Pi(q,q)=1: the process almost surely has a particle at q.
ProjectionMatrix hole_kernel(const ProjectionMatrix& p, int q);

// Mixed conditioning: particles at the first list, holes at the second.
// Rejects configurations where a nonzero function of the range is supported
// on the conditioned points (the subspace definition would collapse).
ProjectionMatrix conditional_kernel(const ProjectionMatrix& p,
                                    const std::vector<int>& particles,
                                    const std::vector<int>& holes);

// Integrable (A,B) form of the Palm kernel at q (requires Pi(q,q) != 0).
IntegrableKernel palm_integrable_form(const IntegrableKernel& k, double q);

// Integrable (A,B) form of the hole kernel at q (discrete; Pi(q,q) != 1).
IntegrableKernel hole_integrable_form(const IntegrableKernel& k, double q);

// Palm conditioning at an arbitrary (possibly off-node) point of a continuous
// window, using kernel evaluations for the rank-1 update. Returns the raw
// updated weighted matrix.
Eigen::MatrixXd palm_offnode(const Eigen::MatrixXd& p, const IntegrableKernel& k,
                             const GroundSpace& space, double q);

// Max-entry error of the discrete subspace relation: multiplying the range of
// the (particle q, hole p) kernel by chi_{E \ {p,q}} (x-p)/(x-q) must give the
// range of the (particle p, hole q) kernel.
double subspace_relation_discrete_error(const ProjectionMatrix& p, int pi, int qi);

// Max-entry error of the continuous subspace relation with off-node points:
// multiplying an orthonormal basis of the iterated Palm range at {q_i} by
// prod (x - p_i)/(x - q_i) and re-orthonormalizing must give the iterated
// Palm range at {p_i}.
double subspace_relation_continuous_error(const ProjectionMatrix& p,
                                          const IntegrableKernel& k,
                                          const std::vector<double>& ps,
                                          const std::vector<double>& qs);

}  // namespace dpp
