#include "dpp/palm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dpp {

namespace {

constexpr double kDegenTol = 1e-10;

bool g_fault_flip_palm_sign = false;

int rank_from_trace(const Eigen::MatrixXd& m) {
  return std::max(0, static_cast<int>(std::lround(m.trace())));
}

// Rank-1 Palm update on the weighted matrix. The weighted entries satisfy
// P(x,q)P(q,y)/P(q,q) = sqrt(w_x w_y) Pi(x,q)Pi(q,y)/Pi(q,q), so the update
// can be done directly on P.
void palm_update(Eigen::MatrixXd& m, const GroundSpace& space, int q) {
  const double d = m(q, q) / space.weights[static_cast<std::size_t>(q)];
  if (d <= kDegenTol) return;  // never-occupied site: conditioning is a no-op
  const Eigen::VectorXd col = m.col(q);
  const double sign = g_fault_flip_palm_sign ? 1.0 : -1.0;
  m += sign * (col * col.transpose()) / m(q, q);
}

void hole_update(Eigen::MatrixXd& m, const GroundSpace& space, int q) {
  if (space.kind != SpaceKind::Discrete) {
    throw std::invalid_argument("hole conditioning is defined on discrete spaces only");
  }
  const double d = m(q, q);
  if (1.0 - d <= kDegenTol) {
    throw std::invalid_argument(
        "hole conditioning impossible: Pi(q,q)=1, the process almost surely has a "
        "particle at node " + std::to_string(q));
  }
  const Eigen::VectorXd col = m.col(q);
  m += (col * col.transpose()) / (1.0 - d);
  m.row(q).setZero();
  m.col(q).setZero();
}

void check_node(const ProjectionMatrix& p, int q) {
  if (q < 0 || q >= p.space.size()) {
    throw std::invalid_argument("conditioning point " + std::to_string(q) +
                                " is not a node of the ground space");
  }
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  int r = 0;
  for (int i = 0; i < m.rows(); ++i) {
    if (es.eigenvalues()(i) > 0.5) ++r;
  }
  Eigen::MatrixXd basis(m.rows(), r);
  int c = 0;
  for (int i = 0; i < m.rows(); ++i) {
    if (es.eigenvalues()(i) > 0.5) basis.col(c++) = es.eigenvectors().col(i);
  }
  return basis;
}

Eigen::MatrixXd orthonormal_projection(const Eigen::MatrixXd& columns) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(columns);
  Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(columns.rows(), columns.cols());
  return thin_q * thin_q.transpose();
}

}  // namespace

void set_fault_flip_palm_sign(bool on) { g_fault_flip_palm_sign = on; }
bool fault_flip_palm_sign() { return g_fault_flip_palm_sign; }

ProjectionMatrix palm_kernel(const ProjectionMatrix& p, int q) {
  check_node(p, q);
  Eigen::MatrixXd m = p.P.mat();
  palm_update(m, p.space, q);
  const int rank = rank_from_trace(m);
  return ProjectionMatrix{p.space, HermitianMatrix(std::move(m), 1e-8), rank, p.quality};
}

ProjectionMatrix palm_iterated(const ProjectionMatrix& p, const std::vector<int>& qs) {
  std::set<int> seen(qs.begin(), qs.end());
  if (seen.size() != qs.size()) {
    throw std::invalid_argument("palm_iterated: conditioning points must be distinct");
  }
  Eigen::MatrixXd m = p.P.mat();
  for (int q : qs) {
    check_node(p, q);
    palm_update(m, p.space, q);
  }
  // One cleanup pass after all rank-1 updates; order-independence is then a
  // genuine numerical property rather than a construction artifact.
  HermitianMatrix clipped = project_clip(HermitianMatrix(std::move(m), 1e-8), 1e-6);
  const int rank = rank_from_trace(clipped.mat());
  return ProjectionMatrix{p.space, std::move(clipped), rank, p.quality};
}

ProjectionMatrix palm_iterated_raw(const ProjectionMatrix& p,
                                   const std::vector<int>& qs) {
  std::set<int> seen(qs.begin(), qs.end());
  if (seen.size() != qs.size()) {
    throw std::invalid_argument("palm_iterated_raw: conditioning points must be distinct");
  }
  Eigen::MatrixXd m = p.P.mat();
  for (int q : qs) {
    check_node(p, q);
    palm_update(m, p.space, q);
  }
  HermitianMatrix h(std::move(m), 1e-8);
  const int rank = rank_from_trace(h.mat());
  return ProjectionMatrix{p.space, std::move(h), rank, p.quality};
}

ProjectionMatrix hole_kernel(const ProjectionMatrix& p, int q) {
  check_node(p, q);
  Eigen::MatrixXd m = p.P.mat();
  hole_update(m, p.space, q);
  const int rank = rank_from_trace(m);
  return ProjectionMatrix{p.space, HermitianMatrix(std::move(m), 1e-8), rank, p.quality};
}

ProjectionMatrix conditional_kernel(const ProjectionMatrix& p,
                                    const std::vector<int>& particles,
                                    const std::vector<int>& holes) {
  std::set<int> seen;
  for (int q : particles) seen.insert(q);
  for (int q : holes) seen.insert(q);
  if (seen.size() != particles.size() + holes.size()) {
    throw std::invalid_argument("conditional_kernel: conditioning points must be distinct");
  }
  if (seen.empty()) return p;
  for (int q : seen) check_node(p, q);
  // Support obstruction: a nonzero function of the range supported on the
  // conditioned set would make the target subspace ill-defined. Such a
  // function exists iff the conditioned columns of I - P are dependent.
  const int n = p.space.size();
  Eigen::MatrixXd compl_block(n, static_cast<int>(seen.size()));
  int c = 0;
  for (int q : seen) {
    compl_block.col(c) = -p.P.mat().col(q);
    compl_block(q, c) += 1.0;
    ++c;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(compl_block);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin < 1e-8) {
    throw std::invalid_argument(
        "conditional_kernel: a function of the range is supported on the conditioned "
        "points (smallest singular value " + std::to_string(smin) + ")");
  }
  Eigen::MatrixXd m = p.P.mat();
  for (int q : particles) palm_update(m, p.space, q);
  for (int q : holes) hole_update(m, p.space, q);
  HermitianMatrix clipped = project_clip(HermitianMatrix(std::move(m), 1e-8), 1e-6);
  const int rank = rank_from_trace(clipped.mat());
  return ProjectionMatrix{p.space, std::move(clipped), rank, p.quality};
}

namespace {

// d/dx Pi(x,q), switching to a centered difference when the quotient rule
// would cancel catastrophically near q.
double eval_dx(const IntegrableKernel& k, double x, double q) {
  const double d = x - q;
  const double h = std::max(k.split_h, 1e-7);
  if (std::abs(d) >= h) {
    const double num_dx = k.dA(x) * k.B(q) - k.A(q) * k.dB(x);
    return (num_dx - k.eval(x, q)) / d;
  }
  return (k.eval(x + h, q) - k.eval(x - h, q)) / (2.0 * h);
}

}  // namespace

IntegrableKernel palm_integrable_form(const IntegrableKernel& k, double q) {
  const double piqq = k.eval(q, q);
  if (piqq <= kDegenTol) {
    throw std::invalid_argument("palm_integrable_form: Pi(q,q) vanishes at q=" +
                                std::to_string(q));
  }
  const double aq = k.A(q);
  const double bq = k.B(q);
  const double nq = std::sqrt(aq * aq + bq * bq);
  IntegrableKernel out;
  out.domain = k.domain;
  out.name = k.name + "^palm";
  out.split_h = k.split_h;
  out.A = [k, aq, bq, nq](double x) { return (k.A(x) * bq - aq * k.B(x)) / nq; };
  out.B = [k, aq, bq, nq, piqq, q](double x) {
    return (k.A(x) * aq + k.B(x) * bq) / nq - nq * k.eval(x, q) / piqq;
  };
  out.diag = [k, piqq, q](double x) {
    const double v = k.eval(x, q);
    return k.eval(x, x) - v * v / piqq;
  };
  if (k.has_derivatives()) {
    out.dA = [k, aq, bq, nq](double x) { return (k.dA(x) * bq - aq * k.dB(x)) / nq; };
    out.dB = [k, aq, bq, nq, piqq, q](double x) {
      return (k.dA(x) * aq + k.dB(x) * bq) / nq - nq * eval_dx(k, x, q) / piqq;
    };
  }
  return out;
}

IntegrableKernel hole_integrable_form(const IntegrableKernel& k, double q) {
  if (k.domain != SpaceKind::Discrete) {
    throw std::invalid_argument("hole_integrable_form: discrete kernels only");
  }
  const double piqq = k.eval(q, q);
  if (1.0 - piqq <= kDegenTol) {
    throw std::invalid_argument("hole_integrable_form: Pi(q,q)=1 at q=" +
                                std::to_string(q));
  }
  const double aq = k.A(q);
  const double bq = k.B(q);
  const double nq = std::sqrt(aq * aq + bq * bq);
  IntegrableKernel out;
  out.domain = SpaceKind::Discrete;
  out.name = k.name + "^hole";
  out.split_h = k.split_h;
  out.A = [k, aq, bq, nq, q](double x) {
    if (x == q) return 0.0;
    return (k.A(x) * bq - aq * k.B(x)) / nq;
  };
  out.B = [k, aq, bq, nq, piqq, q](double x) {
    if (x == q) return 0.0;
    return (k.A(x) * aq + k.B(x) * bq) / nq + nq * k.eval(x, q) / (1.0 - piqq);
  };
  out.diag = [k, piqq, q](double x) {
    if (x == q) return 0.0;
    const double v = k.eval(x, q);
    return k.eval(x, x) + v * v / (1.0 - piqq);
  };
  return out;
}

Eigen::MatrixXd palm_offnode(const Eigen::MatrixXd& p, const IntegrableKernel& k,
                             const GroundSpace& space, double q) {
  const double d = k.eval(q, q);
  if (d <= kDegenTol) return p;
  const int n = space.size();
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) {
    u(i) = std::sqrt(space.weights[i]) * k.eval(space.points[i], q);
  }
  return p - (u * u.transpose()) / d;
}

double subspace_relation_discrete_error(const ProjectionMatrix& p, int pi, int qi) {
  const ProjectionMatrix from = conditional_kernel(p, {qi}, {pi});
  const ProjectionMatrix to = conditional_kernel(p, {pi}, {qi});
  Eigen::MatrixXd basis = range_basis(from.P.mat());
  const double xp = p.space.points[static_cast<std::size_t>(pi)];
  const double xq = p.space.points[static_cast<std::size_t>(qi)];
  for (int i = 0; i < p.space.size(); ++i) {
    const double factor =
        (i == pi || i == qi) ? 0.0 : (p.space.points[i] - xp) / (p.space.points[i] - xq);
    basis.row(i) *= factor;
  }
  return (orthonormal_projection(basis) - to.P.mat()).cwiseAbs().maxCoeff();
}

double subspace_relation_continuous_error(const ProjectionMatrix& p,
                                          const IntegrableKernel& k,
                                          const std::vector<double>& ps,
                                          const std::vector<double>& qs) {
  if (ps.size() != qs.size()) {
    throw std::invalid_argument("subspace relation: point lists must have equal length");
  }
  // Sequential off-node conditioning: each rank-1 update must use the kernel
  // already conditioned at the previous points, so the integrable Palm form
  // is advanced alongside the matrix.
  const auto iterate = [&p](const IntegrableKernel& k0, const std::vector<double>& pts) {
    Eigen::MatrixXd m = p.P.mat();
    IntegrableKernel cur = k0;
    for (double q : pts) {
      m = palm_offnode(m, cur, p.space, q);
      cur = palm_integrable_form(cur, q);
    }
    return m;
  };
  const Eigen::MatrixXd at_q = iterate(k, qs);
  const Eigen::MatrixXd at_p = iterate(k, ps);
  Eigen::MatrixXd basis = range_basis(at_q);
  for (int i = 0; i < p.space.size(); ++i) {
    double factor = 1.0;
    const double x = p.space.points[i];
    for (std::size_t j = 0; j < ps.size(); ++j) {
      factor *= (x - ps[j]) / (x - qs[j]);
    }
    basis.row(i) *= factor;
  }
  return (orthonormal_projection(basis) - at_p).cwiseAbs().maxCoeff();
}

}  // namespace dpp
