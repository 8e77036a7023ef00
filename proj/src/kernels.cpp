#include "dpp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpp {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::function<double(double)> table_lookup(std::vector<double> x, std::vector<double> v,
                                           const char* what) {
  if (x.size() != v.size()) {
    throw std::invalid_argument(std::string("kernel table: ") + what +
                                " column length mismatch");
  }
  return [x = std::move(x), v = std::move(v), what](double q) {
    auto it = std::lower_bound(x.begin(), x.end(), q - 1e-9);
    if (it == x.end() || std::abs(*it - q) > 1e-9) {
      throw std::invalid_argument(std::string("kernel table: ") + what +
                                  " not tabulated at x=" + std::to_string(q));
    }
    return v[static_cast<std::size_t>(it - x.begin())];
  };
}

}  // namespace

double IntegrableKernel::eval(double x, double y) const {
  const double d = x - y;
  if (d == 0.0) {
    if (diag) return diag(x);
    throw std::invalid_argument("kernel '" + name + "': diagonal value unavailable");
  }
  if (domain == SpaceKind::Continuous && std::abs(d) < split_h) {
    if (!has_derivatives()) {
      throw std::invalid_argument("kernel '" + name +
                                  "': near-diagonal evaluation needs derivatives");
    }
    // Symmetric expansion about the midpoint: the quotient equals
    // A'(m)B(m) - A(m)B'(m) + O((x-y)^2), with no cancellation.
    const double m = 0.5 * (x + y);
    return dA(m) * B(m) - A(m) * dB(m);
  }
  return (A(x) * B(y) - A(y) * B(x)) / d;
}

IntegrableKernel make_sine_kernel() {
  IntegrableKernel k;
  const double s = 1.0 / std::sqrt(kPi);
  k.A = [s](double x) { return s * std::sin(kPi * x); };
  k.B = [s](double x) { return s * std::cos(kPi * x); };
  k.dA = [s](double x) { return s * kPi * std::cos(kPi * x); };
  k.dB = [s](double x) { return -s * kPi * std::sin(kPi * x); };
  k.diag = [](double) { return 1.0; };
  k.domain = SpaceKind::Continuous;
  k.name = "sine";
  return k;
}

IntegrableKernel make_discrete_sine_kernel(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("discrete_sine: density theta must lie in (0,1)");
  }
  IntegrableKernel k;
  const double s = 1.0 / std::sqrt(kPi);
  k.A = [s, theta](double x) { return s * std::sin(kPi * theta * x); };
  k.B = [s, theta](double x) { return s * std::cos(kPi * theta * x); };
  k.dA = [s, theta](double x) { return s * kPi * theta * std::cos(kPi * theta * x); };
  k.dB = [s, theta](double x) { return -s * kPi * theta * std::sin(kPi * theta * x); };
  k.diag = [theta](double) { return theta; };
  k.domain = SpaceKind::Discrete;
  k.name = "discrete_sine";
  return k;
}

IntegrableKernel make_custom_kernel(std::function<double(double)> A,
                                    std::function<double(double)> B,
                                    std::function<double(double)> dA,
                                    std::function<double(double)> dB,
                                    SpaceKind domain) {
  if (!A || !B) throw std::invalid_argument("custom kernel: A and B are required");
  if (domain == SpaceKind::Continuous && (!dA || !dB)) {
    throw std::invalid_argument("custom kernel: continuous domain requires dA, dB");
  }
  IntegrableKernel k;
  k.A = std::move(A);
  k.B = std::move(B);
  k.dA = std::move(dA);
  k.dB = std::move(dB);
  if (k.has_derivatives()) {
    k.diag = [A = k.A, B = k.B, dA = k.dA, dB = k.dB](double x) {
      return dA(x) * B(x) - A(x) * dB(x);
    };
  }
  k.domain = domain;
  k.name = "custom";
  return k;
}

IntegrableKernel kernel_from_table(std::vector<double> x, std::vector<double> A,
                                   std::vector<double> B, std::vector<double> dA,
                                   std::vector<double> dB) {
  IntegrableKernel k;
  k.A = table_lookup(x, std::move(A), "A");
  k.B = table_lookup(x, std::move(B), "B");
  if (!dA.empty() || !dB.empty()) {
    k.dA = table_lookup(x, std::move(dA), "dA");
    k.dB = table_lookup(x, std::move(dB), "dB");
    k.diag = [A = k.A, B = k.B, dA = k.dA, dB = k.dB](double q) {
      return dA(q) * B(q) - A(q) * dB(q);
    };
  }
  k.domain = SpaceKind::Discrete;
  k.name = "table";
  return k;
}

IntegrableKernel gauge_transform(const IntegrableKernel& k,
                                 const std::array<std::array<double, 2>, 2>& alpha) {
  const double det = alpha[0][0] * alpha[1][1] - alpha[0][1] * alpha[1][0];
  if (std::abs(det - 1.0) > 1e-12) {
    throw std::invalid_argument("gauge_transform: matrix must be unimodular, det=" +
                                std::to_string(det));
  }
  IntegrableKernel out = k;
  out.A = [a = alpha[0][0], b = alpha[0][1], A = k.A, B = k.B](double x) {
    return a * A(x) + b * B(x);
  };
  out.B = [c = alpha[1][0], d = alpha[1][1], A = k.A, B = k.B](double x) {
    return c * A(x) + d * B(x);
  };
  if (k.has_derivatives()) {
    out.dA = [a = alpha[0][0], b = alpha[0][1], dA = k.dA, dB = k.dB](double x) {
      return a * dA(x) + b * dB(x);
    };
    out.dB = [c = alpha[1][0], d = alpha[1][1], dA = k.dA, dB = k.dB](double x) {
      return c * dA(x) + d * dB(x);
    };
  }
  return out;
}

KernelFn pushforward(const IntegrableKernel& k, std::function<double(double)> F,
                     std::function<double(double)> dF) {
  return [k, F = std::move(F), dF = std::move(dF)](double x, double y) {
    const double dx = dF(x);
    const double dy = dF(y);
    if (!(dx > 0.0) || !(dy > 0.0)) {
      throw std::invalid_argument("pushforward: dF must be positive");
    }
    return std::sqrt(dx * dy) * k.eval(F(x), F(y));
  };
}

namespace {

ProjectionMatrix clip_weighted(const GroundSpace& space, Eigen::MatrixXd raw,
                               double clip_tol) {
  HermitianMatrix h(std::move(raw), 1e-9);
  const auto sd = eigendecompose(h);
  double quality = 0.0;
  int rank = 0;
  for (int i = 0; i < h.dim(); ++i) {
    const double lam = sd.eigenvalues(i);
    quality = std::max(quality, std::min(std::abs(lam), std::abs(lam - 1.0)));
    if (lam > 0.5) ++rank;
  }
  ProjectionMatrix out{space, project_clip(h, clip_tol), rank, quality};
  return out;
}

}  // namespace

ProjectionMatrix discretize(const IntegrableKernel& k, const GroundSpace& space,
                            double clip_tol) {
  if (k.domain != space.kind) {
    throw std::invalid_argument("discretize: kernel domain does not match space kind");
  }
  const int n = space.size();
  IntegrableKernel kk = k;
  if (space.kind == SpaceKind::Continuous) {
    kk.split_h = 1e-6 * space.width();
  }
  Eigen::MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i) {
    raw(i, i) = space.weights[i] * kk.eval(space.points[i], space.points[i]);
    for (int j = i + 1; j < n; ++j) {
      const double v = std::sqrt(space.weights[i] * space.weights[j]) *
                       kk.eval(space.points[i], space.points[j]);
      raw(i, j) = v;
      raw(j, i) = v;
    }
  }
  return clip_weighted(space, std::move(raw), clip_tol);
}

ProjectionMatrix pushforward_matrix(const IntegrableKernel& k, const GroundSpace& space,
                                    const std::function<double(double)>& F,
                                    const std::function<double(double)>& dF,
                                    double clip_tol) {
  const int n = space.size();
  IntegrableKernel kk = k;
  if (space.kind == SpaceKind::Continuous) {
    kk.split_h = 1e-6 * space.width();
  }
  auto pf = pushforward(kk, F, dF);
  Eigen::MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = std::sqrt(space.weights[i] * space.weights[j]) *
                       pf(space.points[i], space.points[j]);
      raw(i, j) = v;
      raw(j, i) = v;
    }
  }
  return clip_weighted(space, std::move(raw), clip_tol);
}

ProjectionMatrix projection_from_frame(const GroundSpace& space,
                                       const Eigen::MatrixXd& frame) {
  const int n = space.size();
  if (frame.rows() != n) {
    throw std::invalid_argument("projection_from_frame: frame rows must match space size");
  }
  Eigen::VectorXd sw(n);
  for (int i = 0; i < n; ++i) sw(i) = std::sqrt(space.weights[i]);
  Eigen::MatrixXd vw = sw.asDiagonal() * frame;
  const Eigen::MatrixXd gram = vw.transpose() * vw;
  const double dev =
      (gram - Eigen::MatrixXd::Identity(frame.cols(), frame.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    throw std::invalid_argument(
        "projection_from_frame: columns not orthonormal in the weighted inner product, "
        "deviation " + std::to_string(dev));
  }
  ProjectionMatrix out{space, HermitianMatrix(vw * vw.transpose(), 1e-10),
                       static_cast<int>(frame.cols()), 0.0};
  return out;
}

ProjectionMatrix wrap_projection(GroundSpace space, Eigen::MatrixXd P, double tol) {
  HermitianMatrix h(std::move(P), tol);
  const double trace = h.mat().trace();
  const double idem = (h.mat() * h.mat() - h.mat()).cwiseAbs().maxCoeff();
  if (idem > tol) {
    throw LinalgError("wrap_projection: matrix is not idempotent, |P^2-P| = " +
                      std::to_string(idem));
  }
  const int rank = static_cast<int>(std::lround(trace));
  ProjectionMatrix out{std::move(space), std::move(h), rank, idem};
  return out;
}

AssumptionReport check_assumption(const IntegrableKernel& k, const GroundSpace& space,
                                  const std::vector<std::function<double(double)>>& probes,
                                  std::array<double, 2> window_b) {
  const ProjectionMatrix pm = discretize(k, space, 0.5);
  const int n = space.size();
  AssumptionReport rep;
  // Reproducing property: the clipped projection applied to a probe must agree
  // with the direct kernel action <f, Pi(., q)>.
  for (const auto& f : probes) {
    Eigen::VectorXd ftil(n);
    for (int i = 0; i < n; ++i) ftil(i) = std::sqrt(space.weights[i]) * f(space.points[i]);
    const Eigen::VectorXd pf = pm.P.mat() * ftil;
    for (int q = 0; q < n; ++q) {
      double direct = 0.0;
      for (int j = 0; j < n; ++j) {
        direct += space.weights[j] * k.eval(space.points[q], space.points[j]) *
                  f(space.points[j]);
      }
      const double via_matrix = pf(q) / std::sqrt(space.weights[q]);
      rep.reproducing_residual =
          std::max(rep.reproducing_residual, std::abs(via_matrix - direct));
    }
  }
  // Trace identity over the sub-window B.
  double tr_matrix = 0.0;
  double tr_kernel = 0.0;
  for (int q = 0; q < n; ++q) {
    const double x = space.points[q];
    if (x < window_b[0] || x > window_b[1]) continue;
    tr_matrix += pm.P(q, q);
    tr_kernel += space.weights[q] * k.eval(x, x);
  }
  rep.trace_residual = std::abs(tr_matrix - tr_kernel);
  return rep;
}

}  // namespace dpp
