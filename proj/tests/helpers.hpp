#pragma once

#include <cmath>
#include <vector>

#include "dpp/functionals.hpp"
#include "dpp/kernels.hpp"
#include "dpp/oracle.hpp"

namespace dpp_test {

// Legendre polynomial P_n and derivative by the three-term recurrence.
inline double legendre(int n, double x) {
  if (n == 0) return 1.0;
  if (n == 1) return x;
  double pm = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm) / k;
    pm = p;
    p = next;
  }
  return p;
}

inline double legendre_deriv(int n, double x) {
  if (n == 0) return 0.0;
  const double denom = x * x - 1.0;
  if (std::abs(denom) < 1e-12) {
    // P_n'(+-1) = (+-1)^(n-1) n(n+1)/2
    const double sign = (n % 2 == 0) ? x : 1.0;
    return sign * 0.5 * n * (n + 1.0);
  }
  return n * (x * legendre(n, x) - legendre(n - 1, x)) / denom;
}

// Christoffel-Darboux kernel of the first N normalized Legendre polynomials:
// an integrable projection kernel on [-1,1], exact under Gauss quadrature.
inline dpp::IntegrableKernel legendre_cd_kernel(int big_n) {
  const double c = std::sqrt(0.5 * big_n);
  return dpp::make_custom_kernel(
      [big_n, c](double x) { return c * legendre(big_n, x); },
      [big_n, c](double x) { return c * legendre(big_n - 1, x); },
      [big_n, c](double x) { return c * legendre_deriv(big_n, x); },
      [big_n, c](double x) { return c * legendre_deriv(big_n - 1, x); },
      dpp::SpaceKind::Continuous);
}

// The matching projection as an explicit frame of normalized Legendre values.
inline dpp::ProjectionMatrix legendre_cd_projection(const dpp::GroundSpace& space,
                                                    int big_n) {
  Eigen::MatrixXd frame(space.size(), big_n);
  for (int i = 0; i < space.size(); ++i) {
    for (int k = 0; k < big_n; ++k) {
      frame(i, k) = std::sqrt((2.0 * k + 1.0) / 2.0) * legendre(k, space.points[i]);
    }
  }
  return dpp::projection_from_frame(space, frame);
}

inline dpp::FunctionalSpec spec_from(std::function<double(double)> f) {
  dpp::FunctionalSpec s;
  s.values = std::move(f);
  s.schedule = {{1e300, 0.0}};
  return s;
}

// Per-node g values as a functional on a discrete space.
inline dpp::FunctionalSpec spec_from_nodes(const dpp::GroundSpace& space,
                                           std::vector<double> gv) {
  auto pts = space.points;
  return spec_from([pts, gv = std::move(gv)](double x) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (std::abs(pts[k] - x) < 1e-9) return gv[k];
    }
    return 1.0;
  });
}

}  // namespace dpp_test
