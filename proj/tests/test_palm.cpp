#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpp/oracle.hpp"
#include "dpp/palm.hpp"
#include "dpp/rng.hpp"
#include "helpers.hpp"

using namespace dpp;

namespace {

ProjectionMatrix half_matrix() {
  const auto space = make_discrete({0.0, 1.0});
  Eigen::MatrixXd v(2, 1);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return projection_from_frame(space, v);
}

ProjectionMatrix dsine_window(int lo, int hi, double theta = 0.5) {
  std::vector<double> pts;
  for (int i = lo; i <= hi; ++i) pts.push_back(static_cast<double>(i));
  const auto space = make_discrete(pts);
  return discretize(make_discrete_sine_kernel(theta), space, 0.5);
}

}  // namespace

TEST_CASE("palm_kernel examples") {
  // Rank-1 two-point kernel: conditioning on either node kills everything.
  const auto p = half_matrix();
  const auto pq = palm_kernel(p, 0);
  CHECK(pq.rank == 0);
  CHECK(pq.P.mat().cwiseAbs().maxCoeff() <= 1e-12);

  // Conditioning on a deterministically empty node is a no-op.
  const auto space = make_discrete({0.0, 1.0});
  Eigen::MatrixXd e(2, 1);
  e << 1.0, 0.0;
  const auto pe = projection_from_frame(space, e);
  const auto same = palm_kernel(pe, 1);
  CHECK((same.P.mat() - pe.P.mat()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(same.rank == 1);

  // Discrete sine: rank drops by one and the q row/column vanish.
  const auto ds = dsine_window(-8, 8);
  const auto dsq = palm_kernel(ds, 8);  // node 0.0
  CHECK(dsq.rank == ds.rank - 1);
  for (int j = 0; j < ds.space.size(); ++j) {
    CHECK(std::abs(dsq.P(8, j)) <= 1e-10);
    CHECK(std::abs(dsq.P(j, 8)) <= 1e-10);
  }
}

TEST_CASE("palm_iterated is order independent") {
  const auto ds = dsine_window(-8, 8);
  const auto a = palm_iterated(ds, {3, 10, 14});
  const auto b = palm_iterated(ds, {14, 3, 10});
  CHECK((a.P.mat() - b.P.mat()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(a.rank == ds.rank - 3);
}

TEST_CASE("hole_kernel examples") {
  const auto p = half_matrix();
  const auto ph = hole_kernel(p, 0);
  CHECK(ph.P(0, 0) == doctest::Approx(0.0));
  CHECK(ph.P(0, 1) == doctest::Approx(0.0));
  CHECK(ph.P(1, 1) == doctest::Approx(1.0));
  CHECK(ph.rank == 1);

  // Pi(q,q)=1: the hole event is impossible.
  const auto space = make_discrete({0.0, 1.0});
  Eigen::MatrixXd e(2, 1);
  e << 1.0, 0.0;
  const auto pe = projection_from_frame(space, e);
  CHECK_THROWS(hole_kernel(pe, 0));
  CHECK_NOTHROW(hole_kernel(pe, 1));
}

TEST_CASE("conditional_kernel composes palm and hole updates") {
  const auto ds = dsine_window(-8, 8);
  const auto c = conditional_kernel(ds, {4}, {12});
  const auto manual = hole_kernel(palm_kernel(ds, 4), 12);
  CHECK((c.P.mat() - manual.P.mat()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(c.rank == ds.rank - 1);
}

TEST_CASE("palm integrable form matches the matrix update") {
  // Continuous sine on a quadrature grid.
  {
    const auto space = make_quadrature(-6.0, 6.0, 120, QuadRule::GaussLegendre);
    const auto k = make_sine_kernel();
    const double q = 0.37;
    const auto kq = palm_integrable_form(k, q);
    double maxerr = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double x = 12.0 * counter_rng_uniform(21, 0, 2 * t) - 6.0;
      const double y = 12.0 * counter_rng_uniform(21, 0, 2 * t + 1) - 6.0;
      const double direct =
          k.eval(x, y) - k.eval(x, q) * k.eval(q, y) / k.eval(q, q);
      maxerr = std::max(maxerr, std::abs(kq.eval(x, y) - direct));
    }
    CHECK(maxerr <= 1e-10);
    CHECK(std::abs(kq.eval(q, 1.3)) <= 1e-9);
    CHECK(std::abs(kq.eval(q, q)) <= 1e-9);
    (void)space;
  }
  // Discrete sine on integer pairs.
  {
    const auto k = make_discrete_sine_kernel(0.3);
    const double q = 2.0;
    const auto kq = palm_integrable_form(k, q);
    double maxerr = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double x = std::floor(41.0 * counter_rng_uniform(22, 0, 2 * t)) - 20.0;
      const double y = std::floor(41.0 * counter_rng_uniform(22, 0, 2 * t + 1)) - 20.0;
      const double direct =
          k.eval(x, y) - k.eval(x, q) * k.eval(q, y) / k.eval(q, q);
      maxerr = std::max(maxerr, std::abs(kq.eval(x, y) - direct));
    }
    CHECK(maxerr <= 1e-10);
  }
}

TEST_CASE("hole integrable form matches the matrix update") {
  const auto k = make_discrete_sine_kernel(0.3);
  const double q = -1.0;
  const auto kq = hole_integrable_form(k, q);
  double maxerr = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double x = std::floor(41.0 * counter_rng_uniform(23, 0, 2 * t)) - 20.0;
    const double y = std::floor(41.0 * counter_rng_uniform(23, 0, 2 * t + 1)) - 20.0;
    if (x == q || y == q) continue;  // row/col zeroing handled by the matrix path
    const double direct =
        k.eval(x, y) + k.eval(x, q) * k.eval(q, y) / (1.0 - k.eval(q, q));
    maxerr = std::max(maxerr, std::abs(kq.eval(x, y) - direct));
  }
  CHECK(maxerr <= 1e-10);
  CHECK(std::abs(kq.eval(q, 5.0)) <= 1e-9);
}

TEST_CASE("palm integrable form commutes with gauge transforms") {
  const auto k = make_sine_kernel();
  const double phi = 0.7;
  const std::array<std::array<double, 2>, 2> rot{
      {{std::cos(phi), -std::sin(phi)}, {std::sin(phi), std::cos(phi)}}};
  const auto a = palm_integrable_form(gauge_transform(k, rot), 0.4);
  const auto b = palm_integrable_form(k, 0.4);
  for (int t = 0; t < 50; ++t) {
    const double x = 8.0 * counter_rng_uniform(24, 0, 2 * t) - 4.0;
    const double y = 8.0 * counter_rng_uniform(24, 0, 2 * t + 1) - 4.0;
    CHECK(a.eval(x, y) == doctest::Approx(b.eval(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("palm_offnode at a node matches palm_kernel") {
  // Christoffel-Darboux kernel under Gauss quadrature: the weighted matrix
  // reproduces the kernel exactly, so the node/off-node paths must agree.
  const auto space = make_quadrature(-1.0, 1.0, 40, QuadRule::GaussLegendre);
  const auto k = dpp_test::legendre_cd_kernel(7);
  const auto p = dpp_test::legendre_cd_projection(space, 7);
  const int qi = 17;
  const Eigen::MatrixXd off = palm_offnode(p.P.mat(), k, space, space.points[qi]);
  const auto on = palm_kernel(p, qi);
  CHECK((off - on.P.mat()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("discrete subspace relation on poly frames") {
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> pts;
    for (int i = 0; i < 7; ++i) {
      pts.push_back(i + 0.3 * (counter_rng_uniform(25, trial, i) - 0.5));
    }
    const auto space = make_discrete(pts);
    const auto p = poly_frame_projection(space, 3, 40 + trial, 1);
    const double err = subspace_relation_discrete_error(p, 1, 5);
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("continuous subspace relation on a Christoffel-Darboux kernel") {
  const auto space = make_quadrature(-1.0, 1.0, 60, QuadRule::GaussLegendre);
  const auto k = dpp_test::legendre_cd_kernel(6);
  const auto p = dpp_test::legendre_cd_projection(space, 6);
  const double e1 = subspace_relation_continuous_error(p, k, {0.21}, {-0.43});
  CHECK(e1 <= 1e-8);
  const double e2 =
      subspace_relation_continuous_error(p, k, {0.21, -0.7}, {-0.43, 0.55});
  CHECK(e2 <= 1e-8);
}

TEST_CASE("fault injection flips the palm update") {
  const auto ds = dsine_window(-5, 5);
  set_fault_flip_palm_sign(true);
  const auto bad = palm_kernel(ds, 5);
  set_fault_flip_palm_sign(false);
  const auto good = palm_kernel(ds, 5);
  CHECK((bad.P.mat() - good.P.mat()).cwiseAbs().maxCoeff() > 0.1);
  // The corrupted matrix is no longer a projection.
  const Eigen::MatrixXd& m = bad.P.mat();
  CHECK((m * m - m).cwiseAbs().maxCoeff() > 1e-3);
}
