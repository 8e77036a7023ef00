#include "dpp/ground.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpp {

namespace {

void validate_points(const std::vector<double>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i] > pts[i - 1])) {
      throw std::invalid_argument("ground points must be strictly increasing, violation at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

bool Configuration::contains(int idx) const {
  return std::binary_search(indices.begin(), indices.end(), idx);
}

std::vector<double> Configuration::positions(const GroundSpace& space) const {
  std::vector<double> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(space.points.at(static_cast<std::size_t>(i)));
  return out;
}

void validate_configuration(const Configuration& x, const GroundSpace& space) {
  for (std::size_t i = 0; i < x.indices.size(); ++i) {
    const int idx = x.indices[i];
    if (idx < 0 || idx >= space.size()) {
      throw std::invalid_argument("configuration index " + std::to_string(idx) +
                                  " outside ground space of size " + std::to_string(space.size()));
    }
    if (i > 0 && x.indices[i] <= x.indices[i - 1]) {
      throw std::invalid_argument("configuration indices must be strictly increasing");
    }
  }
}

GroundSpace make_discrete(std::vector<double> points) {
  validate_points(points);
  GroundSpace g;
  g.kind = SpaceKind::Discrete;
  g.weights.assign(points.size(), 1.0);
  g.points = std::move(points);
  if (!g.points.empty()) {
    g.window = {g.points.front(), g.points.back()};
  }
  return g;
}

GroundSpace make_quadrature(double a, double b, int n, QuadRule rule) {
  if (!(a < b)) throw std::invalid_argument("make_quadrature: window must satisfy a < b");
  if (n < 2) throw std::invalid_argument("make_quadrature: need at least 2 nodes");
  GroundSpace g;
  g.kind = SpaceKind::Continuous;
  g.window = {a, b};
  g.points.resize(n);
  g.weights.resize(n);
  if (rule == QuadRule::Trapezoid) {
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
      g.points[i] = a + h * i;
      g.weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
    return g;
  }
  // Gauss-Legendre by Golub-Welsch: eigenvalues of the Jacobi matrix are the
  // nodes on [-1,1]; weights come from the first eigenvector components.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k - 1, k) = beta;
    jacobi(k, k - 1) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  for (int i = 0; i < n; ++i) {
    g.points[i] = 0.5 * (b - a) * es.eigenvalues()(i) + 0.5 * (a + b);
    const double v0 = es.eigenvectors()(0, i);
    g.weights[i] = (b - a) * v0 * v0;
  }
  return g;
}

double nsq_partial_sum(const GroundSpace& space) {
  double s = 0.0;
  for (double x : space.points) s += 1.0 / (1.0 + x * x);
  return s;
}

double check_xsq(const std::function<double(double)>& kernel_diagonal,
                 const GroundSpace& space) {
  double s = 0.0;
  for (int i = 0; i < space.size(); ++i) {
    const double x = space.points[i];
    s += space.weights[i] * kernel_diagonal(x) / (1.0 + x * x);
  }
  return s;
}

nlohmann::json GroundSpace::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == SpaceKind::Discrete ? "discrete" : "continuous";
  j["points"] = points;
  j["weights"] = weights;
  j["window"] = window;
  return j;
}

GroundSpace GroundSpace::from_json(const nlohmann::json& j) {
  GroundSpace g;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "discrete") {
    g.kind = SpaceKind::Discrete;
  } else if (kind == "continuous") {
    g.kind = SpaceKind::Continuous;
  } else {
    throw std::invalid_argument("GroundSpace: unknown kind '" + kind + "'");
  }
  g.points = j.at("points").get<std::vector<double>>();
  g.weights = j.at("weights").get<std::vector<double>>();
  if (j.contains("window")) {
    auto w = j.at("window").get<std::vector<double>>();
    if (w.size() != 2) throw std::invalid_argument("GroundSpace: window must have 2 entries");
    g.window = {w[0], w[1]};
  }
  validate_points(g.points);
  if (g.weights.size() != g.points.size()) {
    throw std::invalid_argument("GroundSpace: points/weights length mismatch");
  }
  for (double w : g.weights) {
    if (!(w > 0.0)) throw std::invalid_argument("GroundSpace: weights must be positive");
  }
  return g;
}

}  // namespace dpp
