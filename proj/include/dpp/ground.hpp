#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dpp/json_fwd.hpp"

namespace dpp {

enum class SpaceKind { Discrete, Continuous };
enum class QuadRule { GaussLegendre, Trapezoid };

// The phase space (E, mu) in finite form: points with positive weights.
// Discrete spaces carry counting measure (all weights 1); continuous
// windows carry quadrature nodes and weights.
struct GroundSpace {
  SpaceKind kind = SpaceKind::Discrete;
  std::vector<double> points;   // strictly increasing
  std::vector<double> weights;  // positive, same length
  std::array<double, 2> window{0.0, 0.0};  // continuous only

  int size() const { return static_cast<int>(points.size()); }
  double width() const { return window[1] - window[0]; }

  nlohmann::json to_json() const;
  static GroundSpace from_json(const nlohmann::json& j);
};

// A finite particle configuration, stored as strictly increasing node
// indices into a GroundSpace.
struct Configuration {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  bool contains(int idx) const;
  std::vector<double> positions(const GroundSpace& space) const;
};

void validate_configuration(const Configuration& x, const GroundSpace& space);

GroundSpace make_discrete(std::vector<double> points);
GroundSpace make_quadrature(double a, double b, int n, QuadRule rule);

// Partial sum of sum 1/(1+x^2) over a discrete space; diagnostic for the
// tail-summability condition on countable phase spaces.
double nsq_partial_sum(const GroundSpace& space);

// Quadrature/sum value of the integral of diag(x)/(1+x^2) over the space.
double check_xsq(const std::function<double(double)>& kernel_diagonal,
                 const GroundSpace& space);

}  // namespace dpp
