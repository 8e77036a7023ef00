#include "dpp/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpp {

namespace {

double g_at(const FunctionalSpec& g, double x) {
  for (double e : g.exclusions) {
    if (std::abs(x - e) < 1e-12) return 1.0;
  }
  return g.values(x);
}

double g_truncated_at(const FunctionalSpec& g, double x, double r, double eps) {
  for (double e : g.exclusions) {
    if (std::abs(x - e) < std::max(eps, 1e-12)) return 1.0;
  }
  if (std::abs(x) > r) return 1.0;
  return g.values(x);
}

Eigen::VectorXd g_vector(const FunctionalSpec& g, const GroundSpace& space) {
  Eigen::VectorXd v(space.size());
  for (int i = 0; i < space.size(); ++i) v(i) = g_at(g, space.points[i]);
  return v;
}

double det_expectation(const Eigen::VectorXd& gv, const Eigen::MatrixXd& p) {
  // (g-1) vanishes off its support S, so the rows of (g-1)P outside S are
  // zero and det(1 + (g-1)P) reduces exactly to the S x S block.
  std::vector<int> s;
  for (int i = 0; i < gv.size(); ++i) {
    if (gv(i) != 1.0) s.push_back(i);
  }
  const int k = static_cast<int>(s.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd block(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      block(a, b) = (a == b ? 1.0 : 0.0) +
                    (gv(s[static_cast<std::size_t>(a)]) - 1.0) *
                        p(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
    }
  }
  return determinant_general(block);
}

Eigen::MatrixXd transformed_raw(const Eigen::VectorXd& gv, const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  for (int i = 0; i < n; ++i) {
    if (gv(i) < 0.0) {
      throw std::invalid_argument("transformed kernel: g must be nonnegative");
    }
  }
  const Eigen::MatrixXd d = (gv.array() - 1.0).matrix().asDiagonal();
  // P (1 + (g-1)P)^-1 = (1 + P(g-1))^-1 P, which keeps the solve on the left.
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + p * d;
  Eigen::MatrixXd z = solve(m, p);
  const Eigen::VectorXd sg = gv.array().sqrt();
  Eigen::MatrixXd out = sg.asDiagonal() * z * sg.asDiagonal();
  return 0.5 * (out + out.transpose().eval());
}

ProjectionMatrix clip_to_projection(const GroundSpace& space, Eigen::MatrixXd raw) {
  HermitianMatrix clipped = project_clip(HermitianMatrix(std::move(raw), 1e-8), 1e-6);
  const int rank = static_cast<int>(std::lround(clipped.mat().trace()));
  return ProjectionMatrix{space, std::move(clipped), rank, 0.0};
}

struct BandSplit {
  Eigen::VectorXd g1, g2, g3;
  bool trivial = true;  // whole g inside the band around 1
};

// Three-band split g = g1 g2 g3: g1 = g clamped to [1/2, 3/2], g2 < 1 carries
// the small values, g3 > 1 the large ones.
BandSplit band_split(const Eigen::VectorXd& gv) {
  BandSplit s;
  const int n = static_cast<int>(gv.size());
  s.g1.resize(n);
  s.g2 = Eigen::VectorXd::Ones(n);
  s.g3 = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    const double g = gv(i);
    s.g1(i) = std::clamp(g, 0.5, 1.5);
    if (g < 0.5) {
      s.g2(i) = g / 0.5;
      s.trivial = false;
    } else if (g > 1.5) {
      s.g3(i) = g / 1.5;
      s.trivial = false;
    }
  }
  return s;
}

double staged_det(const Eigen::VectorXd& gv, const Eigen::MatrixXd& p,
                  std::array<double, 3>* factors = nullptr) {
  const BandSplit s = band_split(gv);
  const double f1 = det_expectation(s.g1, p);
  double f2 = 1.0;
  double f3 = 1.0;
  if (!s.trivial) {
    const Eigen::MatrixXd p1 = transformed_raw(s.g1, p);
    f2 = det_expectation(s.g2, p1);
    const bool need3 = (s.g3.array() != 1.0).any();
    // When the middle factor already kills the expectation, the event
    // conditioned on by the third stage is null and the product is 0.
    if (need3 && std::abs(f2) > 1e-300) {
      const Eigen::MatrixXd p2 = transformed_raw(s.g2, p1);
      f3 = det_expectation(s.g3, p2);
    }
  }
  if (factors) *factors = {f1, f2, f3};
  return f1 * f2 * f3;
}

}  // namespace

std::vector<std::pair<double, double>> make_schedule(double r0, double eps0, int stages) {
  if (stages < 1) throw std::invalid_argument("make_schedule: need at least one stage");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(stages));
  for (int k = 0; k < stages; ++k) {
    out.emplace_back(r0 * std::pow(2.0, k), eps0 * std::pow(2.0, -k));
  }
  return out;
}

double additive_expectation(const FunctionalSpec& f, const ProjectionMatrix& p) {
  double s = 0.0;
  for (int i = 0; i < p.space.size(); ++i) {
    // Weighted diagonal already carries the measure: P_ii = w_i Pi(x_i,x_i).
    s += f.values(p.space.points[i]) * p.P(i, i);
  }
  return s;
}

double additive_variance_serial(const FunctionalSpec& f, const ProjectionMatrix& p) {
  const int n = p.space.size();
  std::vector<double> fv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fv[static_cast<std::size_t>(i)] = f.values(p.space.points[i]);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double df = fv[static_cast<std::size_t>(i)] - fv[static_cast<std::size_t>(j)];
      const double pij = p.P(i, j);
      acc += df * df * pij * pij;
    }
  }
  return 0.5 * acc;
}

double additive_variance(const FunctionalSpec& f, const ProjectionMatrix& p) {
  const int n = p.space.size();
  std::vector<double> fv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fv[static_cast<std::size_t>(i)] = f.values(p.space.points[i]);
  double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double df = fv[static_cast<std::size_t>(i)] - fv[static_cast<std::size_t>(j)];
      const double pij = p.P(i, j);
      row += df * df * pij * pij;
    }
    acc += row;
  }
  return 0.5 * acc;
}

double multiplicative_expectation(const FunctionalSpec& g, const ProjectionMatrix& p) {
  return det_expectation(g_vector(g, p.space), p.P.mat());
}

StagedExpectation staged_multiplicative_expectation(const FunctionalSpec& g,
                                                    const ProjectionMatrix& p) {
  StagedExpectation out;
  out.value = staged_det(g_vector(g, p.space), p.P.mat(), &out.factors);
  return out;
}

ProjectionMatrix transformed_kernel(const FunctionalSpec& g, const ProjectionMatrix& p) {
  return clip_to_projection(p.space, transformed_raw(g_vector(g, p.space), p.P.mat()));
}

ProjectionMatrix transformed_kernel_staged(const FunctionalSpec& g,
                                           const ProjectionMatrix& p) {
  const BandSplit s = band_split(g_vector(g, p.space));
  Eigen::MatrixXd m = transformed_raw(s.g1, p.P.mat());
  if (!s.trivial) {
    m = transformed_raw(s.g2, m);
    m = transformed_raw(s.g3, m);
  }
  return clip_to_projection(p.space, std::move(m));
}

double diagonal_bound_check(const FunctionalSpec& g, const ProjectionMatrix& p) {
  const Eigen::VectorXd gv = g_vector(g, p.space);
  const Eigen::MatrixXd pg = transformed_raw(gv, p.P.mat());
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p.space.size(), p.space.size()) +
                            (gv.array() - 1.0).matrix().asDiagonal() * p.P.mat();
  const double inv_norm = inverse_operator_norm(m);
  double violation = 0.0;
  for (int q = 0; q < p.space.size(); ++q) {
    const double bound = gv(q) * inv_norm * p.P(q, q);
    violation = std::max(violation, pg(q, q) - bound);
  }
  return std::max(violation, 0.0);
}

RegularizedResult regularized_mult_functional(const FunctionalSpec& g,
                                              const ProjectionMatrix& p_cond,
                                              const Configuration& x) {
  if (g.schedule.empty()) {
    throw std::invalid_argument("regularized_mult_functional: empty truncation schedule");
  }
  validate_configuration(x, p_cond.space);
  const std::vector<double> positions = x.positions(p_cond.space);
  RegularizedResult out;
  for (const auto& [r, eps] : g.schedule) {
    Eigen::VectorXd gv(p_cond.space.size());
    for (int i = 0; i < p_cond.space.size(); ++i) {
      gv(i) = g_truncated_at(g, p_cond.space.points[i], r, eps);
    }
    double z;
    // The three-band factorization is only numerically necessary once g
    // strays far from 1; the direct determinant is exact and cheaper below.
    double needs_staging = (gv.array() - 1.0).abs().maxCoeff();
    if (needs_staging > 10.0) {
      z = staged_det(gv, p_cond.P.mat());
    } else {
      z = det_expectation(gv, p_cond.P.mat());
    }
    if (std::abs(z) < 1e-14) {
      throw std::invalid_argument(
          "regularized_mult_functional: normalizer vanishes at stage R=" +
          std::to_string(r) + " (conditioning inconsistent with the zero set of g)");
    }
    double prod = 1.0;
    for (double pos : positions) prod *= g_truncated_at(g, pos, r, eps);
    TruncationStage stage;
    stage.R = r;
    stage.eps = eps;
    stage.C = 1.0 / z;
    stage.psi = prod / z;
    out.stages.push_back(stage);
  }
  out.value = out.stages.back().psi;
  return out;
}

double normalized_additive(const FunctionalSpec& f, const ProjectionMatrix& p,
                           const Configuration& x) {
  double s = 0.0;
  for (double pos : x.positions(p.space)) s += f.values(pos);
  return s - additive_expectation(f, p);
}

std::vector<std::pair<double, double>> normalized_additive_stages(
    const FunctionalSpec& f, const ProjectionMatrix& p, const Configuration& x) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [r, eps] : f.schedule) {
    (void)eps;
    FunctionalSpec fr = f;
    fr.values = [f, r](double t) { return std::abs(t) <= r ? f.values(t) : 0.0; };
    out.emplace_back(r, normalized_additive(fr, p, x));
  }
  return out;
}

nlohmann::json RNReport::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["psi_bar"] = psi_bar;
  j["det_ratio"] = det_ratio;
  j["density_ratio"] = density_ratio;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    j["stages"].push_back({{"R", s.R}, {"eps", s.eps}, {"C", s.C}, {"psi", s.psi}});
  }
  return j;
}

double cyl_prob(const ProjectionMatrix& p, const std::vector<int>& particles,
                const std::vector<int>& holes) {
  std::vector<int> idx = particles;
  idx.insert(idx.end(), holes.begin(), holes.end());
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = p.P(idx[static_cast<std::size_t>(i)],
                                              idx[static_cast<std::size_t>(j)]);
  }
  for (int j = static_cast<int>(particles.size()); j < k; ++j) m(j, j) -= 1.0;
  const double sign = (holes.size() % 2 == 0) ? 1.0 : -1.0;
  return sign * determinant_general(m);
}

RNReport rn_permutation(const ProjectionMatrix& p, const std::vector<int>& pts, int m,
                        const std::vector<int>& sigma, const Configuration& x) {
  const int l = static_cast<int>(pts.size());
  if (m < 0 || m > l) throw std::invalid_argument("rn_permutation: m out of range");
  if (static_cast<int>(sigma.size()) != l) {
    throw std::invalid_argument("rn_permutation: sigma must have one entry per point");
  }
  std::vector<bool> hit(static_cast<std::size_t>(l), false);
  for (int s : sigma) {
    if (s < 0 || s >= l || hit[static_cast<std::size_t>(s)]) {
      throw std::invalid_argument("rn_permutation: sigma is not a permutation");
    }
    hit[static_cast<std::size_t>(s)] = true;
  }
  std::vector<int> particles(pts.begin(), pts.begin() + m);
  std::vector<int> holes(pts.begin() + m, pts.end());
  for (int q : particles) {
    if (!x.contains(q)) {
      throw std::invalid_argument("rn_permutation: X must contain a particle at node " +
                                  std::to_string(q));
    }
  }
  for (int q : holes) {
    if (x.contains(q)) {
      throw std::invalid_argument("rn_permutation: X must be vacant at node " +
                                  std::to_string(q));
    }
  }
  std::vector<int> sigma_particles;
  std::vector<int> sigma_holes;
  for (int i = 0; i < m; ++i) sigma_particles.push_back(pts[static_cast<std::size_t>(sigma[i])]);
  for (int i = m; i < l; ++i) sigma_holes.push_back(pts[static_cast<std::size_t>(sigma[i])]);

  RNReport rep;
  // The multiplicative factor collects one squared Moebius-type ratio per
  // moved particle; conditioned points contribute through exclusions only.
  FunctionalSpec g;
  g.exclusions.reserve(static_cast<std::size_t>(l));
  for (int q : pts) g.exclusions.push_back(p.space.points[static_cast<std::size_t>(q)]);
  std::vector<std::pair<double, double>> moves;
  for (int i = 0; i < m; ++i) {
    moves.emplace_back(p.space.points[static_cast<std::size_t>(pts[static_cast<std::size_t>(sigma[i])])],
                       p.space.points[static_cast<std::size_t>(pts[static_cast<std::size_t>(i)])]);
  }
  g.values = [moves](double t) {
    double v = 1.0;
    for (const auto& [to, from] : moves) {
      const double ratio = (t - to) / (t - from);
      v *= ratio * ratio;
    }
    return v;
  };
  double rmax = 0.0;
  for (double t : p.space.points) rmax = std::max(rmax, std::abs(t));
  g.schedule = {{rmax / 4.0, 0.0}, {rmax / 2.0, 0.0}, {rmax, 0.0}};

  const ProjectionMatrix cond = conditional_kernel(p, particles, holes);
  Configuration erased;
  for (int idx : x.indices) {
    if (std::find(particles.begin(), particles.end(), idx) == particles.end()) {
      erased.indices.push_back(idx);
    }
  }
  const RegularizedResult reg = regularized_mult_functional(g, cond, erased);
  rep.psi_bar = reg.value;
  rep.stages = reg.stages;
  const double denom = cyl_prob(p, particles, holes);
  if (std::abs(denom) < 1e-300) {
    throw std::invalid_argument("rn_permutation: conditioning event has zero probability");
  }
  rep.det_ratio = cyl_prob(p, sigma_particles, sigma_holes) / denom;
  rep.density_ratio = 1.0;
  rep.value = rep.psi_bar * rep.det_ratio * rep.density_ratio;
  return rep;
}

RNReport rn_transposition(const ProjectionMatrix& p, int pnode, int qnode,
                          const Configuration& x) {
  if (pnode == qnode) throw std::invalid_argument("rn_transposition: p and q must differ");
  const bool has_p = x.contains(pnode);
  const bool has_q = x.contains(qnode);
  if (has_p == has_q) {
    // Both occupied or both vacant: the transposed configuration is X itself.
    return RNReport{};
  }
  const std::vector<int> swap{1, 0};
  if (has_q) return rn_permutation(p, {qnode, pnode}, 1, swap, x);
  return rn_permutation(p, {pnode, qnode}, 1, swap, x);
}

RNReport rn_diffeo(const IntegrableKernel& k, const ProjectionMatrix& p,
                   const std::function<double(double)>& f_map,
                   const std::function<double(double)>& df_map,
                   std::array<double, 2> v, const Configuration& x,
                   const std::vector<std::pair<double, double>>& schedule) {
  validate_configuration(x, p.space);
  // Moved points: particles of X inside the support window of F.
  std::vector<int> q_idx;
  for (int idx : x.indices) {
    const double pos = p.space.points[static_cast<std::size_t>(idx)];
    if (pos >= v[0] && pos <= v[1]) q_idx.push_back(idx);
  }
  RNReport rep;
  if (q_idx.empty()) return rep;

  std::vector<double> q_pos;
  std::vector<double> image_pos;
  double density_ratio = 1.0;
  for (int idx : q_idx) {
    const double q = p.space.points[static_cast<std::size_t>(idx)];
    // The image points are used through kernel evaluations and the
    // quasi-symmetry factor, both defined at arbitrary positions, so they are
    // not restricted to the grid.
    q_pos.push_back(q);
    image_pos.push_back(f_map(q));
    const double df = df_map(q);
    if (!(df > 0.0)) throw std::invalid_argument("rn_diffeo: dF must be positive");
    density_ratio *= df;
  }

  FunctionalSpec g;
  g.exclusions = q_pos;
  g.values = [q_pos, image_pos](double t) {
    double out = 1.0;
    for (std::size_t i = 0; i < q_pos.size(); ++i) {
      const double ratio = (t - image_pos[i]) / (t - q_pos[i]);
      out *= ratio * ratio;
    }
    return out;
  };
  g.schedule = schedule;

  const ProjectionMatrix cond = palm_iterated_raw(p, q_idx);
  Configuration erased;
  for (int idx : x.indices) {
    if (std::find(q_idx.begin(), q_idx.end(), idx) == q_idx.end()) {
      erased.indices.push_back(idx);
    }
  }
  const RegularizedResult reg = regularized_mult_functional(g, cond, erased);
  rep.psi_bar = reg.value;
  rep.stages = reg.stages;

  const int l = static_cast<int>(q_pos.size());
  Eigen::MatrixXd num(l, l);
  Eigen::MatrixXd den(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      num(i, j) = k.eval(image_pos[static_cast<std::size_t>(i)],
                         image_pos[static_cast<std::size_t>(j)]);
      den(i, j) = k.eval(q_pos[static_cast<std::size_t>(i)],
                         q_pos[static_cast<std::size_t>(j)]);
    }
  }
  const double d = determinant_general(den);
  if (std::abs(d) < 1e-300) {
    throw std::invalid_argument("rn_diffeo: singular denominator determinant");
  }
  rep.det_ratio = determinant_general(num) / d;
  rep.density_ratio = density_ratio;
  rep.value = rep.psi_bar * rep.det_ratio * rep.density_ratio;
  return rep;
}

}  // namespace dpp
