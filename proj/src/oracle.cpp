#include "dpp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpp/rng.hpp"

namespace dpp {

namespace {

constexpr int kMaxPoints = 24;
constexpr std::size_t kMaxSubsets = 1000000;

std::vector<std::uint32_t> all_masks(int n, int r) {
  std::vector<std::uint32_t> masks;
  std::vector<int> comb(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) comb[static_cast<std::size_t>(i)] = i;
  if (r == 0) return {0u};
  while (true) {
    std::uint32_t m = 0;
    for (int i : comb) m |= (1u << i);
    masks.push_back(m);
    if (masks.size() > kMaxSubsets) {
      throw std::invalid_argument("enumerate_law: subset count exceeds the size cap");
    }
    int i = r - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) {
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return masks;
}

double minor_det(const Eigen::MatrixXd& p, std::uint32_t mask) {
  std::vector<int> idx;
  for (int i = 0; i < 32; ++i) {
    if (mask & (1u << i)) idx.push_back(i);
  }
  const int k = static_cast<int>(idx.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd sub(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      sub(a, b) = p(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
  }
  return determinant_general(sub);
}

template <bool Parallel>
EnumeratedLaw enumerate_impl(const ProjectionMatrix& p) {
  if (p.space.size() > kMaxPoints) {
    throw std::invalid_argument("enumerate_law: at most 24 points supported");
  }
  EnumeratedLaw law;
  law.n = p.space.size();
  law.r = p.rank;
  const std::vector<std::uint32_t> masks = all_masks(law.n, law.r);
  law.probs.resize(masks.size());
  const Eigen::MatrixXd& m = p.P.mat();
  const int count = static_cast<int>(masks.size());
#pragma omp parallel for schedule(static) if (Parallel)
  for (int i = 0; i < count; ++i) {
    const std::uint32_t mask = masks[static_cast<std::size_t>(i)];
    law.probs[static_cast<std::size_t>(i)] = {mask, minor_det(m, mask)};
  }
  std::sort(law.probs.begin(), law.probs.end());
  return law;
}

std::uint32_t to_mask(const std::vector<int>& idx) {
  std::uint32_t m = 0;
  for (int i : idx) m |= (1u << i);
  return m;
}

}  // namespace

double EnumeratedLaw::prob(std::uint32_t mask) const {
  auto it = std::lower_bound(probs.begin(), probs.end(), std::make_pair(mask, -1.0));
  if (it == probs.end() || it->first != mask) return 0.0;
  return it->second;
}

double EnumeratedLaw::total() const {
  double s = 0.0;
  for (const auto& [mask, prob] : probs) s += prob;
  return s;
}

EnumeratedLaw enumerate_law(const ProjectionMatrix& p) { return enumerate_impl<true>(p); }
EnumeratedLaw enumerate_law_serial(const ProjectionMatrix& p) {
  return enumerate_impl<false>(p);
}

EnumeratedLaw conditional_law(const EnumeratedLaw& law, const std::vector<int>& particles,
                              const std::vector<int>& holes) {
  const std::uint32_t pmask = to_mask(particles);
  const std::uint32_t hmask = to_mask(holes);
  if (pmask & hmask) {
    throw std::invalid_argument("conditional_law: particle and hole sets overlap");
  }
  EnumeratedLaw out;
  out.n = law.n;
  out.r = law.r - static_cast<int>(particles.size());
  double z = 0.0;
  for (const auto& [mask, prob] : law.probs) {
    if ((mask & pmask) == pmask && (mask & hmask) == 0) z += prob;
  }
  if (z <= 0.0) {
    throw std::invalid_argument("conditional_law: conditioning event has zero probability");
  }
  for (const auto& [mask, prob] : law.probs) {
    if ((mask & pmask) == pmask && (mask & hmask) == 0) {
      out.probs.emplace_back(mask & ~pmask, prob / z);
    }
  }
  std::sort(out.probs.begin(), out.probs.end());
  return out;
}

double total_variation(const EnumeratedLaw& a, const EnumeratedLaw& b) {
  double tv = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.probs.size() || j < b.probs.size()) {
    if (j >= b.probs.size() || (i < a.probs.size() && a.probs[i].first < b.probs[j].first)) {
      tv += std::abs(a.probs[i].second);
      ++i;
    } else if (i >= a.probs.size() || b.probs[j].first < a.probs[i].first) {
      tv += std::abs(b.probs[j].second);
      ++j;
    } else {
      tv += std::abs(a.probs[i].second - b.probs[j].second);
      ++i;
      ++j;
    }
  }
  return 0.5 * tv;
}

nlohmann::json CheckReport::to_json() const {
  return nlohmann::json{{"check", check},         {"instance", instance},
                        {"metric", metric},       {"value", value},
                        {"tolerance", tolerance}, {"pass", pass}};
}

CheckReport check_palm(const ProjectionMatrix& p, int q) {
  CheckReport rep;
  rep.check = "palm";
  rep.instance = "q=" + std::to_string(q);
  rep.tolerance = 1e-10;
  const double diag = p.P(q, q) / p.space.weights[static_cast<std::size_t>(q)];
  if (diag <= 1e-10) {
    rep.metric = "impossible_event";
    rep.value = 0.0;
    rep.pass = true;
    return rep;
  }
  const EnumeratedLaw base = enumerate_law(p);
  const EnumeratedLaw conditioned = conditional_law(base, {q}, {});
  const EnumeratedLaw via_kernel = enumerate_law(palm_kernel(p, q));
  rep.metric = "tv_distance";
  rep.value = total_variation(conditioned, via_kernel);
  rep.pass = rep.value <= rep.tolerance;
  return rep;
}

CheckReport check_hole(const ProjectionMatrix& p, int q) {
  CheckReport rep;
  rep.check = "hole";
  rep.instance = "q=" + std::to_string(q);
  rep.tolerance = 1e-10;
  const double diag = p.P(q, q);
  if (1.0 - diag <= 1e-10) {
    rep.metric = "impossible_event";
    rep.value = 0.0;
    rep.pass = true;
    return rep;
  }
  const EnumeratedLaw base = enumerate_law(p);
  const EnumeratedLaw conditioned = conditional_law(base, {}, {q});
  const EnumeratedLaw via_kernel = enumerate_law(hole_kernel(p, q));
  rep.metric = "tv_distance";
  rep.value = total_variation(conditioned, via_kernel);
  rep.pass = rep.value <= rep.tolerance;
  return rep;
}

CheckReport check_mult(const ProjectionMatrix& p, const FunctionalSpec& g) {
  CheckReport rep;
  rep.check = "mult";
  rep.instance = "n=" + std::to_string(p.space.size()) + ",r=" + std::to_string(p.rank);
  rep.tolerance = 1e-8;
  rep.metric = "tv_distance_plus_normalizer";
  const EnumeratedLaw base = enumerate_law(p);
  double z = 0.0;
  std::vector<std::pair<std::uint32_t, double>> reweighted;
  for (const auto& [mask, prob] : base.probs) {
    double psi = 1.0;
    for (int i = 0; i < base.n; ++i) {
      if (mask & (1u << i)) psi *= g.values(p.space.points[i]);
    }
    reweighted.emplace_back(mask, psi * prob);
    z += psi * prob;
  }
  if (std::abs(z) < 1e-300) {
    throw std::invalid_argument("check_mult: reweighted law has zero mass");
  }
  const double det_z = multiplicative_expectation(g, p);
  const double norm_err = std::abs(z - det_z) / std::max(1.0, std::abs(det_z));
  if (norm_err > 1e-10) {
    rep.value = norm_err;
    rep.pass = false;
    return rep;
  }
  EnumeratedLaw weighted;
  weighted.n = base.n;
  weighted.r = base.r;
  for (auto& [mask, prob] : reweighted) weighted.probs.emplace_back(mask, prob / z);
  const EnumeratedLaw via_kernel = enumerate_law(transformed_kernel(g, p));
  rep.value = total_variation(weighted, via_kernel);
  rep.pass = rep.value <= rep.tolerance;
  return rep;
}

CheckReport check_rn(const ProjectionMatrix& p, const std::vector<int>& pts,
                     const std::vector<int>& perm) {
  CheckReport rep;
  rep.check = "rn";
  rep.instance = "l=" + std::to_string(pts.size());
  rep.tolerance = 1e-8;
  rep.metric = "max_relative_error";
  const int l = static_cast<int>(pts.size());
  const EnumeratedLaw base = enumerate_law(p);
  double maxerr = 0.0;
  for (const auto& [mask, prob] : base.probs) {
    if (prob < 1e-10) continue;
    // Split the conditioned points by occupancy in this configuration.
    std::vector<int> order;   // particles first, holes after
    std::vector<int> sigma;   // image position within `order`
    std::vector<int> holes_order;
    std::vector<int> holes_sigma;
    for (int i = 0; i < l; ++i) {
      const int node = pts[static_cast<std::size_t>(i)];
      if (mask & (1u << node)) {
        order.push_back(node);
        sigma.push_back(i);
      } else {
        holes_order.push_back(node);
        holes_sigma.push_back(i);
      }
    }
    const int m = static_cast<int>(order.size());
    order.insert(order.end(), holes_order.begin(), holes_order.end());
    sigma.insert(sigma.end(), holes_sigma.begin(), holes_sigma.end());
    // Re-express sigma as positions within `order`: order[i] maps to the node
    // pts[perm[sigma[i]]], which sits at some position in `order`.
    std::vector<int> pos_in_order(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
      const int node = pts[static_cast<std::size_t>(perm[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])])];
      const auto it = std::find(order.begin(), order.end(), node);
      pos_in_order[static_cast<std::size_t>(i)] = static_cast<int>(it - order.begin());
    }
    // Image configuration: move each occupied conditioned node to its image.
    std::uint32_t image = mask;
    for (int i = 0; i < m; ++i) {
      image &= ~(1u << order[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < m; ++i) {
      const int target = order[static_cast<std::size_t>(pos_in_order[static_cast<std::size_t>(i)])];
      image |= (1u << target);
    }
    const double ratio = base.prob(image) / prob;
    Configuration x;
    for (int i = 0; i < base.n; ++i) {
      if (mask & (1u << i)) x.indices.push_back(i);
    }
    const RNReport formula = rn_permutation(p, order, m, pos_in_order, x);
    const double err = std::abs(formula.value - ratio) / std::max(std::abs(ratio), 1e-12);
    maxerr = std::max(maxerr, err);
  }
  rep.value = maxerr;
  rep.pass = maxerr <= rep.tolerance;
  return rep;
}

MCReport mc_compare(const std::vector<double>& values, double target, double sigma_mult) {
  MCReport rep;
  rep.target = target;
  const double n = static_cast<double>(values.size());
  if (values.empty()) return rep;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= std::max(n - 1.0, 1.0);
  rep.mean = mean;
  rep.stderr_ = std::sqrt(var / n);
  const double denom = rep.stderr_ > 0.0 ? rep.stderr_ : 1e-300;
  rep.sigmas = std::abs(mean - target) / denom;
  rep.pass = std::abs(mean - target) <= sigma_mult * rep.stderr_ ||
             std::abs(mean - target) < 1e-12;
  return rep;
}

namespace {

double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const double u1 =
      std::max(counter_rng_uniform(seed, stream, 2 * counter), 1e-16);
  const double u2 = counter_rng_uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

ProjectionMatrix frame_to_projection(const GroundSpace& space, Eigen::MatrixXd frame) {
  Eigen::VectorXd sw(space.size());
  for (int i = 0; i < space.size(); ++i) sw(i) = std::sqrt(space.weights[i]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * frame);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(space.size(), frame.cols());
  // Undo the weight scaling so projection_from_frame re-applies it and
  // validates weighted orthonormality.
  for (int i = 0; i < space.size(); ++i) q.row(i) /= sw(i);
  return projection_from_frame(space, q);
}

}  // namespace

ProjectionMatrix random_frame_projection(const GroundSpace& space, int r,
                                         std::uint64_t seed, std::uint64_t stream) {
  Eigen::MatrixXd frame(space.size(), r);
  std::uint64_t c = 0;
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < space.size(); ++i) frame(i, j) = gaussian(seed, stream, c++);
  }
  return frame_to_projection(space, std::move(frame));
}

ProjectionMatrix poly_frame_projection(const GroundSpace& space, int r,
                                       std::uint64_t seed, std::uint64_t stream) {
  Eigen::MatrixXd frame(space.size(), r);
  for (int i = 0; i < space.size(); ++i) {
    const double h =
        std::exp(0.3 * gaussian(seed, stream, static_cast<std::uint64_t>(i)));
    double mono = 1.0;
    for (int j = 0; j < r; ++j) {
      frame(i, j) = h * mono;
      mono *= space.points[i];
    }
  }
  return frame_to_projection(space, std::move(frame));
}

}  // namespace dpp
