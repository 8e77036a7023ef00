#include "dpp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpp {

SampleFrame SampleFrame::from_projection(const ProjectionMatrix& p) {
  const auto sd = eigendecompose(p.P);
  SampleFrame f;
  f.space = p.space;
  f.basis.resize(p.space.size(), p.rank);
  int c = 0;
  for (int i = 0; i < p.space.size() && c < p.rank; ++i) {
    if (sd.eigenvalues(i) > 0.5) f.basis.col(c++) = sd.eigenvectors.col(i);
  }
  if (c != p.rank) {
    throw LinalgError("SampleFrame: eigenvalue count does not match projection rank");
  }
  return f;
}

Configuration sample(const SampleFrame& frame, const SamplerState& state) {
  const int n = static_cast<int>(frame.basis.rows());
  const int r = static_cast<int>(frame.basis.cols());
  Configuration out;
  if (r == 0) return out;
  Eigen::MatrixXd w = frame.basis;
  out.indices.reserve(static_cast<std::size_t>(r));
  // Each draw owns a block of 2^20 counter slots; one uniform per step.
  const std::uint64_t base = state.counter << 20;
  for (int k = r; k >= 1; --k) {
    // Row squared norms sum to k (trace of the current projection).
    const double u =
        counter_rng_uniform(state.seed, state.stream_id, base + static_cast<std::uint64_t>(k)) *
        static_cast<double>(k);
    double acc = 0.0;
    int chosen = -1;
    for (int i = 0; i < n; ++i) {
      acc += w.row(i).squaredNorm();
      if (u < acc) {
        chosen = i;
        break;
      }
    }
    if (chosen < 0) {
      // Roundoff pushed u past the accumulated mass; take the last node with
      // nonzero row norm.
      for (int i = n - 1; i >= 0; --i) {
        if (w.row(i).squaredNorm() > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    out.indices.push_back(chosen);
    if (k == 1) break;
    // Householder rotation in coefficient space sending the chosen row to a
    // multiple of e_1; the remaining columns then vanish at that node.
    Eigen::VectorXd v = w.row(chosen).transpose();
    const double norm = v.norm();
    if (v(0) >= 0.0) {
      v(0) += norm;
    } else {
      v(0) -= norm;
    }
    const double vsq = v.squaredNorm();
    if (vsq > 0.0) {
      w -= (2.0 / vsq) * ((w * v) * v.transpose());
    }
    w = w.rightCols(k - 1).eval();
    w.row(chosen).setZero();
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

Configuration sample(const ProjectionMatrix& p, const SamplerState& state) {
  return sample(SampleFrame::from_projection(p), state);
}

std::vector<Configuration> sample_many_serial(const ProjectionMatrix& p, int n,
                                              const SamplerState& state) {
  const SampleFrame frame = SampleFrame::from_projection(p);
  std::vector<Configuration> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SamplerState s = state;
    s.counter = state.counter + static_cast<std::uint64_t>(i);
    out[static_cast<std::size_t>(i)] = sample(frame, s);
  }
  return out;
}

std::vector<Configuration> sample_many(const ProjectionMatrix& p, int n,
                                       const SamplerState& state) {
  const SampleFrame frame = SampleFrame::from_projection(p);
  std::vector<Configuration> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    SamplerState s = state;
    s.counter = state.counter + static_cast<std::uint64_t>(i);
    out[static_cast<std::size_t>(i)] = sample(frame, s);
  }
  return out;
}

}  // namespace dpp
