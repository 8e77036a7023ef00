// Benchmark: OpenMP-parallel kernels vs their serial reference
// implementations, verifying agreement while timing both.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpp/functionals.hpp"
#include "dpp/oracle.hpp"
#include "dpp/sampler.hpp"

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_ms(F&& f, int reps) {
  const double t0 = now_ms();
  for (int i = 0; i < reps; ++i) f();
  return (now_ms() - t0) / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled (serial build)\n");
#endif

  // Enumeration over C(20,10) = 184756 subsets.
  {
    std::vector<double> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(static_cast<double>(i) - 9.5);
    const auto space = dpp::make_discrete(pts);
    const auto p = dpp::random_frame_projection(space, 10, 7, 0);
    dpp::EnumeratedLaw par, ser;
    const double t_par = time_ms([&] { par = dpp::enumerate_law(p); }, 3);
    const double t_ser = time_ms([&] { ser = dpp::enumerate_law_serial(p); }, 3);
    const double diff = dpp::total_variation(par, ser);
    std::printf("enumerate_law  n=20 r=10: parallel %8.2f ms  serial %8.2f ms  "
                "speedup %.2fx  tv-diff %.2e\n",
                t_par, t_ser, t_ser / t_par, diff);
  }

  // Additive variance on an 800-node sine-kernel grid.
  {
    const auto space = dpp::make_quadrature(-20.0, 20.0, 800, dpp::QuadRule::GaussLegendre);
    const auto p = dpp::discretize(dpp::make_sine_kernel(), space, 1e-2);
    dpp::FunctionalSpec f;
    f.values = [](double x) { return (x >= 0.0 && x <= 5.0) ? 1.0 : 0.0; };
    double v_par = 0.0, v_ser = 0.0;
    const double t_par = time_ms([&] { v_par = dpp::additive_variance(f, p); }, 5);
    const double t_ser = time_ms([&] { v_ser = dpp::additive_variance_serial(f, p); }, 5);
    std::printf("additive_var   n=800:     parallel %8.2f ms  serial %8.2f ms  "
                "speedup %.2fx  |diff| %.2e\n",
                t_par, t_ser, t_ser / t_par, std::abs(v_par - v_ser));
  }

  // Sampling 20000 draws from a rank-20 projection on 200 nodes.
  {
    std::vector<double> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(static_cast<double>(i));
    const auto space = dpp::make_discrete(pts);
    const auto p = dpp::random_frame_projection(space, 20, 3, 0);
    std::vector<dpp::Configuration> a, b;
    const dpp::SamplerState st{11, 0, 0};
    const double t_par = time_ms([&] { a = dpp::sample_many(p, 20000, st); }, 1);
    const double t_ser = time_ms([&] { b = dpp::sample_many_serial(p, 20000, st); }, 1);
    bool equal = a.size() == b.size();
    for (std::size_t i = 0; equal && i < a.size(); ++i) {
      equal = a[i].indices == b[i].indices;
    }
    std::printf("sample_many    20k draws:  parallel %8.2f ms  serial %8.2f ms  "
                "speedup %.2fx  identical %s\n",
                t_par, t_ser, t_ser / t_par, equal ? "yes" : "NO");
  }
  return 0;
}
