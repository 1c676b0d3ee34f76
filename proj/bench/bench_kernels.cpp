// Serial reference kernels against their OpenMP versions: wall time per call
// and a bit-identity check of the outputs.
//
//   compois_bench_kernels [threads] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "compois/cmp.hpp"
#include "compois/kernels.hpp"
#include "compois/rejection.hpp"
#include "compois/rng.hpp"

using namespace compois;

namespace {

double seconds_per_call(const std::function<void()>& fn, int repeats) {
  fn();
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / repeats;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s %12.3f %12.3f %9.2fx   %s\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;

  // Observation-sized inputs: a regression with n = 4096 rows spread over
  // both envelope branches.
  const std::size_t n = 4096;
  RngStream gen(2024);
  std::vector<CmpParams> params;
  std::vector<Count> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = 0.5 + 6.0 * gen.uniform();
    const double nu = 0.3 + 2.5 * gen.uniform();
    params.emplace_back(mu, nu);
    y.push_back(static_cast<Count>(mu));
  }

  std::printf("threads=%d repeats=%d n=%zu (OpenMP max threads %d)\n", threads, repeats, n,
              omp_get_max_threads());
  std::printf("%-22s %12s %12s %10s\n", "kernel", "serial ms", "omp ms", "speedup");

  {
    std::vector<Count> a(n), b(n);
    const double s = seconds_per_call([&] { kernels::draw_auxiliary_serial(params, 7, a); }, repeats);
    const double p =
        seconds_per_call([&] { kernels::draw_auxiliary_omp(params, 7, b, threads); }, repeats);
    report("draw_auxiliary", s, p, a == b);
  }
  {
    std::vector<double> a(n), b(n);
    const double s =
        seconds_per_call([&] { kernels::loglik_terms_serial(y, params, 100, 9, a); }, repeats);
    const double p = seconds_per_call(
        [&] { kernels::loglik_terms_omp(y, params, 100, 9, b, threads); }, repeats);
    report("loglik_terms (r=100)", s, p, a == b);
  }
  {
    const std::vector<double> mu{0.1, 0.5, 1, 2, 5, 10, 30};
    const std::vector<double> nu{0.1, 0.3, 0.7, 1, 1.5, 3, 10};
    auto make = [&] {
      std::vector<AcceptanceCell> cells;
      for (double m : mu)
        for (double v : nu) cells.push_back({m, v, 0, 0});
      return cells;
    };
    auto a = make();
    auto b = make();
    const int reps = std::max(1, repeats / 10);
    const double s =
        seconds_per_call([&] { kernels::acceptance_cells_serial(a, 10'000, 3); }, reps);
    const double p =
        seconds_per_call([&] { kernels::acceptance_cells_omp(b, 10'000, 3, threads); }, reps);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].proposals == b[i].proposals;
    report("acceptance_cells", s, p, same);
  }
  {
    std::vector<double> a(n), b(n);
    const kernels::IndexFn fn = [&](std::size_t i) {
      return log_unnormalized_mass(params[i], y[i]) - adaptive_log_z(params[i]).log_z;
    };
    const double s = seconds_per_call([&] { kernels::map_index_serial(fn, a); }, repeats);
    const double p = seconds_per_call([&] { kernels::map_index_omp(fn, b, threads); }, repeats);
    report("map_index (exact Z)", s, p, a == b);
  }
  return 0;
}
