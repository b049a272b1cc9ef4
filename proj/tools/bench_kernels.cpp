// SPDX-License-Identifier: MIT
//
// Times the OpenMP kernels against their serial reference implementations:
// block moment accumulation, MTTKRP, row-wise dataset simulation, and a
// whole partitioned fit at 1 vs all workers.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#include <CLI11.hpp>

#include "gdlm/moments.hpp"
#include "gdlm/partition.hpp"
#include "gdlm/rng.hpp"
#include "gdlm/sim.hpp"
#include "gdlm/tensor.hpp"

namespace {

double median_seconds(const std::function<void()>& fn, int reps) {
  std::vector<double> times;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

void print_row(const char* kernel, const char* size, double serial_s, double parallel_s) {
  std::printf("%-24s %-20s %10.4f %10.4f %8.2fx\n", kernel, size, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 20000, p = 30, d = 4, k = 4, reps = 5;
  int tensor_dim = 64;
  CLI::App app{"serial vs OpenMP kernel comparison"};
  app.add_option("--n", n, "observations");
  app.add_option("--p", p, "variables");
  app.add_option("--d", d, "categories");
  app.add_option("--k", k, "rank");
  app.add_option("--dim", tensor_dim, "MTTKRP tensor side length");
  app.add_option("--reps", reps, "repetitions (median reported)");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads=%d\n", omp_get_max_threads());
  std::printf("%-24s %-20s %10s %10s %9s\n", "kernel", "size", "serial_ms", "omp_ms",
              "speedup");

  gdlm::SimConfig cfg;
  cfg.p = p;
  cfg.k = k;
  cfg.d = d;
  cfg.n = n;
  cfg.seed = 7;
  const gdlm::ModelParams model = gdlm::sample_model(cfg);

  {
    gdlm::Dataset data;
    const double s = median_seconds([&] { data = gdlm::simulate_dataset_serial(model, cfg); }, reps);
    const double q = median_seconds([&] { data = gdlm::simulate_dataset(model, cfg); }, reps);
    char size[64];
    std::snprintf(size, sizeof(size), "n=%d p=%d", n, p);
    print_row("simulate_dataset", size, s, q);
  }

  const gdlm::Dataset data = gdlm::simulate_dataset(model, cfg);
  {
    const int third = p / 3;
    std::vector<int> vj, vs, vt;
    for (int v = 0; v < third; ++v) vj.push_back(v);
    for (int v = third; v < 2 * third; ++v) vs.push_back(v);
    for (int v = 2 * third; v < p; ++v) vt.push_back(v);
    gdlm::Tensor3 block;
    const double s = median_seconds(
        [&] { block = gdlm::block_tensor_serial(data, vj, vs, vt, 0.4); }, reps);
    const double q =
        median_seconds([&] { block = gdlm::block_tensor(data, vj, vs, vt, 0.4); }, reps);
    char size[64];
    std::snprintf(size, sizeof(size), "n=%d %dx%dx%d", n, (int)vj.size() * d,
                  (int)vs.size() * d, (int)vt.size() * d);
    print_row("block_tensor", size, s, q);
  }

  {
    gdlm::SplitMix64 rng(gdlm::derive_stream(7, "bench-mttkrp"));
    gdlm::Tensor3 T(tensor_dim, tensor_dim, tensor_dim);
    for (std::size_t i = 0; i < T.size(); ++i) T.data()[i] = rng.next_double() - 0.3;
    gdlm::MatrixXd B(tensor_dim, k), C(tensor_dim, k);
    for (int h = 0; h < k; ++h)
      for (int i = 0; i < tensor_dim; ++i) {
        B(i, h) = rng.next_double();
        C(i, h) = rng.next_double();
      }
    gdlm::MatrixXd Z;
    const double s = median_seconds([&] { Z = gdlm::mttkrp_serial(T, 1, B, C); }, reps);
    const double q = median_seconds([&] { Z = gdlm::mttkrp(T, 1, B, C); }, reps);
    char size[64];
    std::snprintf(size, sizeof(size), "%d^3 k=%d", tensor_dim, k);
    print_row("mttkrp", size, s, q);
  }

  {
    const auto anchors = gdlm::default_anchor_sets(p, k, data.categories);
    const int r = gdlm::default_partition_count(p, k, data.categories, anchors);
    const auto plan = gdlm::build_partition_plan(p, k, data.categories, anchors, r, 7);
    gdlm::FitOptions opts;
    opts.factorize.seed = 7;
    opts.factorize.max_iters = 100;
    opts.workers = 1;
    const double s = median_seconds(
        [&] { gdlm::fit_partitioned(data, k, cfg.alpha_h * k, plan, opts); }, std::max(1, reps / 2));
    opts.workers = omp_get_max_threads();
    const double q = median_seconds(
        [&] { gdlm::fit_partitioned(data, k, cfg.alpha_h * k, plan, opts); }, std::max(1, reps / 2));
    char size[64];
    std::snprintf(size, sizeof(size), "p=%d r=%d", p, r);
    print_row("fit_partitioned", size, s, q);
  }

  return 0;
}
