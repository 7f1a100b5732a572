// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Throughput comparison of the OpenMP kernels against the serial references
// on the shapes the denoising backbone actually runs.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "figdiff/core/rng.hpp"
#include "figdiff/kernels/kernels.hpp"
#include "figdiff/kernels/kernels_ref.hpp"

using namespace figdiff;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double omp_ms, double gflop) {
  std::printf("%-34s %9.3f ms %9.3f ms %7.2fx %8.2f GFLOP/s\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms, gflop / (omp_ms * 1e-3) * 1e-9);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  std::printf("%-34s %12s %12s %8s %10s\n", "kernel", "serial", "openmp", "speedup",
              "throughput");

  Rng rng(1);

  {  // conv2d forward, the dominant training cost: 8x16x64x32, 3x3
    const int B = 8, Ci = 16, Co = 16, H = 64, W = 32, K = 3;
    std::vector<float> x(static_cast<std::size_t>(B) * Ci * H * W),
        w(static_cast<std::size_t>(Co) * Ci * K * K), b(Co),
        y(static_cast<std::size_t>(B) * Co * H * W);
    rng.fill_normal(x.data(), x.size());
    rng.fill_normal(w.data(), w.size());
    const double flop = 2.0 * B * Co * H * W * Ci * K * K;
    const double s = time_ms([&] {
      kernels::ref::conv2d_forward(x.data(), w.data(), b.data(), y.data(), B, Ci, H, W, Co, K, 1,
                                   1);
    }, 3);
    const double p = time_ms([&] {
      kernels::conv2d_forward(x.data(), w.data(), b.data(), y.data(), B, Ci, H, W, Co, K, 1, 1);
    }, 10);
    report("conv2d fwd 8x16x64x32 k3", s, p, flop);
  }

  {  // conv2d input gradient, same shape
    const int B = 8, Ci = 16, Co = 16, H = 64, W = 32, K = 3;
    std::vector<float> dy(static_cast<std::size_t>(B) * Co * H * W),
        w(static_cast<std::size_t>(Co) * Ci * K * K),
        dx(static_cast<std::size_t>(B) * Ci * H * W);
    rng.fill_normal(dy.data(), dy.size());
    rng.fill_normal(w.data(), w.size());
    const double flop = 2.0 * B * Co * H * W * Ci * K * K;
    const double s = time_ms([&] {
      kernels::ref::conv2d_backward_input(dy.data(), w.data(), dx.data(), B, Ci, H, W, Co, K, 1,
                                          1);
    }, 3);
    const double p = time_ms([&] {
      kernels::conv2d_backward_input(dy.data(), w.data(), dx.data(), B, Ci, H, W, Co, K, 1, 1);
    }, 10);
    report("conv2d dgrad 8x16x64x32 k3", s, p, flop);
  }

  {  // conv2d weight gradient
    const int B = 8, Ci = 16, Co = 16, H = 64, W = 32, K = 3;
    std::vector<float> dy(static_cast<std::size_t>(B) * Co * H * W),
        x(static_cast<std::size_t>(B) * Ci * H * W),
        dw(static_cast<std::size_t>(Co) * Ci * K * K), db(Co);
    rng.fill_normal(dy.data(), dy.size());
    rng.fill_normal(x.data(), x.size());
    const double flop = 2.0 * B * Co * H * W * Ci * K * K;
    const double s = time_ms([&] {
      std::fill(dw.begin(), dw.end(), 0.f);
      kernels::ref::conv2d_backward_weights(dy.data(), x.data(), dw.data(), db.data(), B, Ci, H,
                                            W, Co, K, 1, 1);
    }, 3);
    const double p = time_ms([&] {
      std::fill(dw.begin(), dw.end(), 0.f);
      kernels::conv2d_backward_weights(dy.data(), x.data(), dw.data(), db.data(), B, Ci, H, W,
                                       Co, K, 1, 1);
    }, 10);
    report("conv2d wgrad 8x16x64x32 k3", s, p, flop);
  }

  {  // group norm
    const int B = 8, C = 48, HW = 16 * 8, G = 8;
    std::vector<float> x(static_cast<std::size_t>(B) * C * HW), y(x.size()), mean(B * G),
        rstd(B * G);
    rng.fill_normal(x.data(), x.size());
    const double flop = 4.0 * static_cast<double>(x.size());
    const double s = time_ms([&] {
      kernels::ref::group_norm_forward(x.data(), y.data(), mean.data(), rstd.data(), B, C, HW, G,
                                       1e-5f);
    }, 20);
    const double p = time_ms([&] {
      kernels::group_norm_forward(x.data(), y.data(), mean.data(), rstd.data(), B, C, HW, G,
                                  1e-5f);
    }, 20);
    report("group_norm 8x48x16x8", s, p, flop);
  }

  {  // attention-shaped gemm: 512 spatial queries, 64-dim heads
    const int M = 512, K = 64, N = 64;
    std::vector<float> A(static_cast<std::size_t>(M) * K), Bm(static_cast<std::size_t>(K) * N),
        C(static_cast<std::size_t>(M) * N);
    rng.fill_normal(A.data(), A.size());
    rng.fill_normal(Bm.data(), Bm.size());
    const double flop = 2.0 * M * K * N;
    const double s = time_ms([&] {
      kernels::ref::gemm_nn(A.data(), Bm.data(), C.data(), M, K, N, false);
    }, 20);
    const double p = time_ms([&] {
      kernels::gemm_nn(A.data(), Bm.data(), C.data(), M, K, N, false);
    }, 20);
    report("gemm_nn 512x64x64", s, p, flop);
  }

  return 0;
}
