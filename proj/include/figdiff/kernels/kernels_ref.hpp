// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Naive single-threaded reference kernels. These stay deliberately close to
// the textbook definitions; the test suite checks the OpenMP kernels against
// them and the benchmark target compares their throughput.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace figdiff::kernels::ref {

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci, int H, int W,
                    int Co, int K, int stride, int pad) {
  const int Ho = (H + 2 * pad - K) / stride + 1;
  const int Wo = (W + 2 * pad - K) / stride + 1;
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int oh = 0; oh < Ho; ++oh)
        for (int ow = 0; ow < Wo; ++ow) {
          T acc = bias ? bias[co] : T(0);
          for (int ci = 0; ci < Ci; ++ci)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw) {
                const int ih = oh * stride - pad + kh;
                const int iw = ow * stride - pad + kw;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                acc += w[((static_cast<std::size_t>(co) * Ci + ci) * K + kh) * K + kw] *
                       x[((static_cast<std::size_t>(b) * Ci + ci) * H + ih) * W + iw];
              }
          y[((static_cast<std::size_t>(b) * Co + co) * Ho + oh) * Wo + ow] = acc;
        }
}

template <typename T>
void conv2d_backward_input(const T* dy, const T* w, T* dx, int B, int Ci, int H, int W, int Co,
                           int K, int stride, int pad) {
  const int Ho = (H + 2 * pad - K) / stride + 1;
  const int Wo = (W + 2 * pad - K) / stride + 1;
  for (std::size_t i = 0; i < static_cast<std::size_t>(B) * Ci * H * W; ++i) dx[i] = T(0);
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int oh = 0; oh < Ho; ++oh)
        for (int ow = 0; ow < Wo; ++ow) {
          const T g = dy[((static_cast<std::size_t>(b) * Co + co) * Ho + oh) * Wo + ow];
          for (int ci = 0; ci < Ci; ++ci)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw) {
                const int ih = oh * stride - pad + kh;
                const int iw = ow * stride - pad + kw;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                dx[((static_cast<std::size_t>(b) * Ci + ci) * H + ih) * W + iw] +=
                    g * w[((static_cast<std::size_t>(co) * Ci + ci) * K + kh) * K + kw];
              }
        }
}

template <typename T>
void conv2d_backward_weights(const T* dy, const T* x, T* dw, T* db, int B, int Ci, int H, int W,
                             int Co, int K, int stride, int pad) {
  const int Ho = (H + 2 * pad - K) / stride + 1;
  const int Wo = (W + 2 * pad - K) / stride + 1;
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int oh = 0; oh < Ho; ++oh)
        for (int ow = 0; ow < Wo; ++ow) {
          const T g = dy[((static_cast<std::size_t>(b) * Co + co) * Ho + oh) * Wo + ow];
          if (db) db[co] += g;
          for (int ci = 0; ci < Ci; ++ci)
            for (int kh = 0; kh < K; ++kh)
              for (int kw = 0; kw < K; ++kw) {
                const int ih = oh * stride - pad + kh;
                const int iw = ow * stride - pad + kw;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                dw[((static_cast<std::size_t>(co) * Ci + ci) * K + kh) * K + kw] +=
                    g * x[((static_cast<std::size_t>(b) * Ci + ci) * H + ih) * W + iw];
              }
        }
}

template <typename T>
void group_norm_forward(const T* x, T* y, T* mean, T* rstd, int B, int C, int HW, int groups,
                        T eps) {
  const int cpg = C / groups;
  const std::size_t gsz = static_cast<std::size_t>(cpg) * HW;
  for (int b = 0; b < B; ++b)
    for (int g = 0; g < groups; ++g) {
      const T* xg = x + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      T* yg = y + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      T mu = T(0);
      for (std::size_t i = 0; i < gsz; ++i) mu += xg[i];
      mu /= static_cast<T>(gsz);
      T var = T(0);
      for (std::size_t i = 0; i < gsz; ++i) var += (xg[i] - mu) * (xg[i] - mu);
      var /= static_cast<T>(gsz);
      const T rs = T(1) / std::sqrt(var + eps);
      for (std::size_t i = 0; i < gsz; ++i) yg[i] = (xg[i] - mu) * rs;
      mean[b * groups + g] = mu;
      rstd[b * groups + g] = rs;
    }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int B, int I, int O) {
  for (int b = 0; b < B; ++b)
    for (int o = 0; o < O; ++o) {
      T acc = bias ? bias[o] : T(0);
      for (int i = 0; i < I; ++i)
        acc += x[static_cast<std::size_t>(b) * I + i] * w[static_cast<std::size_t>(o) * I + i];
      y[static_cast<std::size_t>(b) * O + o] = acc;
    }
}

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool accumulate) {
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) {
      T acc = accumulate ? C[static_cast<std::size_t>(m) * N + n] : T(0);
      for (int k = 0; k < K; ++k)
        acc += A[static_cast<std::size_t>(m) * K + k] * B[static_cast<std::size_t>(k) * N + n];
      C[static_cast<std::size_t>(m) * N + n] = acc;
    }
}

template <typename T>
void softmax_rows(const T* logits, T* out, int M, int N, const unsigned char* mask) {
  for (int m = 0; m < M; ++m) {
    const T* lrow = logits + static_cast<std::size_t>(m) * N;
    T* orow = out + static_cast<std::size_t>(m) * N;
    T mx = -std::numeric_limits<T>::infinity();
    for (int n = 0; n < N; ++n)
      if (!mask || mask[n]) mx = std::max(mx, lrow[n]);
    if (mx == -std::numeric_limits<T>::infinity()) {
      for (int n = 0; n < N; ++n) orow[n] = T(0);
      continue;
    }
    T z = T(0);
    for (int n = 0; n < N; ++n) {
      orow[n] = (!mask || mask[n]) ? std::exp(lrow[n] - mx) : T(0);
      z += orow[n];
    }
    for (int n = 0; n < N; ++n) orow[n] /= z;
  }
}

}  // namespace figdiff::kernels::ref
