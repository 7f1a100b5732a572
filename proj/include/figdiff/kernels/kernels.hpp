// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// OpenMP-parallel compute kernels. Every parallel loop assigns each output
// element to exactly one thread and keeps the per-element summation order
// fixed, so results are bit-stable across thread counts. Serial reference
// implementations for testing live in kernels_ref.hpp.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace figdiff::kernels {

// ---------------------------------------------------------------------------
// conv2d, NCHW layout, square kernel
// ---------------------------------------------------------------------------

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci, int H, int W,
                    int Co, int K, int stride, int pad) {
  const int Ho = conv_out_dim(H, K, stride, pad);
  const int Wo = conv_out_dim(W, K, stride, pad);
  const std::size_t x_c = static_cast<std::size_t>(H) * W;
  const std::size_t y_c = static_cast<std::size_t>(Ho) * Wo;

#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Co; ++co) {
      std::vector<T> acc(Wo);
      const T* wc = w + static_cast<std::size_t>(co) * Ci * K * K;
      T* yrow_base = y + (static_cast<std::size_t>(b) * Co + co) * y_c;
      for (int oh = 0; oh < Ho; ++oh) {
        for (int ow = 0; ow < Wo; ++ow) acc[ow] = bias ? bias[co] : T(0);
        for (int ci = 0; ci < Ci; ++ci) {
          const T* xc = x + (static_cast<std::size_t>(b) * Ci + ci) * x_c;
          const T* wk = wc + static_cast<std::size_t>(ci) * K * K;
          for (int kh = 0; kh < K; ++kh) {
            const int ih = oh * stride - pad + kh;
            if (ih < 0 || ih >= H) continue;
            const T* xrow = xc + static_cast<std::size_t>(ih) * W;
            for (int kw = 0; kw < K; ++kw) {
              const T wv = wk[kh * K + kw];
              // valid ow range so that iw = ow*stride - pad + kw lies in [0, W)
              int lo = 0, hi = Wo - 1;
              if (stride == 1) {
                lo = std::max(0, pad - kw);
                hi = std::min(Wo - 1, W - 1 + pad - kw);
                const T* xs = xrow + lo - pad + kw;
                T* as = acc.data() + lo;
                const int len = hi - lo + 1;
                for (int i = 0; i < len; ++i) as[i] += wv * xs[i];
              } else {
                for (int ow = lo; ow <= hi; ++ow) {
                  const int iw = ow * stride - pad + kw;
                  if (iw >= 0 && iw < W) acc[ow] += wv * xrow[iw];
                }
              }
            }
          }
        }
        T* yrow = yrow_base + static_cast<std::size_t>(oh) * Wo;
        for (int ow = 0; ow < Wo; ++ow) yrow[ow] = acc[ow];
      }
    }
  }
}

/// dL/dx. Gather formulation: each input element is produced by one thread.
template <typename T>
void conv2d_backward_input(const T* dy, const T* w, T* dx, int B, int Ci, int H, int W, int Co,
                           int K, int stride, int pad) {
  const int Ho = conv_out_dim(H, K, stride, pad);
  const int Wo = conv_out_dim(W, K, stride, pad);
  const std::size_t x_c = static_cast<std::size_t>(H) * W;
  const std::size_t y_c = static_cast<std::size_t>(Ho) * Wo;

#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int ci = 0; ci < Ci; ++ci) {
      std::vector<T> acc(W);
      T* dxc = dx + (static_cast<std::size_t>(b) * Ci + ci) * x_c;
      for (int ih = 0; ih < H; ++ih) {
        for (int iw = 0; iw < W; ++iw) acc[iw] = T(0);
        for (int co = 0; co < Co; ++co) {
          const T* dyc = dy + (static_cast<std::size_t>(b) * Co + co) * y_c;
          const T* wk = w + (static_cast<std::size_t>(co) * Ci + ci) * K * K;
          for (int kh = 0; kh < K; ++kh) {
            const int t = ih + pad - kh;
            if (t < 0 || t % stride != 0) continue;
            const int oh = t / stride;
            if (oh >= Ho) continue;
            const T* dyrow = dyc + static_cast<std::size_t>(oh) * Wo;
            for (int kw = 0; kw < K; ++kw) {
              const T wv = wk[kh * K + kw];
              if (stride == 1) {
                const int lo = std::max(0, kw - pad);
                const int hi = std::min(W - 1, Wo - 1 + kw - pad);
                const T* ds = dyrow + lo + pad - kw;
                T* as = acc.data() + lo;
                const int len = hi - lo + 1;
                for (int i = 0; i < len; ++i) as[i] += wv * ds[i];
              } else {
                for (int iw = 0; iw < W; ++iw) {
                  const int u = iw + pad - kw;
                  if (u < 0 || u % stride != 0) continue;
                  const int ow = u / stride;
                  if (ow < Wo) acc[iw] += wv * dyrow[ow];
                }
              }
            }
          }
        }
        T* dxrow = dxc + static_cast<std::size_t>(ih) * W;
        for (int iw = 0; iw < W; ++iw) dxrow[iw] = acc[iw];
      }
    }
  }
}

/// dL/dw and dL/db, accumulated into dw/db. One thread per weight element.
template <typename T>
void conv2d_backward_weights(const T* dy, const T* x, T* dw, T* db, int B, int Ci, int H, int W,
                             int Co, int K, int stride, int pad) {
  const int Ho = conv_out_dim(H, K, stride, pad);
  const int Wo = conv_out_dim(W, K, stride, pad);
  const std::size_t x_c = static_cast<std::size_t>(H) * W;
  const std::size_t y_c = static_cast<std::size_t>(Ho) * Wo;

#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < Co; ++co) {
    for (int ci = 0; ci < Ci; ++ci) {
      for (int kh = 0; kh < K; ++kh) {
        for (int kw = 0; kw < K; ++kw) {
          T acc = T(0);
          for (int b = 0; b < B; ++b) {
            const T* dyc = dy + (static_cast<std::size_t>(b) * Co + co) * y_c;
            const T* xc = x + (static_cast<std::size_t>(b) * Ci + ci) * x_c;
            for (int oh = 0; oh < Ho; ++oh) {
              const int ih = oh * stride - pad + kh;
              if (ih < 0 || ih >= H) continue;
              const T* dyrow = dyc + static_cast<std::size_t>(oh) * Wo;
              const T* xrow = xc + static_cast<std::size_t>(ih) * W;
              for (int ow = 0; ow < Wo; ++ow) {
                const int iw = ow * stride - pad + kw;
                if (iw >= 0 && iw < W) acc += dyrow[ow] * xrow[iw];
              }
            }
          }
          dw[((static_cast<std::size_t>(co) * Ci + ci) * K + kh) * K + kw] += acc;
        }
      }
    }
  }
  if (db) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < Co; ++co) {
      T acc = T(0);
      for (int b = 0; b < B; ++b) {
        const T* dyc = dy + (static_cast<std::size_t>(b) * Co + co) * y_c;
        for (std::size_t i = 0; i < y_c; ++i) acc += dyc[i];
      }
      db[co] += acc;
    }
  }
}

// ---------------------------------------------------------------------------
// group normalization without learned affine
// ---------------------------------------------------------------------------

template <typename T>
void group_norm_forward(const T* x, T* y, T* mean, T* rstd, int B, int C, int HW, int groups,
                        T eps) {
  const int cpg = C / groups;
  const std::size_t gsz = static_cast<std::size_t>(cpg) * HW;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int g = 0; g < groups; ++g) {
      const T* xg = x + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      T* yg = y + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      T mu = T(0);
      for (std::size_t i = 0; i < gsz; ++i) mu += xg[i];
      mu /= static_cast<T>(gsz);
      T var = T(0);
      for (std::size_t i = 0; i < gsz; ++i) {
        const T d = xg[i] - mu;
        var += d * d;
      }
      var /= static_cast<T>(gsz);
      const T rs = T(1) / std::sqrt(var + eps);
      for (std::size_t i = 0; i < gsz; ++i) yg[i] = (xg[i] - mu) * rs;
      mean[b * groups + g] = mu;
      rstd[b * groups + g] = rs;
    }
  }
}

template <typename T>
void group_norm_backward(const T* dy, const T* x, const T* mean, const T* rstd, T* dx, int B,
                         int C, int HW, int groups) {
  const int cpg = C / groups;
  const std::size_t gsz = static_cast<std::size_t>(cpg) * HW;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int g = 0; g < groups; ++g) {
      const T* xg = x + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      const T* dyg = dy + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      T* dxg = dx + (static_cast<std::size_t>(b) * C + g * cpg) * HW;
      const T mu = mean[b * groups + g];
      const T rs = rstd[b * groups + g];
      T sum_dy = T(0), sum_dyx = T(0);
      for (std::size_t i = 0; i < gsz; ++i) {
        const T xh = (xg[i] - mu) * rs;
        sum_dy += dyg[i];
        sum_dyx += dyg[i] * xh;
      }
      const T inv_n = T(1) / static_cast<T>(gsz);
      for (std::size_t i = 0; i < gsz; ++i) {
        const T xh = (xg[i] - mu) * rs;
        dxg[i] = rs * (dyg[i] - inv_n * sum_dy - xh * inv_n * sum_dyx);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// dense / gemm
// ---------------------------------------------------------------------------

/// y[b,o] = bias[o] + sum_i x[b,i] * w[o,i]
template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int B, int I, int O) {
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    const T* xb = x + static_cast<std::size_t>(b) * I;
    T* yb = y + static_cast<std::size_t>(b) * O;
    for (int o = 0; o < O; ++o) {
      T acc = bias ? bias[o] : T(0);
      const T* wo = w + static_cast<std::size_t>(o) * I;
      for (int i = 0; i < I; ++i) acc += xb[i] * wo[i];
      yb[o] = acc;
    }
  }
}

template <typename T>
void linear_backward(const T* dy, const T* x, const T* w, T* dx, T* dw, T* db, int B, int I,
                     int O) {
  if (dx) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
      const T* dyb = dy + static_cast<std::size_t>(b) * O;
      T* dxb = dx + static_cast<std::size_t>(b) * I;
      for (int i = 0; i < I; ++i) dxb[i] = T(0);
      for (int o = 0; o < O; ++o) {
        const T g = dyb[o];
        const T* wo = w + static_cast<std::size_t>(o) * I;
        for (int i = 0; i < I; ++i) dxb[i] += g * wo[i];
      }
    }
  }
  if (dw) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < O; ++o) {
      T* dwo = dw + static_cast<std::size_t>(o) * I;
      for (int b = 0; b < B; ++b) {
        const T g = dy[static_cast<std::size_t>(b) * O + o];
        const T* xb = x + static_cast<std::size_t>(b) * I;
        for (int i = 0; i < I; ++i) dwo[i] += g * xb[i];
      }
    }
  }
  if (db) {
    for (int o = 0; o < O; ++o) {
      T acc = T(0);
      for (int b = 0; b < B; ++b) acc += dy[static_cast<std::size_t>(b) * O + o];
      db[o] += acc;
    }
  }
}

/// C[M,N] (+)= A[M,K] * B[K,N]
template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    T* crow = C + static_cast<std::size_t>(m) * N;
    if (!accumulate)
      for (int n = 0; n < N; ++n) crow[n] = T(0);
    const T* arow = A + static_cast<std::size_t>(m) * K;
    for (int k = 0; k < K; ++k) {
      const T a = arow[k];
      const T* brow = B + static_cast<std::size_t>(k) * N;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

/// C[M,N] (+)= A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    const T* arow = A + static_cast<std::size_t>(m) * K;
    T* crow = C + static_cast<std::size_t>(m) * N;
    for (int n = 0; n < N; ++n) {
      const T* brow = B + static_cast<std::size_t>(n) * K;
      T acc = accumulate ? crow[n] : T(0);
      for (int k = 0; k < K; ++k) acc += arow[k] * brow[k];
      crow[n] = acc;
    }
  }
}

/// C[M,N] (+)= A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    T* crow = C + static_cast<std::size_t>(m) * N;
    if (!accumulate)
      for (int n = 0; n < N; ++n) crow[n] = T(0);
    for (int k = 0; k < K; ++k) {
      const T a = A[static_cast<std::size_t>(k) * M + m];
      const T* brow = B + static_cast<std::size_t>(k) * N;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

// ---------------------------------------------------------------------------
// softmax over rows with optional key mask
// ---------------------------------------------------------------------------

/// Rows with no unmasked key are left all-zero. mask[n] == 0 disables key n.
template <typename T>
void softmax_rows(const T* logits, T* out, int M, int N, const unsigned char* mask) {
#pragma omp parallel for schedule(static)
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
      if (!mask || mask[n]) {
        orow[n] = std::exp(lrow[n] - mx);
        z += orow[n];
      } else {
        orow[n] = T(0);
      }
    }
    const T inv = T(1) / z;
    for (int n = 0; n < N; ++n) orow[n] *= inv;
  }
}

/// d logits given d softmax-output, with the same key mask used forward.
template <typename T>
void softmax_rows_backward(const T* a, const T* da, T* dlogits, int M, int N,
                           const unsigned char* mask) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    const T* arow = a + static_cast<std::size_t>(m) * N;
    const T* darow = da + static_cast<std::size_t>(m) * N;
    T* drow = dlogits + static_cast<std::size_t>(m) * N;
    T dot = T(0);
    for (int n = 0; n < N; ++n) dot += arow[n] * darow[n];
    for (int n = 0; n < N; ++n)
      drow[n] = (!mask || mask[n]) ? arow[n] * (darow[n] - dot) : T(0);
  }
}

// ---------------------------------------------------------------------------
// resampling and elementwise
// ---------------------------------------------------------------------------

template <typename T>
void upsample_nearest2x_forward(const T* x, T* y, int B, int C, int H, int W) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const T* xc = x + (static_cast<std::size_t>(b) * C + c) * H * W;
      T* yc = y + (static_cast<std::size_t>(b) * C + c) * 4 * H * W;
      for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
          const T v = xc[i * W + j];
          T* r0 = yc + (2 * i) * (2 * W) + 2 * j;
          T* r1 = r0 + 2 * W;
          r0[0] = v;
          r0[1] = v;
          r1[0] = v;
          r1[1] = v;
        }
      }
    }
  }
}

template <typename T>
void upsample_nearest2x_backward(const T* dy, T* dx, int B, int C, int H, int W) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const T* dyc = dy + (static_cast<std::size_t>(b) * C + c) * 4 * H * W;
      T* dxc = dx + (static_cast<std::size_t>(b) * C + c) * H * W;
      for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
          const T* r0 = dyc + (2 * i) * (2 * W) + 2 * j;
          const T* r1 = r0 + 2 * W;
          dxc[i * W + j] = r0[0] + r0[1] + r1[0] + r1[1];
        }
      }
    }
  }
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* dy, const T* x, T* dx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
}

}  // namespace figdiff::kernels
