// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent brute-force oracles used by the tests. These are deliberately
// written as direct transcriptions of the defining formulas, separate from
// the library implementations they check.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace figdiff::oracle {

// ---------------------------------------------------------------------------
// memory retrieval: cosine row, argmax slot, EMA update, softmax-weighted read
// ---------------------------------------------------------------------------

inline double vec_norm(const double* v, int c) {
  double s = 0;
  for (int i = 0; i < c; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

/// similarity row s_j = (e_j . q) / (|e_j| |q|) over one part block
inline std::vector<double> smr_similarities(const std::vector<double>& slots, int m, int c,
                                            const std::vector<double>& q) {
  std::vector<double> s(static_cast<std::size_t>(m));
  const double qn = vec_norm(q.data(), c);
  for (int j = 0; j < m; ++j) {
    const double* e = slots.data() + static_cast<std::size_t>(j) * c;
    double dot = 0;
    for (int i = 0; i < c; ++i) dot += e[i] * q[static_cast<std::size_t>(i)];
    s[static_cast<std::size_t>(j)] = dot / (vec_norm(e, c) * qn);
  }
  return s;
}

inline int smr_argmax(const std::vector<double>& s) {
  int k = 0;
  for (int j = 1; j < static_cast<int>(s.size()); ++j)
    if (s[static_cast<std::size_t>(j)] > s[static_cast<std::size_t>(k)]) k = j;
  return k;
}

/// e_k <- beta e_k + (1 - beta) q, in place
inline void smr_update(std::vector<double>& slots, int m, int c, const std::vector<double>& q,
                       double beta) {
  const int k = smr_argmax(smr_similarities(slots, m, c, q));
  double* e = slots.data() + static_cast<std::size_t>(k) * c;
  for (int i = 0; i < c; ++i) e[i] = beta * e[i] + (1.0 - beta) * q[static_cast<std::size_t>(i)];
}

/// F = sum_j softmax_j(s)_j e_j
inline std::vector<double> smr_read(const std::vector<double>& slots, int m, int c,
                                    const std::vector<double>& q) {
  const std::vector<double> s = smr_similarities(slots, m, c, q);
  double z = 0;
  std::vector<double> a(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    a[static_cast<std::size_t>(j)] = std::exp(s[static_cast<std::size_t>(j)]);
    z += a[static_cast<std::size_t>(j)];
  }
  std::vector<double> f(static_cast<std::size_t>(c), 0.0);
  for (int j = 0; j < m; ++j) {
    const double w = a[static_cast<std::size_t>(j)] / z;
    const double* e = slots.data() + static_cast<std::size_t>(j) * c;
    for (int i = 0; i < c; ++i) f[static_cast<std::size_t>(i)] += w * e[i];
  }
  return f;
}

// ---------------------------------------------------------------------------
// scaled dot-product attention with optional key mask
// ---------------------------------------------------------------------------

/// out[q] = sum_k softmax_k(Q_q . K_k / sqrt(d)) V_k
inline std::vector<double> attention(const std::vector<double>& Q, int nq,
                                     const std::vector<double>& K, const std::vector<double>& V,
                                     int nk, int d, int dv,
                                     const std::vector<std::uint8_t>& mask) {
  std::vector<double> out(static_cast<std::size_t>(nq) * dv, 0.0);
  for (int qi = 0; qi < nq; ++qi) {
    std::vector<double> logits(static_cast<std::size_t>(nk), 0.0);
    for (int ki = 0; ki < nk; ++ki)
      for (int i = 0; i < d; ++i)
        logits[static_cast<std::size_t>(ki)] += Q[static_cast<std::size_t>(qi) * d + i] *
                                                K[static_cast<std::size_t>(ki) * d + i];
    for (auto& l : logits) l /= std::sqrt(static_cast<double>(d));
    double z = 0;
    std::vector<double> a(static_cast<std::size_t>(nk), 0.0);
    for (int ki = 0; ki < nk; ++ki) {
      if (!mask.empty() && !mask[static_cast<std::size_t>(ki)]) continue;
      a[static_cast<std::size_t>(ki)] = std::exp(logits[static_cast<std::size_t>(ki)]);
      z += a[static_cast<std::size_t>(ki)];
    }
    for (int ki = 0; ki < nk; ++ki)
      for (int i = 0; i < dv; ++i)
        out[static_cast<std::size_t>(qi) * dv + i] +=
            a[static_cast<std::size_t>(ki)] / z * V[static_cast<std::size_t>(ki) * dv + i];
  }
  return out;
}

/// row-major (rows, inner) x weight (out, inner): proj = x W^T
inline std::vector<double> project(const std::vector<double>& x, int rows, int inner,
                                   const std::vector<double>& w, int out) {
  std::vector<double> p(static_cast<std::size_t>(rows) * out, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int o = 0; o < out; ++o) {
      double acc = 0;
      for (int i = 0; i < inner; ++i)
        acc += x[static_cast<std::size_t>(r) * inner + i] * w[static_cast<std::size_t>(o) * inner + i];
      p[static_cast<std::size_t>(r) * out + o] = acc;
    }
  return p;
}

}  // namespace figdiff::oracle
