// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Stylized memory retrieval: per-part blocks of prototype embeddings,
// initialized from an exemplar set, EMA-updated from training data and read
// by softmax-weighted aggregation over cosine similarities.

#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "figdiff/core/serial.hpp"
#include "figdiff/core/tensor.hpp"

namespace figdiff {

enum class EmbSource { image, memory, text, self_attended };

/// n rows of c-dim part embeddings plus per-row null flags. A null row stands
/// for an absent part and is skipped by every consumer.
template <typename T>
struct PartEmbeddings {
  Tensor<T> values;                     // (n, c)
  std::vector<std::uint8_t> null_row;   // 1 = null
  EmbSource source = EmbSource::image;

  PartEmbeddings() = default;
  PartEmbeddings(int n, int c, EmbSource src)
      : values({n, c}), null_row(static_cast<std::size_t>(n), 0), source(src) {}

  int n() const { return values.dim(0); }
  int c() const { return values.dim(1); }
  bool is_null(int i) const { return null_row[static_cast<std::size_t>(i)] != 0; }
};

namespace detail {

template <typename T>
T row_norm(const T* v, int c) {
  T acc = T(0);
  for (int i = 0; i < c; ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

/// Eq.1: cosine similarity between a slot and a query.
template <typename T>
T slot_cosine(const T* slot, const T* query, int c, T qnorm) {
  const T snorm = row_norm(slot, c);
  if (snorm < T(1e-12)) return T(0);
  T dot = T(0);
  for (int i = 0; i < c; ++i) dot += slot[i] * query[i];
  return dot / (snorm * qnorm);
}

}  // namespace detail

template <typename T>
class MemoryBank {
 public:
  MemoryBank() = default;
  MemoryBank(int n, int m, int c, double beta) : slots_({n, m, c}), beta_(beta) {
    if (n < 1 || m < 1 || c < 1) throw std::invalid_argument("memory bank: bad dims");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("memory bank: beta outside [0,1]");
  }

  int n() const { return slots_.dim(0); }
  int m() const { return slots_.dim(1); }
  int c() const { return slots_.dim(2); }
  double beta() const { return beta_; }
  std::uint64_t update_count() const { return update_count_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }
  void thaw() { frozen_ = false; }

  T* slot(int part, int j) { return slots_.ptr() + (static_cast<std::size_t>(part) * m() + j) * c(); }
  const T* slot(int part, int j) const {
    return slots_.ptr() + (static_cast<std::size_t>(part) * m() + j) * c();
  }
  const Tensor<T>& slots() const { return slots_; }

  /// Memory initialization: slot e_ij = embedding of exemplar j of part i.
  /// Short exemplar lists are filled cyclically (reported via *warning).
  static MemoryBank init(const std::vector<std::vector<std::vector<float>>>& exemplars, int m,
                         double beta, std::string* warning = nullptr) {
    const int n = static_cast<int>(exemplars.size());
    if (n < 1) throw std::invalid_argument("init_memory: no parts");
    int c = -1;
    for (int i = 0; i < n; ++i) {
      if (exemplars[static_cast<std::size_t>(i)].empty())
        throw std::invalid_argument("init_memory: empty exemplar list for part " +
                                    std::to_string(i));
      const int ci = static_cast<int>(exemplars[static_cast<std::size_t>(i)][0].size());
      if (c < 0) c = ci;
      if (ci != c) throw std::invalid_argument("init_memory: inconsistent embedding dims");
    }
    MemoryBank bank(n, m, c, beta);
    std::string warn;
    for (int i = 0; i < n; ++i) {
      const auto& list = exemplars[static_cast<std::size_t>(i)];
      if (static_cast<int>(list.size()) < m)
        warn += "part " + std::to_string(i) + " has " + std::to_string(list.size()) +
                " exemplars for " + std::to_string(m) + " slots (filled cyclically)\n";
      for (int j = 0; j < m; ++j) {
        const auto& e = list[static_cast<std::size_t>(j) % list.size()];
        T* s = bank.slot(i, j);
        for (int d = 0; d < c; ++d) s[d] = static_cast<T>(e[static_cast<std::size_t>(d)]);
      }
    }
    if (!warn.empty()) {
      if (warning)
        *warning = warn;
      else
        std::cerr << "init_memory: " << warn;
    }
    return bank;
  }

  /// Eq.1-2: similarity row s_i and the most relevant slot index. Ties break
  /// to the lowest index.
  std::pair<int, std::vector<T>> nearest_slot(int part_id, const T* query) const {
    check_part(part_id);
    const T qn = detail::row_norm(query, c());
    if (qn < T(1e-12)) throw std::invalid_argument("nearest_slot: null query");
    std::vector<T> s(static_cast<std::size_t>(m()));
    int best = 0;
    for (int j = 0; j < m(); ++j) {
      s[static_cast<std::size_t>(j)] = detail::slot_cosine(slot(part_id, j), query, c(), qn);
      if (s[static_cast<std::size_t>(j)] > s[static_cast<std::size_t>(best)]) best = j;
    }
    return {best, std::move(s)};
  }

  /// Eq.3 for one sample: for each non-null row F_i, the most relevant slot
  /// moves to beta*e + (1-beta)*F_i. Exactly one slot per part changes.
  void update(const PartEmbeddings<T>& f) {
    if (frozen_) throw std::logic_error("memory bank: update on frozen bank");
    check_rows(f);
    for (int i = 0; i < n(); ++i) {
      if (f.is_null(i)) continue;
      const T* q = f.values.ptr() + static_cast<std::size_t>(i) * c();
      const int k = nearest_slot(i, q).first;
      T* e = slot(i, k);
      const T b = static_cast<T>(beta_);
      for (int d = 0; d < c(); ++d) e[d] = b * e[d] + (T(1) - b) * q[d];
    }
    ++update_count_;
  }

  /// Eq.4-5: softmax attentive aggregation of each part block against the
  /// query row. Null rows pass through as null.
  PartEmbeddings<T> read(const PartEmbeddings<T>& queries) const {
    check_rows(queries);
    PartEmbeddings<T> out(n(), c(), EmbSource::memory);
    for (int i = 0; i < n(); ++i) {
      if (queries.is_null(i)) {
        out.null_row[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      const T* q = queries.values.ptr() + static_cast<std::size_t>(i) * c();
      std::vector<T> a = read_weights(i, q);
      T* dst = out.values.ptr() + static_cast<std::size_t>(i) * c();
      for (int j = 0; j < m(); ++j) {
        const T* e = slot(i, j);
        const T w = a[static_cast<std::size_t>(j)];
        for (int d = 0; d < c(); ++d) dst[d] += w * e[d];
      }
    }
    return out;
  }

  /// Softmax weights a_ij for one part block (exposed for tests).
  std::vector<T> read_weights(int part_id, const T* query) const {
    auto [k, s] = nearest_slot(part_id, query);
    (void)k;
    T mx = s[0];
    for (const T v : s) mx = std::max(mx, v);
    T z = T(0);
    for (auto& v : s) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : s) v /= z;
    return s;
  }

  /// d read / d query for one part block. Slots carry no gradient (EMA side
  /// effect only).
  void read_backward(int part_id, const T* query, const T* d_out, T* d_query) const {
    check_part(part_id);
    const int C = c(), M = m();
    const T qn = detail::row_norm(query, C);
    if (qn < T(1e-12)) throw std::invalid_argument("read_backward: null query");
    std::vector<T> gamma(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j)
      gamma[static_cast<std::size_t>(j)] = detail::slot_cosine(slot(part_id, j), query, C, qn);
    std::vector<T> a = gamma;
    T mx = a[0];
    for (const T v : a) mx = std::max(mx, v);
    T z = T(0);
    for (auto& v : a) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : a) v /= z;

    std::vector<T> da(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
      const T* e = slot(part_id, j);
      T dot = T(0);
      for (int d = 0; d < C; ++d) dot += d_out[d] * e[d];
      da[static_cast<std::size_t>(j)] = dot;
    }
    T wsum = T(0);
    for (int j = 0; j < M; ++j) wsum += a[static_cast<std::size_t>(j)] * da[static_cast<std::size_t>(j)];
    for (int d = 0; d < C; ++d) d_query[d] = T(0);
    for (int j = 0; j < M; ++j) {
      const T dgamma = a[static_cast<std::size_t>(j)] * (da[static_cast<std::size_t>(j)] - wsum);
      if (dgamma == T(0)) continue;
      const T* e = slot(part_id, j);
      const T en = detail::row_norm(e, C);
      if (en < T(1e-12)) continue;
      const T g = gamma[static_cast<std::size_t>(j)];
      for (int d = 0; d < C; ++d) {
        const T qhat = query[d] / qn;
        d_query[d] += dgamma * (e[d] / en - g * qhat) / qn;
      }
    }
  }

  // ------------------------------------------------------------------
  // serialization: header (version, n, m, c, beta, update_count), then
  // n*m*c little-endian 32-bit floats in part-major order.
  // ------------------------------------------------------------------
  static constexpr std::uint32_t kMagic = 0x424d4446;  // "FDMB"
  static constexpr std::uint32_t kVersion = 1;

  void save(const std::string& path) const {
    BinWriter w(path);
    w.put(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(n()));
    w.put(static_cast<std::uint32_t>(m()));
    w.put(static_cast<std::uint32_t>(c()));
    w.put(beta_);
    w.put(update_count_);
    for (const T v : slots_.data) w.put(static_cast<float>(v));
    w.close();
  }

  static MemoryBank load(const std::string& path) {
    BinReader r(path);
    if (r.template get<std::uint32_t>() != kMagic)
      throw std::runtime_error("memory bank load: bad magic in " + path);
    if (r.template get<std::uint32_t>() != kVersion)
      throw std::runtime_error("memory bank load: unsupported version in " + path);
    const auto n = r.template get<std::uint32_t>();
    const auto m = r.template get<std::uint32_t>();
    const auto c = r.template get<std::uint32_t>();
    const auto beta = r.template get<double>();
    const auto uc = r.template get<std::uint64_t>();
    MemoryBank bank(static_cast<int>(n), static_cast<int>(m), static_cast<int>(c), beta);
    bank.update_count_ = uc;
    for (auto& v : bank.slots_.data) v = static_cast<T>(r.template get<float>());
    return bank;
  }

  /// Load and validate the header against the active configuration.
  static MemoryBank load_checked(const std::string& path, int n, int m, int c, double beta) {
    MemoryBank bank = load(path);
    if (bank.n() != n || bank.m() != m || bank.c() != c)
      throw std::runtime_error("memory bank load: header (n,m,c)=(" + std::to_string(bank.n()) +
                               "," + std::to_string(bank.m()) + "," + std::to_string(bank.c()) +
                               ") does not match config (" + std::to_string(n) + "," +
                               std::to_string(m) + "," + std::to_string(c) + ")");
    if (std::abs(bank.beta() - beta) > 1e-12)
      throw std::runtime_error("memory bank load: beta mismatch");
    return bank;
  }

 private:
  void check_part(int part_id) const {
    if (part_id < 0 || part_id >= n())
      throw std::invalid_argument("memory bank: part_id out of range");
  }
  void check_rows(const PartEmbeddings<T>& f) const {
    if (f.n() != n() || f.c() != c())
      throw std::invalid_argument("memory bank: embeddings shape mismatch, got " +
                                  shape_str(f.values.shape));
  }

  Tensor<T> slots_;
  double beta_ = 0.995;
  std::uint64_t update_count_ = 0;
  bool frozen_ = false;
};

}  // namespace figdiff
