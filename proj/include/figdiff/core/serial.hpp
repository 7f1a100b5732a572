// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian binary IO helpers and the FNV-1a hash used for config
// fingerprints. The build targets little-endian hosts; writes are plain
// memcpy of the in-memory representation.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace figdiff {

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

struct BinWriter {
  std::ofstream out;

  explicit BinWriter(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot open for write: " + path);
  }

  template <typename T>
  void put(const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }
  void close() {
    out.close();
    if (!out) throw std::runtime_error("write failed on close");
  }
};

struct BinReader {
  std::ifstream in;

  explicit BinReader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw std::runtime_error("cannot open for read: " + path);
  }

  template <typename T>
  T get() {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("unexpected end of file");
    return v;
  }
  void get_bytes(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("unexpected end of file");
  }
  std::string get_string() {
    auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    get_bytes(s.data(), n);
    return s;
  }
};

}  // namespace figdiff
