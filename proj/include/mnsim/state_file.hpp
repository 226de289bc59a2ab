#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mnsim/system_state.hpp"

namespace mnsim {

/// Binary checkpoint of one SystemState. All numbers little-endian.
///
///   offset  type      content
///   0       char[8]   "MNSTATE\0"
///   8       u32       format version (1)
///   12      f64       L
///   20      u32       N
///   24      u32       model tag (0 newton, 1 abraham, 2 rotating)
///   28      f64       s
///   36      f64       simulation time
///   44      f64[11]   xi, v (or p), omega, m, I
///   132     f64[...]  E then B: for each flat mode index, 3 components,
///                     each as (re, im)
///   end-8   u64       FNV-1a 64 hash of every preceding byte
struct StateFile {
  static constexpr std::uint32_t version = 1;
  static constexpr char magic[8] = {'M', 'N', 'S', 'T', 'A', 'T', 'E', '\0'};

  ModelKind model = ModelKind::newton;
  double s = 0.0;
  double time = 0.0;
};

namespace io_detail {

inline std::uint64_t fnv1a(const std::vector<unsigned char>& buf, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= buf[i];
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
public:
  template <class T>
  void put(T value) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    buf.insert(buf.end(), b, b + sizeof(T));
  }
  std::vector<unsigned char> buf;
};

class Reader {
public:
  explicit Reader(const std::vector<unsigned char>& b) : buf_(b) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > buf_.size()) throw FormatError("state file: truncated");
    unsigned char b[sizeof(T)];
    std::memcpy(b, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::size_t pos() const noexcept { return pos_; }

private:
  const std::vector<unsigned char>& buf_;
  std::size_t pos_ = 0;
};

inline std::uint32_t model_tag(ModelKind m) { return static_cast<std::uint32_t>(m); }

inline ModelKind model_from_tag(std::uint32_t t) {
  if (t > 2) throw FormatError("state file: unknown model tag " + std::to_string(t));
  return static_cast<ModelKind>(t);
}

}  // namespace io_detail

inline std::vector<unsigned char> encode_state(const SystemState& u, const StateFile& meta) {
  io_detail::Writer w;
  for (char c : StateFile::magic) w.put(c);
  w.put(StateFile::version);
  const Grid& g = u.grid();
  w.put(g.length());
  w.put(static_cast<std::uint32_t>(g.modes_per_axis()));
  w.put(io_detail::model_tag(meta.model));
  w.put(meta.s);
  w.put(meta.time);
  const ParticleState& p = u.particle;
  for (int i = 0; i < 3; ++i) w.put(p.xi[i]);
  for (int i = 0; i < 3; ++i) w.put(p.v[i]);
  for (int i = 0; i < 3; ++i) w.put(p.omega[i]);
  w.put(p.m);
  w.put(p.I);
  for (const SpectralField3* f : {&u.em.E, &u.em.B})
    for (std::size_t i = 0; i < g.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        w.put((*f)[i](c).real());
        w.put((*f)[i](c).imag());
      }
  w.put(io_detail::fnv1a(w.buf, w.buf.size()));
  return std::move(w.buf);
}

struct DecodedState {
  SystemState state;
  StateFile meta;
};

inline DecodedState decode_state(const std::vector<unsigned char>& buf) {
  if (buf.size() < 8 + 4 + 8) throw FormatError("state file: too short");
  io_detail::Reader r(buf);
  for (char c : StateFile::magic)
    if (r.get<char>() != c) throw FormatError("state file: bad magic");
  const auto ver = r.get<std::uint32_t>();
  if (ver != StateFile::version) throw FormatError("state file: unsupported version " + std::to_string(ver));
  const std::vector<unsigned char> tail(buf.end() - 8, buf.end());
  const auto stored = io_detail::Reader(tail).get<std::uint64_t>();
  if (io_detail::fnv1a(buf, buf.size() - 8) != stored) throw FormatError("state file: checksum mismatch");
  const double L = r.get<double>();
  const auto N = r.get<std::uint32_t>();
  StateFile meta;
  meta.model = io_detail::model_from_tag(r.get<std::uint32_t>());
  meta.s = r.get<double>();
  meta.time = r.get<double>();
  Grid g(L, static_cast<int>(N));
  const std::size_t expected = 132 + g.size() * 6 * 2 * sizeof(double) + 8;
  if (buf.size() != expected) throw FormatError("state file: payload size does not match the grid");
  SystemState u(g);
  ParticleState& p = u.particle;
  for (int i = 0; i < 3; ++i) p.xi[i] = r.get<double>();
  for (int i = 0; i < 3; ++i) p.v[i] = r.get<double>();
  for (int i = 0; i < 3; ++i) p.omega[i] = r.get<double>();
  p.m = r.get<double>();
  p.I = r.get<double>();
  for (SpectralField3* f : {&u.em.E, &u.em.B})
    for (std::size_t i = 0; i < g.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        const double re = r.get<double>();
        const double im = r.get<double>();
        (*f)[i](c) = Complex(re, im);
      }
  return {std::move(u), meta};
}

inline void write_state_file(const std::string& path, const SystemState& u, const StateFile& meta) {
  const auto buf = encode_state(u, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("state file: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("state file: write failed for " + path);
}

inline DecodedState read_state_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("state file: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_state(buf);
}

}  // namespace mnsim
