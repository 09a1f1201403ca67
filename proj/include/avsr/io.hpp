// include/avsr/io.hpp

// Copyright 2026  AVSR Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef AVSR_IO_HPP
#define AVSR_IO_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "avsr/errors.hpp"
#include "avsr/matrix.hpp"

namespace avsr {

// On-disk formats.  All integers and floats are little-endian; features and
// model blocks are stored as 32-bit floats, priors as 64-bit.

namespace io {

inline void write_bytes(std::ostream &os, const void *p, size_t n) {
  os.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
  if (!os) throw DataError("io: short write");
}

inline void read_bytes(std::istream &is, void *p, size_t n) {
  is.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw DataError("io: unexpected end of file");
}

inline void write_u32(std::ostream &os, uint32_t v) { write_bytes(os, &v, 4); }
inline void write_u16(std::ostream &os, uint16_t v) { write_bytes(os, &v, 2); }
inline void write_f32(std::ostream &os, float v) { write_bytes(os, &v, 4); }
inline void write_f64(std::ostream &os, double v) { write_bytes(os, &v, 8); }

inline uint32_t read_u32(std::istream &is) {
  uint32_t v;
  read_bytes(is, &v, 4);
  return v;
}
inline uint16_t read_u16(std::istream &is) {
  uint16_t v;
  read_bytes(is, &v, 2);
  return v;
}
inline float read_f32(std::istream &is) {
  float v;
  read_bytes(is, &v, 4);
  return v;
}
inline double read_f64(std::istream &is) {
  double v;
  read_bytes(is, &v, 8);
  return v;
}

inline void write_magic(std::ostream &os, const char magic[4]) {
  write_bytes(os, magic, 4);
}

inline void expect_magic(std::istream &is, const char magic[4],
                         const std::string &path) {
  char got[4];
  read_bytes(is, got, 4);
  if (std::memcmp(got, magic, 4) != 0)
    throw DataError("io: bad magic in " + path);
}

inline std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("io: cannot write " + path.string());
  return os;
}

inline std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("io: cannot read " + path.string());
  return is;
}

}  // namespace io

// FEAT: "FEAT", u32 version=1, u32 T, u32 d, T*d f32 row-major.
inline void write_feat(const std::filesystem::path &path, const Matrix &seq) {
  auto os = io::open_out(path);
  io::write_magic(os, "FEAT");
  io::write_u32(os, 1);
  io::write_u32(os, static_cast<uint32_t>(seq.rows()));
  io::write_u32(os, static_cast<uint32_t>(seq.cols()));
  for (int t = 0; t < seq.rows(); ++t)
    for (int d = 0; d < seq.cols(); ++d)
      io::write_f32(os, static_cast<float>(seq(t, d)));
}

inline Matrix read_feat(const std::filesystem::path &path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "FEAT", path.string());
  const uint32_t version = io::read_u32(is);
  if (version != 1)
    throw DataError("io: unsupported FEAT version in " + path.string());
  const uint32_t T = io::read_u32(is);
  const uint32_t D = io::read_u32(is);
  Matrix seq(static_cast<int>(T), static_cast<int>(D));
  for (uint32_t t = 0; t < T; ++t)
    for (uint32_t d = 0; d < D; ++d)
      seq(static_cast<int>(t), static_cast<int>(d)) = io::read_f32(is);
  return seq;
}

// MODL: "MODL", u32 version=1, u32 block count, then per block:
// u32 name length, UTF-8 name, u32 rows, u32 cols, f32 data.
using NamedBlocks = std::vector<std::pair<std::string, Matrix>>;

inline void write_model_blocks(const std::filesystem::path &path,
                               const NamedBlocks &blocks) {
  auto os = io::open_out(path);
  io::write_magic(os, "MODL");
  io::write_u32(os, 1);
  io::write_u32(os, static_cast<uint32_t>(blocks.size()));
  for (const auto &[name, m] : blocks) {
    io::write_u32(os, static_cast<uint32_t>(name.size()));
    io::write_bytes(os, name.data(), name.size());
    io::write_u32(os, static_cast<uint32_t>(m.rows()));
    io::write_u32(os, static_cast<uint32_t>(m.cols()));
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        io::write_f32(os, static_cast<float>(m(r, c)));
  }
}

inline NamedBlocks read_model_blocks(const std::filesystem::path &path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "MODL", path.string());
  const uint32_t version = io::read_u32(is);
  if (version != 1)
    throw DataError("io: unsupported MODL version in " + path.string());
  const uint32_t count = io::read_u32(is);
  NamedBlocks blocks;
  blocks.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = io::read_u32(is);
    std::string name(name_len, '\0');
    io::read_bytes(is, name.data(), name_len);
    const uint32_t rows = io::read_u32(is);
    const uint32_t cols = io::read_u32(is);
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c)
        m(static_cast<int>(r), static_cast<int>(c)) = io::read_f32(is);
    blocks.emplace_back(std::move(name), std::move(m));
  }
  return blocks;
}

// FLAB: "FLAB", u32 T, T u16 class indices.
inline void write_frame_labels(const std::filesystem::path &path,
                               const std::vector<int> &labels) {
  auto os = io::open_out(path);
  io::write_magic(os, "FLAB");
  io::write_u32(os, static_cast<uint32_t>(labels.size()));
  for (int v : labels) io::write_u16(os, static_cast<uint16_t>(v));
}

inline std::vector<int> read_frame_labels(const std::filesystem::path &path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "FLAB", path.string());
  const uint32_t T = io::read_u32(is);
  std::vector<int> labels(T);
  for (uint32_t t = 0; t < T; ++t) labels[t] = io::read_u16(is);
  return labels;
}

// PRIO: "PRIO", u32 class count, f64 probabilities.
inline void write_priors(const std::filesystem::path &path,
                         const std::vector<double> &priors) {
  auto os = io::open_out(path);
  io::write_magic(os, "PRIO");
  io::write_u32(os, static_cast<uint32_t>(priors.size()));
  for (double v : priors) io::write_f64(os, v);
}

inline std::vector<double> read_priors(const std::filesystem::path &path) {
  auto is = io::open_in(path);
  io::expect_magic(is, "PRIO", path.string());
  const uint32_t K = io::read_u32(is);
  std::vector<double> priors(K);
  for (uint32_t k = 0; k < K; ++k) priors[k] = io::read_f64(is);
  return priors;
}

// Manifest: UTF-8 text, one record per line,
// <id>\t<audio_path>\t<video_path>\t<transcript>.
// Relative paths are interpreted relative to the manifest's directory.
struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  std::string video_path;
  std::string transcript;
};

inline void write_manifest(const std::filesystem::path &path,
                           const std::vector<UtteranceRecord> &records) {
  std::ofstream os(path);
  if (!os) throw DataError("io: cannot write " + path.string());
  for (const auto &r : records)
    os << r.id << '\t' << r.audio_path << '\t' << r.video_path << '\t'
       << r.transcript << '\n';
  if (!os) throw DataError("io: short write to " + path.string());
}

inline std::vector<UtteranceRecord> read_manifest(
    const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw DataError("io: cannot read " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&base](const std::string &p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  std::vector<UtteranceRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    UtteranceRecord r;
    size_t pos = 0;
    std::string fields[4];
    for (int f = 0; f < 3; ++f) {
      const size_t tab = line.find('\t', pos);
      if (tab == std::string::npos)
        throw DataError("io: malformed manifest line " +
                        std::to_string(line_no) + " in " + path.string());
      fields[f] = line.substr(pos, tab - pos);
      pos = tab + 1;
    }
    fields[3] = line.substr(pos);
    r.id = fields[0];
    r.audio_path = resolve(fields[1]);
    r.video_path = resolve(fields[2]);
    r.transcript = fields[3];
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace avsr

#endif  // AVSR_IO_HPP
