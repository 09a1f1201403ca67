// tests/test_io.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "avsr/io.hpp"
#include "avsr/rng.hpp"

using namespace avsr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "avsr_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("FEAT files round-trip through f32 and re-serialize identically") {
  const auto dir = temp_dir();
  Rng rng(31);
  Matrix seq(13, 5);
  for (int t = 0; t < 13; ++t)
    for (int d = 0; d < 5; ++d) seq(t, d) = rng.uniform(-10.0, 10.0);

  const auto p1 = dir / "a.feat";
  const auto p2 = dir / "b.feat";
  write_feat(p1, seq);
  const Matrix back = read_feat(p1);
  REQUIRE(back.rows() == 13);
  REQUIRE(back.cols() == 5);
  // values agree to f32 resolution
  for (int t = 0; t < 13; ++t)
    for (int d = 0; d < 5; ++d)
      CHECK(back(t, d) == Catch::Approx(seq(t, d)).margin(1e-5));
  // write -> read -> write yields identical bytes
  write_feat(p2, back);
  CHECK(file_bytes(p1) == file_bytes(p2));
}

TEST_CASE("FEAT header starts with magic and version") {
  const auto dir = temp_dir();
  const auto p = dir / "magic.feat";
  write_feat(p, Matrix(2, 2, 1.0));
  const std::string bytes = file_bytes(p);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 4 * 4);
  CHECK(bytes.substr(0, 4) == "FEAT");
  CHECK(bytes[4] == 1);  // little-endian version 1
}

TEST_CASE("reading a non-FEAT file fails cleanly") {
  const auto dir = temp_dir();
  const auto p = dir / "junk.feat";
  std::ofstream(p) << "not a feature file";
  CHECK_THROWS_AS(read_feat(p), DataError);
  CHECK_THROWS_AS(read_feat(dir / "missing.feat"), DataError);
}

TEST_CASE("MODL blocks round-trip with names, shapes, and order") {
  const auto dir = temp_dir();
  NamedBlocks blocks;
  Rng rng(32);
  Matrix a(3, 4), b(1, 7);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
  for (int c = 0; c < 7; ++c) b(0, c) = rng.uniform(-1.0, 1.0);
  blocks.emplace_back("layer0.f.wx", a);
  blocks.emplace_back("out.b", b);

  const auto p1 = dir / "m1.modl";
  const auto p2 = dir / "m2.modl";
  write_model_blocks(p1, blocks);
  const NamedBlocks back = read_model_blocks(p1);
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "layer0.f.wx");
  CHECK(back[1].first == "out.b");
  CHECK(back[0].second.rows() == 3);
  CHECK(back[0].second.cols() == 4);
  write_model_blocks(p2, back);
  CHECK(file_bytes(p1) == file_bytes(p2));
}

TEST_CASE("FLAB files round-trip") {
  const auto dir = temp_dir();
  const std::vector<int> labels{0, 4, 4, 27, 1, 0};
  const auto p1 = dir / "x.flab";
  write_frame_labels(p1, labels);
  CHECK(read_frame_labels(p1) == labels);
  const auto p2 = dir / "y.flab";
  write_frame_labels(p2, read_frame_labels(p1));
  CHECK(file_bytes(p1) == file_bytes(p2));
}

TEST_CASE("PRIO files round-trip exactly in f64") {
  const auto dir = temp_dir();
  const std::vector<double> priors{0.5, 0.25, 0.125, 0.125};
  const auto p = dir / "p.prio";
  write_priors(p, priors);
  CHECK(read_priors(p) == priors);
  const auto p2 = dir / "p2.prio";
  write_priors(p2, read_priors(p));
  CHECK(file_bytes(p) == file_bytes(p2));
}

TEST_CASE("manifest round-trips and resolves relative paths") {
  const auto dir = temp_dir();
  std::vector<UtteranceRecord> records{
      {"utt00000", "feat/utt00000.audio.feat", "feat/utt00000.video.feat",
       "PLACE RED AT M ZERO PLEASE"},
      {"utt00001", "feat/utt00001.audio.feat", "feat/utt00001.video.feat",
       "BIN BLUE BY F TWO NOW"},
  };
  const auto p = dir / "train.manifest";
  write_manifest(p, records);
  const auto back = read_manifest(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "utt00000");
  CHECK(back[0].transcript == "PLACE RED AT M ZERO PLEASE");
  CHECK(back[1].audio_path == (dir / "feat/utt00001.audio.feat").string());
}

TEST_CASE("malformed manifest lines are rejected") {
  const auto dir = temp_dir();
  const auto p = dir / "bad.manifest";
  std::ofstream(p) << "id_only_no_tabs\n";
  CHECK_THROWS_AS(read_manifest(p), DataError);
}
