// tests/test_cli.cpp

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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "avsr/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "avsr_cli_test";

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string &args) {
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = std::string(AVSR_BIN) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path &p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

std::string file_bytes(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

int count_lines(const std::string &text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Tiny everything: the CLI test only checks the command surface, not
// recognition quality.
void write_micro_config(const fs::path &path) {
  std::ofstream os(path);
  os << "# micro experiment\n"
     << "corpus_n = 12\n"
     << "corpus_seed = 5\n"
     << "audio_dim = 4\n"
     << "video_dim = 3\n"
     << "hidden_size = 4\n"
     << "am_layers = 1\n"
     << "lip_layers = 1\n"
     << "fusion_layers = 1\n"
     << "bn_hidden = 8\n"
     << "bn_width = 3\n"
     << "splice_left = 2\n"
     << "splice_right = 2\n"
     << "lr_am = 0.01\n"
     << "lr_lip = 0.01\n"
     << "lr_fusion = 0.01\n"
     << "min_epochs = 1\n"
     << "min_epochs_fusion = 1\n"
     << "max_epochs = 1\n"
     << "bias_grid = 0,5\n";
}

}  // namespace

TEST_CASE("cli pipeline end to end") {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  const fs::path config = kWork / "micro.conf";
  write_micro_config(config);
  const std::string common = " --config " + config.string() + " --data " +
                             (kWork / "data").string() + " --model-dir " +
                             (kWork / "models").string();

  SECTION("usage errors exit 1") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("no-such-command").exit_code == 1);
    const auto r = run_cli("gen-corpus --n 5 --out " +
                           (kWork / "tiny").string());
    CHECK(r.exit_code == 1);
    CHECK(count_lines(r.err) == 1);
  }

  SECTION("gen-corpus is deterministic and split correctly") {
    const auto r1 = run_cli("gen-corpus --config " + config.string() +
                            " --out " + (kWork / "data1").string());
    REQUIRE(r1.exit_code == 0);
    const auto r2 = run_cli("gen-corpus --config " + config.string() +
                            " --out " + (kWork / "data2").string());
    REQUIRE(r2.exit_code == 0);
    for (const char *name : {"train.manifest", "cv.manifest", "test.manifest"})
      CHECK(file_bytes(kWork / "data1" / name) ==
            file_bytes(kWork / "data2" / name));
    const auto train = avsr::read_manifest(kWork / "data1/train.manifest");
    const auto cv = avsr::read_manifest(kWork / "data1/cv.manifest");
    const auto test = avsr::read_manifest(kWork / "data1/test.manifest");
    CHECK(train.size() == 9);
    CHECK(cv.size() == 1);
    CHECK(test.size() == 2);
    CHECK(file_bytes(kWork / "data1" / "feat" / "utt00000.audio.feat") ==
          file_bytes(kWork / "data2" / "feat" / "utt00000.audio.feat"));
  }

  SECTION("training stages enforce their order") {
    REQUIRE(run_cli("gen-corpus --config " + config.string() + " --out " +
                    (kWork / "data").string())
                .exit_code == 0);
    const auto r = run_cli("train bn" + common);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("'am'") != std::string::npos);
    CHECK(count_lines(r.err) == 1);

    CHECK(run_cli("train lip" + common).exit_code == 2);
    CHECK(run_cli("train nosuch" + common).exit_code == 1);

    REQUIRE(run_cli("train am" + common).exit_code == 0);
    CHECK(fs::exists(kWork / "models/am.modl"));
    CHECK(fs::exists(kWork / "models/am.log"));
    REQUIRE(run_cli("train bn" + common).exit_code == 0);
    CHECK(fs::exists(kWork / "models/bn.modl"));
    CHECK(fs::exists(kWork / "models/priors.prio"));
    REQUIRE(run_cli("train lip" + common).exit_code == 0);
    REQUIRE(run_cli("train fusion" + common).exit_code == 0);

    // training log format: epoch\tloss\tcv_acc\tlr\tseconds
    std::ifstream log(kWork / "models/am.log");
    std::string line;
    REQUIRE(std::getline(log, line));
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    CHECK(fields.size() == 5);
    CHECK(fields[0] == "1");

    SECTION("extract-bn writes feature files and a manifest") {
      const auto r2 = run_cli("extract-bn" + common + " --split test --out " +
                              (kWork / "bnfeat").string());
      REQUIRE(r2.exit_code == 0);
      const auto records =
          avsr::read_manifest(kWork / "bnfeat/test.bn.manifest");
      REQUIRE(records.size() == 2);
      const avsr::Matrix bn = avsr::read_feat(records[0].video_path);
      CHECK(bn.cols() == 3);  // bn_width
    }

    SECTION("decode writes id, hypothesis, score lines") {
      const auto r2 = run_cli("decode" + common +
                              " --system am --audio clean --out " +
                              (kWork / "hyp.tsv").string());
      REQUIRE(r2.exit_code == 0);
      std::ifstream hyp(kWork / "hyp.tsv");
      std::string hline;
      int lines = 0;
      while (std::getline(hyp, hline)) {
        ++lines;
        std::stringstream hs(hline);
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(hs, col, '\t')) cols.push_back(col);
        REQUIRE(cols.size() == 3);
        CHECK(cols[0].substr(0, 3) == "utt");
        CHECK_NOTHROW(std::stod(cols[2]));
      }
      CHECK(lines == 2);
      // noisy decode works too
      CHECK(run_cli("decode" + common +
                    " --system decision --audio 0 --out " +
                    (kWork / "hyp0.tsv").string())
                .exit_code == 0);
    }

    SECTION("tune-bias reports the grid and stores the choice") {
      const auto r2 = run_cli("tune-bias" + common);
      REQUIRE(r2.exit_code == 0);
      CHECK(r2.out.find("selected b=") != std::string::npos);
      CHECK(fs::exists(kWork / "models/fusion_bias.txt"));
    }

    SECTION("evaluate emits the 14-row condition grid") {
      const auto r2 = run_cli("evaluate" + common + " --out " +
                              (kWork / "results.tsv").string());
      REQUIRE(r2.exit_code == 0);
      std::ifstream results(kWork / "results.tsv");
      std::string rline;
      int rows = 0;
      while (std::getline(results, rline)) {
        ++rows;
        std::stringstream rs(rline);
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(rs, col, '\t')) cols.push_back(col);
        REQUIRE(cols.size() == 4);
        const double cer_value = std::stod(cols[3]);
        CHECK(cer_value >= 0.0);
      }
      CHECK(rows == 14);

      // identical rerun under the same seed
      const auto r3 = run_cli("evaluate" + common + " --out " +
                              (kWork / "results2.tsv").string());
      REQUIRE(r3.exit_code == 0);
      CHECK(file_bytes(kWork / "results.tsv") ==
            file_bytes(kWork / "results2.tsv"));
    }
  }

  SECTION("config files reject unknown keys") {
    const fs::path bad = kWork / "bad.conf";
    std::ofstream(bad) << "no_such_key = 1\n";
    const auto r = run_cli("gen-corpus --config " + bad.string() + " --out " +
                           (kWork / "x").string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("no_such_key") != std::string::npos);
  }

  SECTION("flag overrides beat config values") {
    const auto r = run_cli("gen-corpus --config " + config.string() +
                           " --set corpus_n=11 --out " +
                           (kWork / "data_override").string());
    REQUIRE(r.exit_code == 0);
    int total = 0;
    for (const char *name : {"train.manifest", "cv.manifest", "test.manifest"})
      total += static_cast<int>(
          avsr::read_manifest(kWork / "data_override" / name).size());
    CHECK(total == 11);
  }

  SECTION("missing paths are usage errors") {
    CHECK(run_cli("train am --config " + config.string()).exit_code == 1);
  }
}
