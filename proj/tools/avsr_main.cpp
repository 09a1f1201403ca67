// tools/avsr_main.cpp

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

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avsr/config.hpp"
#include "avsr/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string data_dir;
  std::string model_dir;
};

void add_common(CLI::App *cmd, CommonOpts *opts, bool with_paths = true) {
  cmd->add_option("--config", opts->config_path, "key = value config file");
  cmd->add_option("--set", opts->overrides,
                  "override a config key, e.g. --set hidden_size=16");
  if (with_paths) {
    cmd->add_option("--data", opts->data_dir, "corpus directory");
    cmd->add_option("--model-dir", opts->model_dir, "checkpoint directory");
  }
}

avsr::RunConfig build_config(const CommonOpts &opts) {
  avsr::RunConfig config = opts.config_path.empty()
                               ? avsr::RunConfig{}
                               : avsr::RunConfig::from_file(opts.config_path);
  config.apply_overrides(opts.overrides);
  if (!opts.data_dir.empty()) config.data_dir = opts.data_dir;
  if (!opts.model_dir.empty()) config.model_dir = opts.model_dir;
  return config;
}

avsr::PipelinePaths build_paths(const avsr::RunConfig &config) {
  if (config.data_dir.empty())
    throw avsr::UsageError("no corpus directory: pass --data or set data_dir");
  if (config.model_dir.empty())
    throw avsr::UsageError(
        "no checkpoint directory: pass --model-dir or set model_dir");
  return {fs::path(config.data_dir), fs::path(config.model_dir)};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Audio-visual sequence recognition toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  CommonOpts gen_opts;
  int gen_n = -1;
  std::string gen_seed;
  std::string gen_out;
  auto *gen = app.add_subcommand("gen-corpus",
                                 "generate the synthetic corpus");
  add_common(gen, &gen_opts, false);
  gen->add_option("--n", gen_n, "number of utterances");
  gen->add_option("--seed", gen_seed, "corpus seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->callback([&] {
    avsr::RunConfig config = build_config(gen_opts);
    if (gen_n >= 0) config.corpus_n = gen_n;
    if (!gen_seed.empty())
      config.apply_overrides({"corpus_seed=" + gen_seed});
    if (config.corpus_n < 10)
      throw avsr::UsageError("corpus needs at least 10 utterances");
    avsr::run_gen_corpus(config, gen_out);
  });

  // train <stage>
  CommonOpts train_opts;
  std::string stage;
  auto *train = app.add_subcommand("train", "train one pipeline stage");
  train->add_option("stage", stage, "am | bn | lip | fusion")->required();
  add_common(train, &train_opts);
  train->callback([&] {
    const avsr::RunConfig config = build_config(train_opts);
    const avsr::PipelinePaths paths = build_paths(config);
    if (stage == "am")
      avsr::run_stage_am(config, paths);
    else if (stage == "bn")
      avsr::run_stage_bn(config, paths);
    else if (stage == "lip")
      avsr::run_stage_lip(config, paths);
    else if (stage == "fusion")
      avsr::run_stage_fusion(config, paths);
    else
      throw avsr::UsageError("unknown stage '" + stage +
                             "' (expected am, bn, lip, or fusion)");
  });

  // extract-bn
  CommonOpts extract_opts;
  std::string extract_split = "test";
  std::string extract_out;
  auto *extract = app.add_subcommand("extract-bn",
                                     "write bottleneck feature files");
  add_common(extract, &extract_opts);
  extract->add_option("--split", extract_split, "train | cv | test");
  extract->add_option("--out", extract_out, "output directory")->required();
  extract->callback([&] {
    const avsr::RunConfig config = build_config(extract_opts);
    const avsr::PipelinePaths paths = build_paths(config);
    avsr::run_extract_bn(config, paths, extract_split, extract_out);
  });

  // decode
  CommonOpts decode_opts;
  std::string decode_split = "test";
  std::string decode_system = "fusion";
  std::string decode_audio = "clean";
  std::string decode_visual = "on";
  std::string decode_out;
  auto *decode = app.add_subcommand("decode", "decode one split");
  add_common(decode, &decode_opts);
  decode->add_option("--split", decode_split, "train | cv | test");
  decode->add_option("--system", decode_system,
                     "am | lip | fusion | decision");
  decode->add_option("--audio", decode_audio, "clean | off | SNR in dB");
  decode->add_option("--visual", decode_visual, "on | off");
  decode->add_option("--out", decode_out, "hypothesis file")->required();
  decode->callback([&] {
    const avsr::RunConfig config = build_config(decode_opts);
    const avsr::PipelinePaths paths = build_paths(config);
    if (decode_visual != "on" && decode_visual != "off")
      throw avsr::UsageError("--visual must be on or off");
    avsr::run_decode(config, paths, decode_split, decode_system, decode_audio,
                     decode_visual == "on", decode_out);
  });

  // tune-bias
  CommonOpts tune_opts;
  std::string tune_grid;
  auto *tune = app.add_subcommand(
      "tune-bias", "pick the decision-fusion sigmoid offset on the cv set");
  add_common(tune, &tune_opts);
  tune->add_option("--grid", tune_grid, "comma-separated candidate offsets");
  tune->callback([&] {
    avsr::RunConfig config = build_config(tune_opts);
    if (!tune_grid.empty()) config.apply_overrides({"bias_grid=" + tune_grid});
    const avsr::PipelinePaths paths = build_paths(config);
    std::vector<double> grid_cer;
    const double best = avsr::run_tune_bias(config, paths, &grid_cer);
    const auto grid = config.bias_grid_values();
    for (size_t i = 0; i < grid.size(); ++i)
      std::cout << "b=" << grid[i] << "\tcv_cer=" << grid_cer[i] << "\n";
    std::cout << "selected b=" << best << "\n";
  });

  // evaluate
  CommonOpts eval_opts;
  std::string eval_out;
  std::string eval_split = "test";
  auto *eval = app.add_subcommand("evaluate",
                                  "CER over the full condition grid");
  add_common(eval, &eval_opts);
  eval->add_option("--split", eval_split, "train | cv | test");
  eval->add_option("--out", eval_out, "machine-readable results file")
      ->required();
  eval->callback([&] {
    const avsr::RunConfig config = build_config(eval_opts);
    const avsr::PipelinePaths paths = build_paths(config);
    const auto rows = avsr::evaluate_conditions(config, paths, eval_split);
    avsr::write_eval_rows(eval_out, rows);
    std::cout << avsr::format_eval_table(rows);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const avsr::UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const avsr::DependencyError &e) {
    std::cerr << "dependency error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
