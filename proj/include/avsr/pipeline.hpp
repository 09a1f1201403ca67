// include/avsr/pipeline.hpp

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

#ifndef AVSR_PIPELINE_HPP
#define AVSR_PIPELINE_HPP

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "avsr/config.hpp"
#include "avsr/corpus.hpp"
#include "avsr/ctc.hpp"
#include "avsr/decode.hpp"
#include "avsr/dnn.hpp"
#include "avsr/features.hpp"
#include "avsr/fusion.hpp"
#include "avsr/io.hpp"
#include "avsr/network.hpp"
#include "avsr/trainer.hpp"

namespace avsr {

// File-level glue between the corpus, the four training stages and the
// condition grid evaluation.  Everything here is deterministic in the
// seeds carried by RunConfig.

namespace fs = std::filesystem;

struct PipelinePaths {
  fs::path data_dir;
  fs::path model_dir;

  fs::path manifest(const std::string &split) const {
    return data_dir / (split + ".manifest");
  }
  fs::path model(const std::string &stage) const {
    return model_dir / (stage + ".modl");
  }
  fs::path log(const std::string &stage) const {
    return model_dir / (stage + ".log");
  }
  fs::path priors() const { return model_dir / "priors.prio"; }
  fs::path bias() const { return model_dir / "fusion_bias.txt"; }
  fs::path flab_dir() const { return model_dir / "flab"; }
};

inline void require_stage(const PipelinePaths &paths,
                          const std::string &stage) {
  if (!fs::exists(paths.model(stage)))
    throw DependencyError("missing prerequisite stage '" + stage +
                          "': expected " + paths.model(stage).string());
}

// ---- feature assembly ----------------------------------------------------

// Audio model input: mean-normalized statics with deltas appended.
inline Matrix audio_features(const Matrix &static_audio) {
  return append_deltas(mean_normalize(static_audio));
}

// Bottleneck network input: mean-normalized, spliced video statics.
inline Matrix dnn_input_features(const Matrix &static_video,
                                 const RunConfig &config) {
  return splice(mean_normalize(static_video), config.splice_left,
                config.splice_right);
}

// Lip model input: bottleneck activations, normalized, with deltas.
inline Matrix bottleneck_features(const DnnParams &dnn,
                                  const Matrix &static_video,
                                  const RunConfig &config) {
  return append_deltas(
      mean_normalize(extract_bottleneck(dnn, dnn_input_features(static_video, config))));
}

inline RenderProfile profile_from_config(const RunConfig &config) {
  return RenderProfile::make(config.audio_dim, config.video_dim,
                             config.viseme_classes, config.duration_min,
                             config.duration_max, config.audio_jitter,
                             config.video_jitter,
                             Rng(config.corpus_seed).fork("profile"));
}

inline void run_gen_corpus(const RunConfig &config,
                           const fs::path &out_dir) {
  const Grammar grammar = Grammar::standard();
  const RenderProfile profile = profile_from_config(config);
  generate_corpus(config.corpus_n, grammar, profile,
                  Rng(config.corpus_seed).fork("render").seed(), out_dir);
}

namespace detail {

inline std::vector<SequenceExample> load_examples(
    const std::vector<UtteranceRecord> &records, bool use_audio,
    const RunConfig &config, const DnnParams *dnn) {
  std::vector<SequenceExample> examples;
  examples.reserve(records.size());
  for (const auto &rec : records) {
    SequenceExample ex;
    ex.id = rec.id;
    ex.label = alphabet::encode(rec.transcript);
    if (use_audio) {
      ex.features = audio_features(read_feat(rec.audio_path));
    } else {
      ex.features =
          bottleneck_features(*dnn, read_feat(rec.video_path), config);
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

inline std::vector<SequenceExample> load_fused_examples(
    const std::vector<UtteranceRecord> &records, const RunConfig &config,
    const DnnParams &dnn) {
  std::vector<SequenceExample> examples;
  examples.reserve(records.size());
  for (const auto &rec : records) {
    SequenceExample ex;
    ex.id = rec.id;
    ex.label = alphabet::encode(rec.transcript);
    ex.features =
        concat_features(audio_features(read_feat(rec.audio_path)),
                        bottleneck_features(dnn, read_feat(rec.video_path), config));
    examples.push_back(std::move(ex));
  }
  return examples;
}

inline TrainConfig stage_train_config(const RunConfig &config,
                                      const std::string &stage, double lr,
                                      int min_epochs) {
  TrainConfig tc;
  tc.learning_rate = lr;
  tc.halving_threshold = config.halving_threshold;
  tc.stop_threshold = config.stop_threshold;
  tc.min_epochs = min_epochs;
  tc.max_epochs = config.max_epochs;
  tc.batch_size = config.batch_size;
  tc.seed = Rng(config.train_seed).fork(stage).seed();
  tc.clip_norm = config.clip_norm;
  tc.fill_value = config.fill_value;
  tc.stage = stage;
  return tc;
}

}  // namespace detail

// ---- training stages -------------------------------------------------------

inline std::vector<EpochReport> run_stage_am(const RunConfig &config,
                                             const PipelinePaths &paths) {
  const auto train = read_manifest(paths.manifest("train"));
  const auto cv = read_manifest(paths.manifest("cv"));
  const auto train_ex = detail::load_examples(train, true, config, nullptr);
  const auto cv_ex = detail::load_examples(cv, true, config, nullptr);

  NetworkParams net =
      make_network(3 * config.audio_dim, config.hidden_size, config.am_layers,
                   alphabet::kNumClasses);
  Rng init_rng = Rng(config.train_seed).fork("am.init");
  init_uniform(net, init_rng);
  const auto tc = detail::stage_train_config(config, "am", config.lr_am,
                                             config.min_epochs);
  auto reports = train_ctc_stage(net, train_ex, cv_ex, tc);
  fs::create_directories(paths.model_dir);
  save_network(paths.model("am"), net);
  write_training_log(paths.log("am"), reports);
  return reports;
}

// Frame labels from the acoustic model plus class priors, then the
// bottleneck network trained on spliced video frames.
inline std::vector<EpochReport> run_stage_bn(const RunConfig &config,
                                             const PipelinePaths &paths) {
  require_stage(paths, "am");
  const NetworkParams am = load_network(paths.model("am"));
  const auto train = read_manifest(paths.manifest("train"));
  const auto cv = read_manifest(paths.manifest("cv"));
  fs::create_directories(paths.flab_dir());

  auto labelled_frames = [&](const std::vector<UtteranceRecord> &records,
                             Matrix *frames, std::vector<int> *labels,
                             bool write_flab) {
    // first pass for the total frame count
    long long total = 0;
    std::vector<Matrix> inputs;
    std::vector<std::vector<int>> per_utt;
    inputs.reserve(records.size());
    for (const auto &rec : records) {
      const Matrix audio = audio_features(read_feat(rec.audio_path));
      std::vector<int> utt_labels = generate_frame_labels(am, audio);
      Matrix video_in = dnn_input_features(read_feat(rec.video_path), config);
      if (video_in.rows() != static_cast<int>(utt_labels.size()))
        throw DataError("bn stage: audio/video length mismatch for " + rec.id);
      if (write_flab)
        write_frame_labels(paths.flab_dir() / (rec.id + ".flab"), utt_labels);
      total += video_in.rows();
      inputs.push_back(std::move(video_in));
      per_utt.push_back(std::move(utt_labels));
    }
    *frames = Matrix(static_cast<int>(total), inputs.front().cols());
    labels->clear();
    labels->reserve(total);
    int row = 0;
    for (size_t u = 0; u < inputs.size(); ++u) {
      for (int t = 0; t < inputs[u].rows(); ++t, ++row)
        for (int d = 0; d < inputs[u].cols(); ++d)
          (*frames)(row, d) = inputs[u](t, d);
      labels->insert(labels->end(), per_utt[u].begin(), per_utt[u].end());
    }
    return per_utt;
  };

  Matrix train_frames, cv_frames;
  std::vector<int> train_labels, cv_labels;
  const auto train_label_sets =
      labelled_frames(train, &train_frames, &train_labels, true);
  labelled_frames(cv, &cv_frames, &cv_labels, false);

  const ClassPriors priors =
      estimate_priors(train_label_sets, alphabet::kNumClasses);
  write_priors(paths.priors(), priors.probs);

  DnnParams dnn = make_dnn({train_frames.cols(), config.bn_hidden,
                            config.bn_hidden, config.bn_width,
                            config.bn_hidden, alphabet::kNumClasses});
  Rng init_rng = Rng(config.train_seed).fork("bn.init");
  init_glorot_sigmoid(dnn, init_rng);
  const auto tc = detail::stage_train_config(config, "bn", config.lr_bn,
                                             config.min_epochs);
  auto reports = train_cross_entropy(dnn, train_frames, train_labels,
                                     cv_frames, cv_labels, tc);
  save_dnn(paths.model("bn"), dnn);
  write_training_log(paths.log("bn"), reports);
  return reports;
}

inline std::vector<EpochReport> run_stage_lip(const RunConfig &config,
                                              const PipelinePaths &paths) {
  require_stage(paths, "bn");
  const DnnParams dnn = load_dnn(paths.model("bn"));
  const auto train = read_manifest(paths.manifest("train"));
  const auto cv = read_manifest(paths.manifest("cv"));
  const auto train_ex = detail::load_examples(train, false, config, &dnn);
  const auto cv_ex = detail::load_examples(cv, false, config, &dnn);

  NetworkParams net =
      make_network(3 * config.bn_width, config.hidden_size, config.lip_layers,
                   alphabet::kNumClasses);
  Rng init_rng = Rng(config.train_seed).fork("lip.init");
  init_uniform(net, init_rng);
  const auto tc = detail::stage_train_config(config, "lip", config.lr_lip,
                                             config.min_epochs);
  auto reports = train_ctc_stage(net, train_ex, cv_ex, tc);
  save_network(paths.model("lip"), net);
  write_training_log(paths.log("lip"), reports);
  return reports;
}

inline std::vector<EpochReport> run_stage_fusion(const RunConfig &config,
                                                 const PipelinePaths &paths) {
  require_stage(paths, "bn");
  const DnnParams dnn = load_dnn(paths.model("bn"));
  const auto train = read_manifest(paths.manifest("train"));
  const auto cv = read_manifest(paths.manifest("cv"));
  const auto train_ex = detail::load_fused_examples(train, config, dnn);
  const auto cv_ex = detail::load_fused_examples(cv, config, dnn);

  NetworkParams net = make_network(3 * (config.audio_dim + config.bn_width),
                                   config.hidden_size, config.fusion_layers,
                                   alphabet::kNumClasses);
  Rng init_rng = Rng(config.train_seed).fork("fusion.init");
  init_uniform(net, init_rng);
  const auto tc = detail::stage_train_config(config, "fusion",
                                             config.lr_fusion,
                                             config.min_epochs_fusion);
  auto reports = train_fusion_stage(net, train_ex, cv_ex,
                                    3 * config.audio_dim, tc);
  save_network(paths.model("fusion"), net);
  write_training_log(paths.log("fusion"), reports);
  return reports;
}

// ---- evaluation -------------------------------------------------------------

// Audio conditions of the Table-1 grid.  kOff masks the audio block of the
// fused features (or drops the audio stream entirely for decision fusion).
struct AudioCondition {
  std::string name;   // clean | off | snr<k>
  bool off = false;
  bool noisy = false;
  double snr_db = 0.0;
};

inline std::vector<AudioCondition> standard_conditions(
    const RunConfig &config) {
  std::vector<AudioCondition> conds;
  conds.push_back({"clean", false, false, 0.0});
  for (double snr : config.snr_values()) {
    char name[32];
    std::snprintf(name, sizeof(name), "snr%g", snr);
    conds.push_back({name, false, true, snr});
  }
  return conds;
}

struct EvalRow {
  std::string model;       // feature_fusion | decision_fusion
  std::string audio_cond;  // clean | off | snr10 | snr0
  std::string visual;      // on | off
  double cer = 0.0;
};

// Per-utterance evaluation bundle: static audio per condition plus the
// video-side features, loaded once.
struct EvalUtterance {
  std::string id;
  LabelSequence reference;
  std::vector<Matrix> audio_by_condition;  // audio model features
  Matrix bn_video;                         // lip/fused video features
};

inline std::vector<EvalUtterance> load_eval_utterances(
    const std::vector<UtteranceRecord> &records,
    const std::vector<AudioCondition> &conditions, const RunConfig &config,
    const DnnParams &dnn) {
  const RenderProfile profile = profile_from_config(config);
  const Rng noise_base(config.noise_seed);
  std::vector<EvalUtterance> utts;
  utts.reserve(records.size());
  for (const auto &rec : records) {
    EvalUtterance u;
    u.id = rec.id;
    u.reference = alphabet::encode(rec.transcript);
    const Matrix clean_static = read_feat(rec.audio_path);
    // one noise draw per utterance, rescaled per condition
    Rng noise_rng = noise_base.fork(Rng::fnv1a(rec.id));
    const Matrix noise =
        render_babble_noise(profile, clean_static.rows(), noise_rng);
    for (const auto &cond : conditions) {
      const Matrix static_audio =
          cond.noisy ? mix_noise_at_snr(clean_static, noise, cond.snr_db)
                     : clean_static;
      u.audio_by_condition.push_back(audio_features(static_audio));
    }
    u.bn_video = bottleneck_features(dnn, read_feat(rec.video_path), config);
    utts.push_back(std::move(u));
  }
  return utts;
}

// Runs the full Table-1 grid: for each fusion strategy, every audio
// condition with visual on and off, plus the video-only row.
inline std::vector<EvalRow> evaluate_conditions(const RunConfig &config,
                                                const PipelinePaths &paths,
                                                const std::string &split =
                                                    "test") {
  for (const auto &stage : {"am", "bn", "lip", "fusion"})
    require_stage(paths, stage);
  const NetworkParams am = load_network(paths.model("am"));
  const NetworkParams lip = load_network(paths.model("lip"));
  const NetworkParams fused = load_network(paths.model("fusion"));
  const DnnParams dnn = load_dnn(paths.model("bn"));
  ClassPriors priors;
  priors.probs = read_priors(paths.priors());

  FusionConfig fusion_config;
  fusion_config.bias = config.fusion_bias;
  if (fs::exists(paths.bias())) {
    std::ifstream bias_in(paths.bias());
    bias_in >> fusion_config.bias;
    if (bias_in.fail())
      throw DataError("evaluate: cannot parse " + paths.bias().string());
  }
  fusion_config.gamma_override = config.gamma_override_value();

  const auto conditions = standard_conditions(config);
  const auto records = read_manifest(paths.manifest(split));
  const auto utts = load_eval_utterances(records, conditions, config, dnn);
  const int audio_block = 3 * config.audio_dim;
  const int video_block = 3 * config.bn_width;

  std::vector<LabelSequence> refs;
  refs.reserve(utts.size());
  for (const auto &u : utts) refs.push_back(u.reference);

  auto score_cer = [&refs](const std::vector<Matrix> &scores) {
    std::vector<LabelSequence> hyps;
    hyps.reserve(scores.size());
    for (const auto &s : scores)
      hyps.push_back(best_path_decode(s).hypothesis);
    return cer(hyps, refs);
  };

  std::vector<EvalRow> rows;

  // Feature fusion model: audio and video blocks of the concatenated
  // features are masked to turn a modality off.
  auto fused_post = [&](const EvalUtterance &u, int cond_index,
                        bool audio_on, bool visual_on) {
    Matrix feats = concat_features(u.audio_by_condition[cond_index], u.bn_video);
    if (!audio_on) feats = mask_columns(feats, 0, audio_block, config.fill_value);
    if (!visual_on)
      feats = mask_columns(feats, audio_block, audio_block + video_block,
                           config.fill_value);
    return softmax_rows(network_forward(fused, feats));
  };

  auto add_feature_fusion_row = [&](const std::string &cond_name,
                                    int cond_index, bool audio_on,
                                    bool visual_on) {
    std::vector<Matrix> scores;
    scores.reserve(utts.size());
    for (const auto &u : utts)
      scores.push_back(pseudo_log_likelihood(
          fused_post(u, cond_index, audio_on, visual_on), priors));
    rows.push_back({"feature_fusion", cond_name, visual_on ? "on" : "off",
                    score_cer(scores)});
  };

  add_feature_fusion_row("clean", 0, true, false);
  add_feature_fusion_row("clean", 0, true, true);
  add_feature_fusion_row("off", 0, false, true);
  for (size_t c = 1; c < conditions.size(); ++c) {
    add_feature_fusion_row(conditions[c].name, static_cast<int>(c), true, false);
    add_feature_fusion_row(conditions[c].name, static_cast<int>(c), true, true);
  }

  // Decision fusion: per-stream posteriors combined at the frame level.
  std::vector<Matrix> video_post;
  video_post.reserve(utts.size());
  for (const auto &u : utts)
    video_post.push_back(softmax_rows(network_forward(lip, u.bn_video)));

  {
    std::vector<Matrix> scores;
    scores.reserve(utts.size());
    for (size_t i = 0; i < utts.size(); ++i)
      scores.push_back(pseudo_log_likelihood(video_post[i], priors));
    // audio off: the lip reader alone
    std::vector<EvalRow> video_row{{"decision_fusion", "off", "on",
                                    score_cer(scores)}};
    // inserted after the clean rows to follow the grid order
    for (int cond_index = 0;
         cond_index < static_cast<int>(conditions.size()); ++cond_index) {
      const auto &cond = conditions[cond_index];
      std::vector<Matrix> audio_scores, fused_scores;
      audio_scores.reserve(utts.size());
      fused_scores.reserve(utts.size());
      for (size_t i = 0; i < utts.size(); ++i) {
        const Matrix post_a = softmax_rows(
            network_forward(am, utts[i].audio_by_condition[cond_index]));
        audio_scores.push_back(pseudo_log_likelihood(post_a, priors));
        fused_scores.push_back(decision_fuse_adaptive(
            post_a, video_post[i], fusion_config, priors));
      }
      rows.push_back({"decision_fusion", cond.name, "off",
                      score_cer(audio_scores)});
      rows.push_back({"decision_fusion", cond.name, "on",
                      score_cer(fused_scores)});
      if (cond_index == 0) rows.push_back(video_row.front());
    }
  }
  return rows;
}

// Machine-readable results: model\taudio_cond\tvisual\tcer.
inline void write_eval_rows(const fs::path &path,
                            const std::vector<EvalRow> &rows) {
  std::ofstream os(path);
  if (!os) throw DataError("evaluate: cannot write " + path.string());
  char line[128];
  for (const auto &r : rows) {
    std::snprintf(line, sizeof(line), "%s\t%s\t%s\t%.4f\n", r.model.c_str(),
                  r.audio_cond.c_str(), r.visual.c_str(), r.cer);
    os << line;
  }
}

inline std::string format_eval_table(const std::vector<EvalRow> &rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-16s %-10s %-7s %8s\n", "model",
                "audio", "visual", "cer%");
  out += line;
  for (const auto &r : rows) {
    std::snprintf(line, sizeof(line), "%-16s %-10s %-7s %8.2f\n",
                  r.model.c_str(), r.audio_cond.c_str(), r.visual.c_str(),
                  r.cer);
    out += line;
  }
  return out;
}

// Bias tuning over the cross-validation set: audio posteriors are produced
// under every listed condition so the chosen offset balances clean and
// noisy behavior.
inline double run_tune_bias(const RunConfig &config,
                            const PipelinePaths &paths,
                            std::vector<double> *grid_cer = nullptr,
                            const std::string &split = "cv") {
  for (const auto &stage : {"am", "bn", "lip"}) require_stage(paths, stage);
  const NetworkParams am = load_network(paths.model("am"));
  const NetworkParams lip = load_network(paths.model("lip"));
  const DnnParams dnn = load_dnn(paths.model("bn"));
  ClassPriors priors;
  priors.probs = read_priors(paths.priors());

  const auto conditions = standard_conditions(config);
  const auto records = read_manifest(paths.manifest(split));
  const auto utts = load_eval_utterances(records, conditions, config, dnn);

  std::vector<BiasTuneExample> examples;
  examples.reserve(utts.size() * conditions.size());
  for (const auto &u : utts) {
    const Matrix post_v = softmax_rows(network_forward(lip, u.bn_video));
    for (size_t c = 0; c < conditions.size(); ++c) {
      BiasTuneExample ex;
      ex.post_a =
          softmax_rows(network_forward(am, u.audio_by_condition[c]));
      ex.post_v = post_v;
      ex.reference = u.reference;
      examples.push_back(std::move(ex));
    }
  }
  const double best =
      tune_bias(examples, priors, config.bias_grid_values(), grid_cer);
  fs::create_directories(paths.model_dir);
  std::ofstream os(paths.bias());
  if (!os) throw DataError("tune-bias: cannot write " + paths.bias().string());
  os << best << "\n";
  return best;
}

inline AudioCondition parse_audio_condition(const std::string &text) {
  AudioCondition cond;
  if (text == "clean") {
    cond.name = "clean";
  } else if (text == "off") {
    cond.name = "off";
    cond.off = true;
  } else {
    double snr;
    try {
      snr = std::stod(text);
    } catch (const std::exception &) {
      throw UsageError("audio condition must be clean, off, or an SNR in dB");
    }
    char name[32];
    std::snprintf(name, sizeof(name), "snr%g", snr);
    cond.name = name;
    cond.noisy = true;
    cond.snr_db = snr;
  }
  return cond;
}

// Decodes one split with one system under one condition and writes
// <id>\t<hypothesis>\t<score> lines.
inline void run_decode(const RunConfig &config, const PipelinePaths &paths,
                       const std::string &split, const std::string &system,
                       const std::string &audio_cond_text, bool visual_on,
                       const fs::path &out_path) {
  const AudioCondition cond = parse_audio_condition(audio_cond_text);
  require_stage(paths, "bn");
  const DnnParams dnn = load_dnn(paths.model("bn"));
  ClassPriors priors;
  priors.probs = read_priors(paths.priors());
  const auto records = read_manifest(paths.manifest(split));
  const auto utts = load_eval_utterances(records, {cond}, config, dnn);

  FusionConfig fusion_config;
  fusion_config.bias = config.fusion_bias;
  if (fs::exists(paths.bias())) {
    std::ifstream bias_in(paths.bias());
    bias_in >> fusion_config.bias;
  }
  fusion_config.gamma_override = config.gamma_override_value();

  std::ofstream os(out_path);
  if (!os) throw DataError("decode: cannot write " + out_path.string());

  auto emit = [&os](const std::string &id, const Matrix &scores) {
    const DecodeResult result = best_path_decode(scores);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", result.score);
    os << id << '\t' << alphabet::decode(result.hypothesis) << '\t' << buf
       << '\n';
  };

  if (system == "am") {
    if (cond.off) throw UsageError("am decode with audio off");
    require_stage(paths, "am");
    const NetworkParams am = load_network(paths.model("am"));
    for (const auto &u : utts)
      emit(u.id, pseudo_log_likelihood(
                     softmax_rows(network_forward(am, u.audio_by_condition[0])),
                     priors));
  } else if (system == "lip") {
    require_stage(paths, "lip");
    const NetworkParams lip = load_network(paths.model("lip"));
    for (const auto &u : utts)
      emit(u.id, pseudo_log_likelihood(
                     softmax_rows(network_forward(lip, u.bn_video)), priors));
  } else if (system == "fusion") {
    require_stage(paths, "fusion");
    const NetworkParams fused = load_network(paths.model("fusion"));
    const int audio_block = 3 * config.audio_dim;
    const int video_block = 3 * config.bn_width;
    for (const auto &u : utts) {
      Matrix feats = concat_features(u.audio_by_condition[0], u.bn_video);
      if (cond.off)
        feats = mask_columns(feats, 0, audio_block, config.fill_value);
      if (!visual_on)
        feats = mask_columns(feats, audio_block, audio_block + video_block,
                             config.fill_value);
      emit(u.id, pseudo_log_likelihood(
                     softmax_rows(network_forward(fused, feats)), priors));
    }
  } else if (system == "decision") {
    require_stage(paths, "am");
    require_stage(paths, "lip");
    const NetworkParams am = load_network(paths.model("am"));
    const NetworkParams lip = load_network(paths.model("lip"));
    for (const auto &u : utts) {
      if (cond.off && !visual_on)
        throw UsageError("decision decode with both modalities off");
      if (cond.off) {
        emit(u.id, pseudo_log_likelihood(
                       softmax_rows(network_forward(lip, u.bn_video)), priors));
      } else if (!visual_on) {
        emit(u.id,
             pseudo_log_likelihood(
                 softmax_rows(network_forward(am, u.audio_by_condition[0])),
                 priors));
      } else {
        const Matrix post_a =
            softmax_rows(network_forward(am, u.audio_by_condition[0]));
        const Matrix post_v = softmax_rows(network_forward(lip, u.bn_video));
        emit(u.id,
             decision_fuse_adaptive(post_a, post_v, fusion_config, priors));
      }
    }
  } else {
    throw UsageError("unknown system '" + system +
                     "' (expected am, lip, fusion, or decision)");
  }
}

// Writes bottleneck feature files plus a manifest pointing at them.
inline void run_extract_bn(const RunConfig &config, const PipelinePaths &paths,
                           const std::string &split, const fs::path &out_dir) {
  require_stage(paths, "bn");
  const DnnParams dnn = load_dnn(paths.model("bn"));
  const auto records = read_manifest(paths.manifest(split));
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw DataError("extract-bn: cannot create " + out_dir.string());
  std::vector<UtteranceRecord> out_records;
  for (const auto &rec : records) {
    const Matrix bn =
        extract_bottleneck(dnn, dnn_input_features(read_feat(rec.video_path), config));
    UtteranceRecord out = rec;
    out.video_path = rec.id + ".bn.feat";
    write_feat(out_dir / out.video_path, bn);
    out_records.push_back(std::move(out));
  }
  write_manifest(out_dir / (split + ".bn.manifest"), out_records);
}

}  // namespace avsr

#endif  // AVSR_PIPELINE_HPP
