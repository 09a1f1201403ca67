// include/avsr/corpus.hpp

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

#ifndef AVSR_CORPUS_HPP
#define AVSR_CORPUS_HPP

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "avsr/alphabet.hpp"
#include "avsr/io.hpp"
#include "avsr/matrix.hpp"
#include "avsr/rng.hpp"

namespace avsr {

// Six-slot command grammar with a 51-word vocabulary, e.g.
// "PLACE RED AT M ZERO PLEASE".
struct Grammar {
  std::vector<std::vector<std::string>> slots;

  static Grammar standard() {
    Grammar g;
    g.slots = {
        {"BIN", "LAY", "PLACE", "SET"},
        {"BLUE", "GREEN", "RED", "WHITE"},
        {"AT", "BY", "IN", "WITH"},
        {},  // letters, filled below
        {"ZERO", "ONE", "TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN",
         "EIGHT", "NINE"},
        {"AGAIN", "NOW", "PLEASE", "SOON"},
    };
    for (char c = 'A'; c <= 'Z'; ++c)
      if (c != 'W') g.slots[3].push_back(std::string(1, c));
    return g;
  }

  int vocabulary_size() const {
    int n = 0;
    for (const auto &slot : slots) n += static_cast<int>(slot.size());
    return n;
  }
};

inline std::string sample_sentence(const Grammar &grammar, Rng &rng) {
  std::string sentence;
  for (size_t i = 0; i < grammar.slots.size(); ++i) {
    const auto &slot = grammar.slots[i];
    if (i) sentence += ' ';
    sentence += slot[rng.uniform_int(static_cast<int>(slot.size()))];
  }
  return sentence;
}

// Synthetic rendering profile.  Every character has an audio prototype of
// its own; video prototypes are shared within viseme classes, so the video
// stream carries strictly coarser information than the audio stream.
struct RenderProfile {
  Matrix audio_prototypes;        // kNumChars x audio_dim, row c-1 for char c
  Matrix viseme_prototypes;       // viseme_classes x video_dim
  std::vector<int> viseme_of;     // kNumChars entries, char index-1 -> class
  int duration_min = 2;           // frames per character
  int duration_max = 5;
  double audio_jitter = 0.0;
  double video_jitter = 0.0;

  int audio_dim() const { return audio_prototypes.cols(); }
  int video_dim() const { return viseme_prototypes.cols(); }
  int viseme_classes() const { return viseme_prototypes.rows(); }

  // char_index is an alphabet index in [1, kNumChars].
  int viseme_class(int char_index) const { return viseme_of[char_index - 1]; }

  // Space gets a class of its own (silence reads as a closed mouth);
  // letters share the remaining classes round-robin.
  static RenderProfile make(int audio_dim, int video_dim, int viseme_classes,
                            int duration_min, int duration_max,
                            double audio_jitter, double video_jitter,
                            Rng rng) {
    if (viseme_classes < 2 || viseme_classes > alphabet::kNumChars)
      throw DataError("RenderProfile: viseme class count out of range");
    RenderProfile p;
    p.duration_min = duration_min;
    p.duration_max = duration_max;
    p.audio_jitter = audio_jitter;
    p.video_jitter = video_jitter;
    p.audio_prototypes = Matrix(alphabet::kNumChars, audio_dim);
    for (int r = 0; r < p.audio_prototypes.rows(); ++r)
      for (int c = 0; c < audio_dim; ++c)
        p.audio_prototypes(r, c) = rng.uniform(-1.0, 1.0);
    p.viseme_prototypes = Matrix(viseme_classes, video_dim);
    for (int r = 0; r < viseme_classes; ++r)
      for (int c = 0; c < video_dim; ++c)
        p.viseme_prototypes(r, c) = rng.uniform(-1.0, 1.0);
    p.viseme_of.resize(alphabet::kNumChars);
    p.viseme_of[alphabet::kSpace - 1] = 0;
    for (int letter = 0; letter < 26; ++letter)
      p.viseme_of[letter] = 1 + letter % (viseme_classes - 1);
    return p;
  }
};

// Renders a transcript into paired audio/video streams of equal length.
// Per character: one duration draw, then per frame the audio jitter vector
// followed by the video jitter vector.
inline std::pair<Matrix, Matrix> render_utterance(const std::string &transcript,
                                                  const RenderProfile &profile,
                                                  Rng &rng) {
  if (transcript.empty()) throw DataError("render_utterance: empty transcript");
  const LabelSequence chars = alphabet::encode(transcript);
  std::vector<int> durations(chars.size());
  int total = 0;
  for (size_t i = 0; i < chars.size(); ++i) {
    durations[i] = rng.uniform_int(profile.duration_min, profile.duration_max);
    total += durations[i];
  }
  Matrix audio(total, profile.audio_dim());
  Matrix video(total, profile.video_dim());
  int t = 0;
  for (size_t i = 0; i < chars.size(); ++i) {
    const auto a_proto = profile.audio_prototypes.row(chars[i] - 1);
    const auto v_proto = profile.viseme_prototypes.row(profile.viseme_class(chars[i]));
    for (int f = 0; f < durations[i]; ++f, ++t) {
      for (int d = 0; d < profile.audio_dim(); ++d)
        audio(t, d) = a_proto[d] + profile.audio_jitter * rng.gaussian();
      for (int d = 0; d < profile.video_dim(); ++d)
        video(t, d) = v_proto[d] + profile.video_jitter * rng.gaussian();
    }
  }
  return {std::move(audio), std::move(video)};
}

// Babble-like interference: each frame is the mean of a few random audio
// character prototypes plus jitter.  Used to corrupt audio features at a
// target SNR during evaluation.
inline Matrix render_babble_noise(const RenderProfile &profile, int frames,
                                  Rng &rng) {
  constexpr int kVoices = 3;
  Matrix noise(frames, profile.audio_dim());
  for (int t = 0; t < frames; ++t) {
    for (int v = 0; v < kVoices; ++v) {
      const int c = rng.uniform_int(alphabet::kNumChars);
      const auto proto = profile.audio_prototypes.row(c);
      for (int d = 0; d < profile.audio_dim(); ++d)
        noise(t, d) += proto[d] / kVoices;
    }
    for (int d = 0; d < profile.audio_dim(); ++d)
      noise(t, d) += profile.audio_jitter * rng.gaussian();
  }
  return noise;
}

struct CorpusManifests {
  std::vector<UtteranceRecord> train, cv, test;
};

// Writes FEAT files plus train/cv/test manifests (81/9/10 split) under
// out_dir.  Deterministic for a given seed; manifests carry relative paths
// so regenerated trees are byte-identical wherever they live.
inline CorpusManifests generate_corpus(int n, const Grammar &grammar,
                                       const RenderProfile &profile,
                                       uint64_t seed,
                                       const std::filesystem::path &out_dir) {
  if (n < 10) throw DataError("generate_corpus: need at least 10 utterances");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "feat", ec);
  if (ec)
    throw DataError("generate_corpus: cannot create " +
                    (out_dir / "feat").string());

  const int n_traincv = n * 9 / 10;
  const int n_cv = n_traincv / 10;
  const int n_train = n_traincv - n_cv;

  Rng rng(seed);
  CorpusManifests out;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "utt%05d", i);
    const std::string sentence = sample_sentence(grammar, rng);
    auto [audio, video] = render_utterance(sentence, profile, rng);
    UtteranceRecord rec;
    rec.id = id;
    rec.audio_path = std::string("feat/") + id + ".audio.feat";
    rec.video_path = std::string("feat/") + id + ".video.feat";
    rec.transcript = sentence;
    write_feat(out_dir / rec.audio_path, audio);
    write_feat(out_dir / rec.video_path, video);
    if (i < n_train)
      out.train.push_back(std::move(rec));
    else if (i < n_traincv)
      out.cv.push_back(std::move(rec));
    else
      out.test.push_back(std::move(rec));
  }
  write_manifest(out_dir / "train.manifest", out.train);
  write_manifest(out_dir / "cv.manifest", out.cv);
  write_manifest(out_dir / "test.manifest", out.test);
  return out;
}

}  // namespace avsr

#endif  // AVSR_CORPUS_HPP
