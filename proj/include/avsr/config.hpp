// include/avsr/config.hpp

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

#ifndef AVSR_CONFIG_HPP
#define AVSR_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

// Experiment configuration.  Stored as a line-oriented "key = value" text
// file with '#' comments; command-line flags override file values.  Every
// key has a default; unknown keys are rejected.
struct RunConfig {
  // corpus
  int corpus_n = 500;
  uint64_t corpus_seed = 7;
  int audio_dim = 8;
  int video_dim = 6;
  int viseme_classes = 10;
  int duration_min = 2;
  int duration_max = 5;
  double audio_jitter = 0.35;
  double video_jitter = 0.80;

  // model shapes
  int hidden_size = 32;
  int am_layers = 2;
  int lip_layers = 2;
  int fusion_layers = 3;
  int bn_hidden = 64;
  int bn_width = 8;
  int splice_left = 5;
  int splice_right = 5;

  // training
  uint64_t train_seed = 1234;
  double lr_am = 0.05;
  double lr_bn = 0.2;
  double lr_lip = 0.2;
  double lr_fusion = 0.05;
  double halving_threshold = 0.5;
  double stop_threshold = 0.1;
  int min_epochs = 8;
  int min_epochs_fusion = 8;
  int max_epochs = 25;
  int batch_size = 256;
  double clip_norm = 5.0;
  double fill_value = 0.0;

  // fusion and evaluation
  double fusion_bias = 0.0;
  std::string bias_grid = "-10,-5,-2,0,2,5,10,20,40";
  uint64_t noise_seed = 99;
  std::string snr_conditions = "10,0";
  std::string gamma_override;  // empty = KL-adaptive

  // paths (usually given as flags)
  std::string data_dir;
  std::string model_dir;

  std::optional<double> gamma_override_value() const {
    if (gamma_override.empty()) return std::nullopt;
    return std::stod(gamma_override);
  }

  std::vector<double> bias_grid_values() const {
    return parse_double_list(bias_grid, "bias_grid");
  }

  std::vector<double> snr_values() const {
    return parse_double_list(snr_conditions, "snr_conditions");
  }

  void set(const std::string &key, const std::string &value);
  static RunConfig from_file(const std::filesystem::path &path);
  void apply_overrides(const std::vector<std::string> &assignments);

 private:
  static std::vector<double> parse_double_list(const std::string &text,
                                               const std::string &key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception &) {
        throw DataError("config: bad number '" + item + "' in " + key);
      }
    }
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
  std::istringstream ss(value);
  T out;
  ss >> out;
  if (ss.fail() || !ss.eof())
    throw DataError("config: bad value '" + value + "' for key " + key);
  return out;
}

}  // namespace detail

inline void RunConfig::set(const std::string &key, const std::string &value) {
  using detail::parse_number;
  if (key == "corpus_n") corpus_n = parse_number<int>(key, value);
  else if (key == "corpus_seed") corpus_seed = parse_number<uint64_t>(key, value);
  else if (key == "audio_dim") audio_dim = parse_number<int>(key, value);
  else if (key == "video_dim") video_dim = parse_number<int>(key, value);
  else if (key == "viseme_classes") viseme_classes = parse_number<int>(key, value);
  else if (key == "duration_min") duration_min = parse_number<int>(key, value);
  else if (key == "duration_max") duration_max = parse_number<int>(key, value);
  else if (key == "audio_jitter") audio_jitter = parse_number<double>(key, value);
  else if (key == "video_jitter") video_jitter = parse_number<double>(key, value);
  else if (key == "hidden_size") hidden_size = parse_number<int>(key, value);
  else if (key == "am_layers") am_layers = parse_number<int>(key, value);
  else if (key == "lip_layers") lip_layers = parse_number<int>(key, value);
  else if (key == "fusion_layers") fusion_layers = parse_number<int>(key, value);
  else if (key == "bn_hidden") bn_hidden = parse_number<int>(key, value);
  else if (key == "bn_width") bn_width = parse_number<int>(key, value);
  else if (key == "splice_left") splice_left = parse_number<int>(key, value);
  else if (key == "splice_right") splice_right = parse_number<int>(key, value);
  else if (key == "train_seed") train_seed = parse_number<uint64_t>(key, value);
  else if (key == "lr_am") lr_am = parse_number<double>(key, value);
  else if (key == "lr_bn") lr_bn = parse_number<double>(key, value);
  else if (key == "lr_lip") lr_lip = parse_number<double>(key, value);
  else if (key == "lr_fusion") lr_fusion = parse_number<double>(key, value);
  else if (key == "halving_threshold") halving_threshold = parse_number<double>(key, value);
  else if (key == "stop_threshold") stop_threshold = parse_number<double>(key, value);
  else if (key == "min_epochs") min_epochs = parse_number<int>(key, value);
  else if (key == "min_epochs_fusion") min_epochs_fusion = parse_number<int>(key, value);
  else if (key == "max_epochs") max_epochs = parse_number<int>(key, value);
  else if (key == "batch_size") batch_size = parse_number<int>(key, value);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "fill_value") fill_value = parse_number<double>(key, value);
  else if (key == "fusion_bias") fusion_bias = parse_number<double>(key, value);
  else if (key == "bias_grid") bias_grid = value;
  else if (key == "noise_seed") noise_seed = parse_number<uint64_t>(key, value);
  else if (key == "snr_conditions") snr_conditions = value;
  else if (key == "gamma_override") gamma_override = value;
  else if (key == "data_dir") data_dir = value;
  else if (key == "model_dir") model_dir = value;
  else throw DataError("config: unknown key '" + key + "'");
}

inline RunConfig RunConfig::from_file(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw DataError("config: cannot read " + path.string());
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config: line " + std::to_string(line_no) + " of " +
                      path.string() + " is not key = value");
    config.set(detail::trim(line.substr(0, eq)),
               detail::trim(line.substr(eq + 1)));
  }
  return config;
}

// "key=value" assignments from the command line, applied last.
inline void RunConfig::apply_overrides(
    const std::vector<std::string> &assignments) {
  for (const auto &a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos)
      throw UsageError("expected key=value, got '" + a + "'");
    set(detail::trim(a.substr(0, eq)), detail::trim(a.substr(eq + 1)));
  }
}

}  // namespace avsr

#endif  // AVSR_CONFIG_HPP
