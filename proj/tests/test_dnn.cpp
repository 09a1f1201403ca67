// tests/test_dnn.cpp

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

#include <cmath>
#include <filesystem>

#include "avsr/corpus.hpp"
#include "avsr/dnn.hpp"
#include "avsr/features.hpp"
#include "avsr/rng.hpp"

using namespace avsr;

namespace {

Matrix random_matrix(int rows, int cols, Rng &rng, double range = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-range, range);
  return m;
}

std::vector<double *> flat_params(DnnParams &dnn) {
  std::vector<double *> out;
  for_each_dnn_block(dnn, [&](const std::string &, Matrix &m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) out.push_back(&m(r, c));
  });
  return out;
}

std::vector<double> flat_values(const DnnParams &dnn) {
  std::vector<double> out;
  for_each_dnn_block(dnn, [&](const std::string &, const Matrix &m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  });
  return out;
}

}  // namespace

TEST_CASE("the narrowest hidden layer is the bottleneck") {
  const DnnParams dnn = make_dnn({10, 16, 16, 4, 16, 7});
  CHECK(dnn.bottleneck_layer == 2);
  CHECK(dnn.bottleneck_dim() == 4);
  CHECK(dnn.input_dim() == 10);
  CHECK(dnn.output_dim() == 7);
  CHECK_THROWS_AS(make_dnn({10, 4, 4, 7}), DataError);  // ambiguous
}

TEST_CASE("zero weights give uniform posteriors") {
  const DnnParams dnn = make_dnn({5, 6, 3, 6, 4});
  Rng rng(1);
  const Matrix batch = random_matrix(3, 5, rng);
  const Matrix post = dnn_forward(dnn, batch);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 4; ++k)
      CHECK(post(r, k) == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("posterior rows sum to one") {
  DnnParams dnn = make_dnn({5, 6, 3, 6, 4});
  Rng rng(2);
  init_uniform(dnn, rng, 0.5);
  const Matrix post = dnn_forward(dnn, random_matrix(8, 5, rng));
  for (int r = 0; r < 8; ++r) {
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += post(r, k);
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("cross-entropy gradient matches finite differences at every layer") {
  DnnParams dnn = make_dnn({4, 5, 2, 5, 3});
  Rng rng(3);
  init_uniform(dnn, rng, 0.5);
  const Matrix batch = random_matrix(6, 4, rng);
  const std::vector<int> labels{0, 2, 1, 1, 0, 2};

  auto loss = [&](const DnnParams &d) {
    const Matrix post = dnn_forward(d, batch);
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s -= std::log(post(i, labels[i]));
    return s / 6.0;
  };

  DnnCache cache;
  const Matrix post = dnn_forward(dnn, batch, &cache);
  Matrix d_logits = post;
  for (int i = 0; i < 6; ++i) d_logits(i, labels[i]) -= 1.0;
  d_logits *= 1.0 / 6.0;
  const DnnParams grad = dnn_backward(dnn, cache, d_logits);
  const auto grad_flat = flat_values(grad);

  DnnParams probe = dnn;
  auto coords = flat_params(probe);
  REQUIRE(coords.size() == grad_flat.size());
  const double eps = 1e-5;
  for (size_t i = 0; i < coords.size(); ++i) {
    const double saved = *coords[i];
    *coords[i] = saved + eps;
    const double plus = loss(probe);
    *coords[i] = saved - eps;
    const double minus = loss(probe);
    *coords[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double denom =
        std::max({std::abs(numeric), std::abs(grad_flat[i]), 1e-8});
    CHECK(std::abs(numeric - grad_flat[i]) / denom < 1e-5);
  }
}

TEST_CASE("training separates a linearly separable toy set") {
  // two Gaussian blobs, one per class
  Rng rng(4);
  const int n = 400;
  Matrix frames(n, 2);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    labels[i] = cls;
    const double cx = cls == 0 ? -1.0 : 1.0;
    frames(i, 0) = cx + 0.3 * rng.gaussian();
    frames(i, 1) = -cx + 0.3 * rng.gaussian();
  }

  DnnParams dnn = make_dnn({2, 8, 3, 8, 2});
  Rng init(5);
  init_uniform(dnn, init, 1.0);
  TrainConfig config;
  config.learning_rate = 1.0;
  config.batch_size = 4;
  config.seed = 6;
  config.max_epochs = 5;
  config.min_epochs = 5;
  const auto reports =
      train_cross_entropy(dnn, frames, labels, frames, labels, config);
  REQUIRE(reports.size() == 5);
  for (size_t e = 1; e < reports.size(); ++e)
    CHECK(reports[e].train_loss < reports[e - 1].train_loss);
  CHECK(reports.back().cv_accuracy > 95.0);
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(7);
  Matrix frames = random_matrix(64, 3, rng);
  std::vector<int> labels(64);
  for (int i = 0; i < 64; ++i) labels[i] = i % 4;

  auto run = [&]() {
    DnnParams dnn = make_dnn({3, 6, 2, 6, 4});
    Rng init(8);
    init_uniform(dnn, init);
    TrainConfig config;
    config.learning_rate = 0.1;
    config.batch_size = 16;
    config.seed = 9;
    config.max_epochs = 4;
    config.min_epochs = 4;
    train_cross_entropy(dnn, frames, labels, frames, labels, config);
    return flat_values(dnn);
  };
  CHECK(run() == run());
}

TEST_CASE("default batch size follows the training recipe") {
  CHECK(TrainConfig{}.batch_size == 256);
}

TEST_CASE("bottleneck extraction is frame-wise and deterministic") {
  DnnParams dnn = make_dnn({4, 6, 2, 6, 3});
  Rng rng(10);
  init_uniform(dnn, rng, 0.5);
  Matrix frames = random_matrix(5, 4, rng);
  const Matrix bn = extract_bottleneck(dnn, frames);
  REQUIRE(bn.rows() == 5);
  REQUIRE(bn.cols() == 2);

  // identical frames map to identical outputs
  Matrix twice(2, 4);
  for (int d = 0; d < 4; ++d) twice(0, d) = twice(1, d) = frames(0, d);
  const Matrix bn2 = extract_bottleneck(dnn, twice);
  for (int d = 0; d < 2; ++d) {
    CHECK(bn2(0, d) == bn2(1, d));
    CHECK(bn2(0, d) == bn(0, d));
  }

  // permuting frames permutes outputs identically
  Matrix reversed(5, 4);
  for (int t = 0; t < 5; ++t)
    for (int d = 0; d < 4; ++d) reversed(t, d) = frames(4 - t, d);
  const Matrix bn_rev = extract_bottleneck(dnn, reversed);
  for (int t = 0; t < 5; ++t)
    for (int d = 0; d < 2; ++d) CHECK(bn_rev(t, d) == bn(4 - t, d));

  // sigmoid activations stay in (0, 1)
  for (int t = 0; t < 5; ++t)
    for (int d = 0; d < 2; ++d) {
      CHECK(bn(t, d) > 0.0);
      CHECK(bn(t, d) < 1.0);
    }
}

TEST_CASE("frame labels take the argmax with ties to the lowest index") {
  // zero weights, biased output layer: logits equal b_out on every frame
  NetworkParams net = make_network(3, 4, 1, 5);
  Rng rng(11);
  const Matrix features = random_matrix(6, 3, rng);
  // all-zero network: uniform posteriors, tie broken to blank (index 0)
  auto labels = generate_frame_labels(net, features);
  for (int v : labels) CHECK(v == 0);
  // bias the third class
  net.b_out(0, 2) = 1.0;
  labels = generate_frame_labels(net, features);
  for (int v : labels) CHECK(v == 2);
  // labels depend only on the single utterance
  const Matrix other = random_matrix(4, 3, rng);
  generate_frame_labels(net, other);
  CHECK(generate_frame_labels(net, features) == labels);
}

TEST_CASE("trained bottleneck features cluster by viseme class") {
  // Unit-duration rendering aligns frame t with character t, so the true
  // frame labels are just the transcript.  After a short supervised run
  // the bottleneck should place same-viseme characters closer together
  // than cross-class ones.
  const Grammar grammar = Grammar::standard();
  const RenderProfile profile =
      RenderProfile::make(4, 3, 10, 1, 1, 0.05, 0.15, Rng(600));
  Rng rng(601);
  std::vector<Matrix> videos;
  std::vector<LabelSequence> labels;
  long long total = 0;
  for (int i = 0; i < 150; ++i) {
    const std::string sentence = sample_sentence(grammar, rng);
    auto [audio, video] = render_utterance(sentence, profile, rng);
    videos.push_back(splice(mean_normalize(video), 2, 2));
    labels.push_back(alphabet::encode(sentence));
    total += videos.back().rows();
  }
  Matrix frames(static_cast<int>(total), videos.front().cols());
  std::vector<int> frame_labels;
  int row = 0;
  for (size_t u = 0; u < videos.size(); ++u) {
    for (int t = 0; t < videos[u].rows(); ++t, ++row)
      for (int d = 0; d < videos[u].cols(); ++d)
        frames(row, d) = videos[u](t, d);
    frame_labels.insert(frame_labels.end(), labels[u].begin(),
                        labels[u].end());
  }

  DnnParams dnn = make_dnn({frames.cols(), 32, 32, 4, 32, 28});
  Rng init(602);
  init_glorot_sigmoid(dnn, init);
  TrainConfig config;
  config.learning_rate = 0.3;
  config.seed = 603;
  config.max_epochs = 10;
  config.min_epochs = 10;
  train_cross_entropy(dnn, frames, frame_labels, frames, frame_labels,
                      config);

  // mean bottleneck vector per character over the corpus frames
  std::vector<std::vector<double>> centroid(28);
  std::vector<int> count(28, 0);
  const Matrix bn = extract_bottleneck(dnn, frames);
  for (int t = 0; t < bn.rows(); ++t) {
    auto &c = centroid[frame_labels[t]];
    if (c.empty()) c.assign(bn.cols(), 0.0);
    for (int d = 0; d < bn.cols(); ++d) c[d] += bn(t, d);
    ++count[frame_labels[t]];
  }
  for (int k = 0; k < 28; ++k)
    if (count[k] > 0)
      for (auto &v : centroid[k]) v /= count[k];

  double same_sum = 0.0, cross_sum = 0.0;
  int same_n = 0, cross_n = 0;
  for (int a = 1; a <= alphabet::kNumChars; ++a) {
    for (int b = a + 1; b <= alphabet::kNumChars; ++b) {
      if (count[a] == 0 || count[b] == 0) continue;
      double d2 = 0.0;
      for (int d = 0; d < bn.cols(); ++d) {
        const double diff = centroid[a][d] - centroid[b][d];
        d2 += diff * diff;
      }
      const double dist = std::sqrt(d2);
      if (profile.viseme_class(a) == profile.viseme_class(b)) {
        same_sum += dist;
        ++same_n;
      } else {
        cross_sum += dist;
        ++cross_n;
      }
    }
  }
  REQUIRE(same_n > 0);
  REQUIRE(cross_n > 0);
  CHECK(same_sum / same_n < cross_sum / cross_n);
}

TEST_CASE("dnn checkpoints round-trip") {
  DnnParams dnn = make_dnn({4, 6, 2, 6, 3});
  Rng rng(12);
  init_uniform(dnn, rng);
  const auto dir = std::filesystem::temp_directory_path() / "avsr_dnn_test";
  std::filesystem::create_directories(dir);
  save_dnn(dir / "bn.modl", dnn);
  const DnnParams back = load_dnn(dir / "bn.modl");
  CHECK(back.bottleneck_layer == dnn.bottleneck_layer);
  CHECK(back.num_layers() == dnn.num_layers());
  const auto a = flat_values(dnn);
  const auto b = flat_values(back);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(static_cast<float>(a[i]) == static_cast<float>(b[i]));
}

TEST_CASE("dnn_forward rejects mismatched input") {
  const DnnParams dnn = make_dnn({4, 6, 2, 6, 3});
  CHECK_THROWS_AS(dnn_forward(dnn, Matrix(2, 7)), DataError);
}
