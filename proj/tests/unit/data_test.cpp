// Copyright 2026 The hcnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

#include "doctest.h"
#include "hcnas/data/dataset.hpp"
#include "hcnas/graph/graph.hpp"
#include "hcnas/search/search.hpp"
#include "support/helpers.hpp"

using namespace hcnas;
using namespace hcnas::data;

namespace {

std::string fixture_dir() {
  const char* root = std::getenv("HCNAS_TEST_DATA");
  return std::string(root ? root : "tests/data") + "/mnist";
}

std::uint32_t be32(std::string_view b, std::size_t at) {
  return (std::uint32_t(std::uint8_t(b[at])) << 24) | (std::uint32_t(std::uint8_t(b[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(b[at + 2])) << 8) | std::uint32_t(std::uint8_t(b[at + 3]));
}

std::string put_be32(std::uint32_t v) {
  return {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
}

// Small IDX pair with the given pixels (n × rows × cols bytes) and labels.
std::pair<std::string, std::string> idx_pair(std::size_t n, std::size_t rows, std::size_t cols, Rng& rng) {
  std::string img = put_be32(0x803) + put_be32(n) + put_be32(rows) + put_be32(cols);
  for (std::size_t i = 0; i < n * rows * cols; ++i) img += char(uniform_index(rng, 256));
  std::string lab = put_be32(0x801) + put_be32(n);
  for (std::size_t i = 0; i < n; ++i) lab += char(uniform_index(rng, 10));
  return {img, lab};
}

}  // namespace

TEST_CASE("MNIST fixture matches an independent IDX decoder") {
  const std::string dir = fixture_dir();
  const std::string img = read_file(dir + "/train-images-idx3-ubyte");
  const std::string lab = read_file(dir + "/train-labels-idx1-ubyte");
  REQUIRE(be32(img, 0) == 0x803);
  REQUIRE(be32(lab, 0) == 0x801);
  const std::size_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  CHECK(n == be32(lab, 4));
  CHECK(rows == 28);
  CHECK(cols == 28);

  const Split s = parse_mnist_idx(img, lab);
  REQUIRE(s.size() == n);
  CHECK(s.images.shape() == ndt::Shape{n, 1, 28, 28});
  bool pixels_ok = true, labels_ok = true;
  for (std::size_t i = 0; i < n * rows * cols; ++i) {
    pixels_ok = pixels_ok && s.images.data()[i] == float(std::uint8_t(img[16 + i])) / 255.0f;
  }
  for (std::size_t i = 0; i < n; ++i) labels_ok = labels_ok && s.labels[i] == std::uint8_t(lab[8 + i]);
  CHECK(pixels_ok);
  CHECK(labels_ok);

  const Dataset d = load_mnist_dir(dir, 500);
  CHECK(d.train.size() == 500);
  CHECK(d.num_classes == 10);
  CHECK(d.digest.size() == 64);
  CHECK(d.test.size() == be32(read_file(dir + "/t10k-labels-idx1-ubyte"), 4));
}

TEST_CASE("IDX parser rejects damaged files") {
  Rng rng(1);
  auto [img, lab] = idx_pair(5, 4, 3, rng);
  const Split ok = parse_mnist_idx(img, lab);
  CHECK(ok.images.shape() == ndt::Shape{5, 1, 4, 3});

  std::string wrong = img;
  wrong[3] = 0x02;  // 0x802
  CHECK_THROWS_AS(parse_mnist_idx(wrong, lab), FormatError);
  CHECK_THROWS_AS(parse_mnist_idx(img, img), FormatError);
  CHECK_THROWS_AS(parse_mnist_idx(img.substr(0, img.size() - 1), lab), FormatError);
  CHECK_THROWS_AS(parse_mnist_idx(img + "x", lab), FormatError);
  CHECK_THROWS_AS(parse_mnist_idx(img.substr(0, 10), lab), FormatError);
  CHECK_THROWS_AS(parse_mnist_idx(img, lab.substr(0, lab.size() - 1)), FormatError);
  auto [img6, lab6] = idx_pair(6, 4, 3, rng);
  CHECK_THROWS_AS(parse_mnist_idx(img, lab6), FormatError);
  std::string big_label = lab;
  big_label[8] = 10;
  CHECK_THROWS_AS(parse_mnist_idx(img, big_label), FormatError);
  CHECK_THROWS_AS(load_mnist_dir("/nonexistent/dir"), Error);
}

TEST_CASE("CIFAR-10 records round trip") {
  Rng rng(2);
  Split s;
  s.images = ndt::Tensor({7, 3, 32, 32});
  for (auto& v : s.images.data()) v = float(uniform_index(rng, 256)) / 255.0f;
  for (int i = 0; i < 7; ++i) s.labels.push_back(int(uniform_index(rng, 10)));
  const std::string bytes = encode_cifar10_bin(s);
  CHECK(bytes.size() == 7 * 3073);
  CHECK(std::uint8_t(bytes[0]) == s.labels[0]);
  CHECK(std::uint8_t(bytes[1]) == std::lround(s.images.data()[0] * 255.0f));
  CHECK(std::uint8_t(bytes[1 + 1024]) == std::lround(s.images.data()[1024] * 255.0f));  // channel-major
  const Split back = parse_cifar10_bin(bytes);
  CHECK(back.labels == s.labels);
  CHECK(back.images == s.images);

  std::string bad = bytes;
  bad[3073] = 10;
  CHECK_THROWS_AS(parse_cifar10_bin(bad), FormatError);
  CHECK_THROWS_AS(parse_cifar10_bin(bytes.substr(0, bytes.size() - 5)), FormatError);
  CHECK_THROWS_AS(parse_cifar10_bin(""), FormatError);
}

TEST_CASE("normalization statistics") {
  Rng rng(3);
  Split s;
  s.images = ndt::Tensor({20, 2, 3, 3});
  for (std::size_t i = 0; i < s.images.size(); ++i) {
    const std::size_t c = (i / 9) % 2;
    s.images.data()[i] = c == 0 ? float(uniform01(rng)) : 5.0f;  // channel 1 is constant
  }
  s.labels.assign(20, 0);
  std::vector<float> mean, sd;
  channel_stats(s, mean, sd);
  double m0 = 0, v0 = 0;
  for (std::size_t n = 0; n < 20; ++n)
    for (std::size_t k = 0; k < 9; ++k) m0 += s.images.data()[n * 18 + k];
  m0 /= 180;
  for (std::size_t n = 0; n < 20; ++n)
    for (std::size_t k = 0; k < 9; ++k) v0 += std::pow(s.images.data()[n * 18 + k] - m0, 2);
  v0 /= 180;
  CHECK(mean[0] == doctest::Approx(m0).epsilon(1e-6));
  CHECK(sd[0] == doctest::Approx(std::sqrt(v0)).epsilon(1e-5));
  CHECK(mean[1] == 5.0f);
  CHECK(sd[1] == 1.0f);

  const Dataset d = make_dataset("t", s, s.head(4), 1, "");
  std::vector<float> m2, s2;
  channel_stats(d.train, m2, s2);
  CHECK(std::fabs(m2[0]) < 1e-5);
  CHECK(std::fabs(s2[0] - 1.0f) < 1e-4);
  CHECK(d.mean == mean);
  CHECK(d.stddev == sd);
}

TEST_CASE("synthetic dataset properties") {
  SyntheticSpec spec;
  spec.train_size = 1000;
  spec.test_size = 500;
  spec.seed = 4;
  const Dataset a = synthetic_dataset(spec);
  const Dataset b = synthetic_dataset(spec);
  CHECK(a.train.images == b.train.images);
  CHECK(a.test.labels == b.test.labels);
  CHECK(a.digest == b.digest);
  spec.seed = 5;
  CHECK(!(synthetic_dataset(spec).train.images == a.train.images));

  std::map<int, int> counts;
  for (int l : a.train.labels) ++counts[l];
  CHECK(counts.size() == 10);
  for (auto [l, c] : counts) CHECK(c == 100);
  CHECK(a.image_shape() == graph::ImageShape{1, 16, 16});

  // Nearest class centroid (computed on train) classifies the test split.
  const std::size_t dim = 256;
  std::vector<std::vector<double>> centroid(10, std::vector<double>(dim));
  for (std::size_t i = 0; i < a.train.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) centroid[a.train.labels[i]][k] += a.train.images.data()[i * dim + k] / 100.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 10; ++c) {
      double dd = 0;
      for (std::size_t k = 0; k < dim; ++k) dd += std::pow(a.test.images.data()[i * dim + k] - centroid[c][k], 2);
      if (dd < best_d) best_d = dd, best = c;
    }
    hit += best == a.test.labels[i];
  }
  CHECK(hit / double(a.test.size()) >= 0.95);
}

TEST_CASE("noise-free two-class synthetic data is learnt exactly") {
  SyntheticSpec spec;
  spec.classes = 2;
  spec.train_size = 64;
  spec.test_size = 64;
  spec.image_dim = 8;
  spec.noise = 0.0;
  const Dataset d = synthetic_dataset(spec);
  Rng rng(6);
  search::Candidate c(graph::seed_graph(d.image_shape(), 2, 16, rng));
  search::SearchConfig cfg;
  cfg.batch_size = 16;
  train_candidate(c, d.train, d.test, 3, cfg, 1);
  CHECK(c.val_accuracy == 1.0);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
