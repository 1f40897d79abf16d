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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcnas/graph/graph.hpp"
#include "hcnas/ndt/tensor.hpp"
#include "hcnas/rng.hpp"

namespace hcnas::data {

/// Images [N,C,H,W] with one label per image.
struct Split {
  ndt::Tensor images;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  graph::ImageShape image_shape() const;
  /// Rows `indices` gathered into a new split.
  Split gather(std::span<const std::size_t> indices) const;
  /// First `n` samples.
  Split head(std::size_t n) const;
};

struct Dataset {
  std::string name;
  Split train;
  Split test;
  std::size_t num_classes = 0;
  std::vector<float> mean;    // per channel, from the raw train split
  std::vector<float> stddev;  // per channel
  std::string digest;         // hex SHA-256 of the source bytes

  graph::ImageShape image_shape() const { return train.image_shape(); }
};

/// Per-channel mean and (population) standard deviation.
void channel_stats(const Split& s, std::vector<float>& mean, std::vector<float>& stddev);
/// x → (x − mean[c]) / stddev[c], in place.
void normalize(Split& s, std::span<const float> mean, std::span<const float> stddev);
/// Computes train statistics and normalizes both splits with them.
Dataset make_dataset(std::string name, Split train, Split test, std::size_t num_classes, std::string digest);

/// IDX image + label files. Pixels scaled to [0,1], not normalized.
/// Throws FormatError (with byte offset) on bad magic, inconsistent counts
/// or truncation.
Split parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes);
Split load_mnist_idx(const std::string& images_path, const std::string& labels_path);
/// `dir` holding train-images-idx3-ubyte, train-labels-idx1-ubyte,
/// t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte. A nonzero
/// `train_limit` keeps only the first samples of the training split.
Dataset load_mnist_dir(const std::string& dir, std::size_t train_limit = 0);

/// CIFAR-10 binary records (1 label byte + 3072 channel-major pixels).
Split parse_cifar10_bin(std::string_view bytes);
/// Inverse of parse_cifar10_bin for [0,1] pixel data.
std::string encode_cifar10_bin(const Split& s);
/// `dir` holding data_batch_{1..5}.bin (those present) and test_batch.bin.
Dataset load_cifar10_dir(const std::string& dir, std::size_t train_limit = 0);

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t train_size = 4400;
  std::size_t test_size = 1000;
  std::size_t image_dim = 16;
  std::size_t channels = 1;
  double amplitude = 2.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian-blob class patterns plus white noise. Each class has its own
/// blob position; sizes are split exactly evenly across classes (the
/// remainder goes to the lowest classes) and samples are interleaved.
Dataset synthetic_dataset(const SyntheticSpec& spec);

/// Hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::string& path);

}  // namespace hcnas::data
