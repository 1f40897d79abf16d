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

#include "hcnas/data/dataset.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hcnas/errors.hpp"

namespace hcnas::data {

graph::ImageShape Split::image_shape() const {
  if (images.rank() != 4) return {};
  return {images.dim(1), images.dim(2), images.dim(3)};
}

Split Split::gather(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw InputError("cannot gather an empty split");
  const auto s = image_shape();
  const std::size_t per = s.size();
  Split out;
  out.images = ndt::Tensor({indices.size(), s.channels, s.height, s.width});
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= size()) throw InputError("sample index out of range");
    std::copy_n(images.ptr() + src * per, per, out.images.ptr() + i * per);
    out.labels.push_back(labels[src]);
  }
  return out;
}

Split Split::head(std::size_t n) const {
  std::vector<std::size_t> idx(std::min(n, size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return gather(idx);
}

void channel_stats(const Split& s, std::vector<float>& mean, std::vector<float>& stddev) {
  const auto shape = s.image_shape();
  const std::size_t plane = shape.height * shape.width;
  mean.assign(shape.channels, 0.0f);
  stddev.assign(shape.channels, 1.0f);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      const float* p = s.images.ptr() + (n * shape.channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum += p[i];
        sq += static_cast<double>(p[i]) * p[i];
      }
    }
    const double count = static_cast<double>(s.size() * plane);
    const double m = sum / count;
    const double var = std::max(sq / count - m * m, 0.0);
    mean[c] = static_cast<float>(m);
    stddev[c] = var > 1e-12 ? static_cast<float>(std::sqrt(var)) : 1.0f;
  }
}

void normalize(Split& s, std::span<const float> mean, std::span<const float> stddev) {
  const auto shape = s.image_shape();
  if (mean.size() != shape.channels || stddev.size() != shape.channels) {
    throw DimensionError("normalization statistics do not match channel count");
  }
  const std::size_t plane = shape.height * shape.width;
  for (std::size_t n = 0; n < s.size(); ++n) {
    for (std::size_t c = 0; c < shape.channels; ++c) {
      float* p = s.images.ptr() + (n * shape.channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - mean[c]) / stddev[c];
    }
  }
}

Dataset make_dataset(std::string name, Split train, Split test, std::size_t num_classes, std::string digest) {
  if (train.image_shape() != test.image_shape()) throw InputError("train and test image shapes differ");
  for (const Split* s : {&train, &test}) {
    for (int l : s->labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_classes) throw InputError("label outside class range");
    }
  }
  Dataset d;
  d.name = std::move(name);
  d.num_classes = num_classes;
  d.digest = std::move(digest);
  channel_stats(train, d.mean, d.stddev);
  normalize(train, d.mean, d.stddev);
  normalize(test, d.mean, d.stddev);
  d.train = std::move(train);
  d.test = std::move(test);
  return d;
}

// ------------------------------------------------------------------- IDX

namespace {

std::uint32_t be32(std::string_view b, std::size_t off) {
  if (b.size() < off + 4) throw FormatError("truncated IDX header", b.size());
  const auto* p = reinterpret_cast<const unsigned char*>(b.data()) + off;
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

}  // namespace

Split parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes) {
  if (be32(image_bytes, 0) != 0x00000803u) throw FormatError("image file magic is not 0x00000803", 0);
  if (be32(label_bytes, 0) != 0x00000801u) throw FormatError("label file magic is not 0x00000801", 0);
  const std::size_t n = be32(image_bytes, 4);
  const std::size_t rows = be32(image_bytes, 8);
  const std::size_t cols = be32(image_bytes, 12);
  const std::size_t nl = be32(label_bytes, 4);
  if (n != nl) throw FormatError("image count " + std::to_string(n) + " != label count " + std::to_string(nl), 4);
  if (n == 0 || rows == 0 || cols == 0) throw FormatError("empty IDX file", 4);
  const std::size_t per = rows * cols;
  if (image_bytes.size() < 16 + n * per) throw FormatError("truncated image data", image_bytes.size());
  if (label_bytes.size() < 8 + n) throw FormatError("truncated label data", label_bytes.size());
  if (image_bytes.size() > 16 + n * per) throw FormatError("trailing bytes in image file", 16 + n * per);
  if (label_bytes.size() > 8 + n) throw FormatError("trailing bytes in label file", 8 + n);

  Split s;
  s.images = ndt::Tensor({n, 1, rows, cols});
  const auto* px = reinterpret_cast<const unsigned char*>(image_bytes.data()) + 16;
  for (std::size_t i = 0; i < n * per; ++i) s.images[i] = static_cast<float>(px[i]) / 255.0f;
  const auto* lb = reinterpret_cast<const unsigned char*>(label_bytes.data()) + 8;
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lb[i] > 9) throw FormatError("label byte " + std::to_string(lb[i]) + " outside 0..9", 8 + i);
    s.labels[i] = lb[i];
  }
  return s;
}

Split load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  return parse_mnist_idx(read_file(images_path), read_file(labels_path));
}

Dataset load_mnist_dir(const std::string& dir, std::size_t train_limit) {
  const std::filesystem::path d(dir);
  const std::string names[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                               "t10k-labels-idx1-ubyte"};
  std::string bytes[4];
  std::string all;
  for (int i = 0; i < 4; ++i) {
    bytes[i] = read_file((d / names[i]).string());
    all += sha256_hex(bytes[i]);
  }
  Split train = parse_mnist_idx(bytes[0], bytes[1]);
  if (train_limit != 0 && train_limit < train.size()) train = train.head(train_limit);
  Split test = parse_mnist_idx(bytes[2], bytes[3]);
  return make_dataset("mnist", std::move(train), std::move(test), 10, sha256_hex(all));
}

// ----------------------------------------------------------------- CIFAR

namespace {
constexpr std::size_t kCifarRecord = 3073;
constexpr std::size_t kCifarPixels = 3072;
}  // namespace

Split parse_cifar10_bin(std::string_view bytes) {
  if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
    throw FormatError("CIFAR-10 file length " + std::to_string(bytes.size()) + " is not a multiple of 3073",
                      bytes.size() - bytes.size() % kCifarRecord);
  }
  const std::size_t n = bytes.size() / kCifarRecord;
  Split s;
  s.images = ndt::Tensor({n, 3, 32, 32});
  s.labels.resize(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = p + i * kCifarRecord;
    if (rec[0] > 9) throw FormatError("label byte " + std::to_string(rec[0]) + " outside 0..9", i * kCifarRecord);
    s.labels[i] = rec[0];
    float* dst = s.images.ptr() + i * kCifarPixels;
    for (std::size_t j = 0; j < kCifarPixels; ++j) dst[j] = static_cast<float>(rec[1 + j]) / 255.0f;
  }
  return s;
}

std::string encode_cifar10_bin(const Split& s) {
  std::string out;
  out.reserve(s.size() * kCifarRecord);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(static_cast<char>(s.labels[i]));
    const float* src = s.images.ptr() + i * kCifarPixels;
    for (std::size_t j = 0; j < kCifarPixels; ++j) {
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(src[j] * 255.0f))));
    }
  }
  return out;
}

Dataset load_cifar10_dir(const std::string& dir, std::size_t train_limit) {
  const std::filesystem::path d(dir);
  std::string train_bytes, all_digests;
  for (int b = 1; b <= 5; ++b) {
    const auto path = d / ("data_batch_" + std::to_string(b) + ".bin");
    if (!std::filesystem::exists(path)) continue;
    std::string bytes = read_file(path.string());
    parse_cifar10_bin(bytes);  // validate each batch on its own for precise offsets
    all_digests += sha256_hex(bytes);
    train_bytes += bytes;
  }
  if (train_bytes.empty()) throw InputError("no data_batch_*.bin files in " + dir);
  const std::string test_bytes = read_file((d / "test_batch.bin").string());
  all_digests += sha256_hex(test_bytes);
  Split train = parse_cifar10_bin(train_bytes);
  if (train_limit != 0 && train_limit < train.size()) train = train.head(train_limit);
  return make_dataset("cifar10", std::move(train), parse_cifar10_bin(test_bytes), 10,
                      sha256_hex(all_digests));
}

// ------------------------------------------------------------- synthetic

namespace {

Split synthetic_split(const SyntheticSpec& spec, std::size_t size, Rng& rng,
                      const std::vector<std::vector<float>>& patterns) {
  const std::size_t dim = spec.image_dim;
  const std::size_t per = spec.channels * dim * dim;
  Split s;
  s.images = ndt::Tensor({size, spec.channels, dim, dim});
  s.labels.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t c = i % spec.classes;
    s.labels[i] = static_cast<int>(c);
    float* dst = s.images.ptr() + i * per;
    for (std::size_t j = 0; j < per; ++j) {
      dst[j] = patterns[c][j] + static_cast<float>(spec.noise * standard_normal(rng));
    }
  }
  return s;
}

}  // namespace

Dataset synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.image_dim < 8) throw InputError("synthetic image_dim must be at least 8");
  if (spec.classes < 2 || spec.channels == 0 || spec.train_size < spec.classes || spec.test_size == 0) {
    throw InputError("synthetic dataset needs >= 2 classes and one train sample per class");
  }
  const std::size_t dim = spec.image_dim;
  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.classes))));
  const double spacing = static_cast<double>(dim) / static_cast<double>(grid);
  const double sigma = spacing / 2.0;
  std::vector<std::vector<float>> patterns(spec.classes, std::vector<float>(spec.channels * dim * dim));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double cy = spacing * (static_cast<double>(c / grid) + 0.5);
    const double cx = spacing * (static_cast<double>(c % grid) + 0.5);
    for (std::size_t ch = 0; ch < spec.channels; ++ch) {
      for (std::size_t h = 0; h < dim; ++h) {
        for (std::size_t w = 0; w < dim; ++w) {
          const double dy = static_cast<double>(h) - cy, dx = static_cast<double>(w) - cx;
          patterns[c][(ch * dim + h) * dim + w] =
              static_cast<float>(spec.amplitude * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma)));
        }
      }
    }
  }
  Rng rng(derive_seed(spec.seed, {0x5e7d}));
  Split train = synthetic_split(spec, spec.train_size, rng, patterns);
  Split test = synthetic_split(spec, spec.test_size, rng, patterns);
  std::ostringstream id;
  id << "synthetic classes=" << spec.classes << " train=" << spec.train_size << " test=" << spec.test_size
     << " dim=" << dim << " channels=" << spec.channels << " amplitude=" << spec.amplitude
     << " noise=" << spec.noise << " seed=" << spec.seed;
  return make_dataset("synthetic", std::move(train), std::move(test), spec.classes, sha256_hex(id.str()));
}

// ----------------------------------------------------------------- misc

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace hcnas::data
