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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "hcnas/errors.hpp"
#include "hcnas/graph/graph.hpp"

namespace hcnas::graph {

/// Output of one node: an image for everything up to the flatten, a feature
/// count for the two linear layers.
struct NodeShape {
  bool flat = false;
  ImageShape image;
  std::size_t features = 0;

  std::size_t size() const { return flat ? features : image.size(); }
  friend bool operator==(const NodeShape&, const NodeShape&) = default;
};

std::string to_string(const NodeShape& s);

using ShapeMap = std::map<NodeId, NodeShape>;

enum class ShapeErrorKind {
  AddMismatch,
  ConcatMismatch,
  DegenerateSpatial,
  FcWidthExceeded,
  ChannelMismatch,
  LinearMismatch,
};

std::string_view shape_error_name(ShapeErrorKind k);

struct ShapeError {
  ShapeErrorKind kind;
  NodeId node;
  std::string message;
};

/// Thrown by infer_shapes; carries the structured error.
class ShapeInferenceError : public Error {
 public:
  explicit ShapeInferenceError(ShapeError e) : Error(e.message), error_(std::move(e)) {}
  const ShapeError& error() const noexcept { return error_; }

 private:
  ShapeError error_;
};

struct ShapeOptions {
  /// Reject a flatten size above fc_width.
  bool strict_fc_cap = false;
  /// Accept a variable-linear in_dim that differs from the flatten size.
  /// Used while validating a morph site, before the linear morphism runs.
  bool allow_flatten_resize = false;
};

/// ConvBlock output for a given input, or nullopt if a side drops below 1.
std::optional<ImageShape> try_conv_output_shape(const ConvBlockSpec& spec, const ImageShape& in);
std::optional<ImageShape> try_pool_output_shape(const MaxPoolSpec& spec, const ImageShape& in);
/// Throwing forms: DegenerateShapeError.
ImageShape conv_output_shape(const ConvBlockSpec& spec, const ImageShape& in);
ImageShape pool_output_shape(const MaxPoolSpec& spec, const ImageShape& in);

using ShapeResult = std::variant<ShapeMap, ShapeError>;

ShapeResult try_infer_shapes(const Topology& topo, const ImageShape& input, std::size_t fc_width,
                             const ShapeOptions& options = {});
ShapeMap infer_shapes(const Graph& g, const ShapeOptions& options = {});

/// Flatten size feeding the variable linear layer.
std::size_t flatten_size(const Graph& g, const ShapeMap& shapes);

}  // namespace hcnas::graph
