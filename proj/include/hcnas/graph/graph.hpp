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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hcnas/graph/node_id.hpp"
#include "hcnas/ndt/tape.hpp"
#include "hcnas/ndt/tensor.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/sched/aging_state.hpp"

namespace hcnas::graph {

struct ImageShape {
  std::size_t channels = 0, height = 0, width = 0;
  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

std::string to_string(const ImageShape& s);

/// Convolution + batch norm + ReLU. Stride is always 1.
struct ConvBlockSpec {
  std::size_t kernel = 3;
  bool padded = true;
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  friend bool operator==(const ConvBlockSpec&, const ConvBlockSpec&) = default;
};

struct MaxPoolSpec {
  std::size_t kernel = 2;
  std::size_t stride = 2;
  friend bool operator==(const MaxPoolSpec&, const MaxPoolSpec&) = default;
};

struct CombineSpec {
  ndt::CombineMode mode = ndt::CombineMode::Add;
  friend bool operator==(const CombineSpec&, const CombineSpec&) = default;
};

/// The variable layer flattens its image input and is followed by a ReLU;
/// the output layer maps fc_width features to class logits.
struct LinearSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  bool is_variable = false;
  friend bool operator==(const LinearSpec&, const LinearSpec&) = default;
};

using NodeSpec = std::variant<ConvBlockSpec, MaxPoolSpec, CombineSpec, LinearSpec>;
using LayerParams = std::variant<ndt::ConvParams, ndt::LinearParams>;

/// "conv", "maxpool", "add", "concat" or "linear".
std::string kind_label(const NodeSpec& spec);
/// Hyperparameters in short form ("k=3 same 16->32"); empty for combines.
std::string describe_spec(const NodeSpec& spec);
bool is_image_node(const NodeSpec& spec);
bool has_params(const NodeSpec& spec);

template <typename S>
const S* spec_as(const NodeSpec& spec) {
  return std::get_if<S>(&spec);
}

/// Structure only: node hyperparameters plus ordered adjacency. Cheap to
/// copy, so morph site validation edits a copy and re-infers shapes.
class Topology {
 public:
  /// Adds an unconnected node under the next ordinal.
  NodeId add_node(NodeSpec spec);
  /// Raw edge insertion. Appends to the end of both adjacency lists.
  /// Throws TopologicalOrderError if the edge would close a cycle.
  void add_edge(NodeId from, NodeId to);
  /// Replaces `from` in `to`'s parent list (and `to` in `from`'s child list)
  /// keeping list positions, so Concat input order survives insertions.
  void splice(NodeId from, NodeId to, NodeId middle);

  bool contains(NodeId id) const { return nodes_.contains(id); }
  bool has_edge(NodeId from, NodeId to) const;
  const NodeSpec& spec(NodeId id) const;
  NodeSpec& mutable_spec(NodeId id);
  std::span<const NodeId> parents(NodeId id) const;
  std::span<const NodeId> children(NodeId id) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const;
  std::vector<NodeId> node_ids() const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::uint32_t next_ordinal() const { return next_ordinal_; }

  /// Kahn order with ties broken by ascending ordinal. Cached until the next
  /// mutation. Throws IntegrityError on a cycle.
  const std::vector<NodeId>& topo_order() const;
  /// Index of `id` in topo_order().
  std::size_t position(NodeId id) const;

  std::string display_name(NodeId id) const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.next_ordinal_ == b.next_ordinal_;
  }

 private:
  friend class Graph;
  friend Topology make_topology(const std::map<NodeId, NodeSpec>&,
                                const std::map<NodeId, std::vector<NodeId>>&,
                                const std::map<NodeId, std::vector<NodeId>>&, std::uint32_t);
  struct Entry {
    NodeSpec spec;
    std::vector<NodeId> parents;
    std::vector<NodeId> children;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  const Entry& entry(NodeId id) const;
  Entry& entry(NodeId id);
  bool reaches(NodeId from, NodeId to) const;
  void invalidate() {
    topo_cache_.reset();
    position_cache_.clear();
  }

  std::map<NodeId, Entry> nodes_;
  std::uint32_t next_ordinal_ = 0;
  mutable std::optional<std::vector<NodeId>> topo_cache_;
  mutable std::map<NodeId, std::size_t> position_cache_;
};

/// A candidate architecture: topology, learnable parameters and aging state.
/// Copying deep-copies every parameter.
class Graph {
 public:
  /// Builds ConvBlock → variable Linear(F→fc_width) → ReLU →
  /// Linear(fc_width→num_classes) with the given parameters.
  static Graph chain(ImageShape input, ConvBlockSpec first, ndt::ConvParams first_params,
                     std::size_t num_classes, std::size_t fc_width,
                     ndt::LinearParams variable_params, ndt::LinearParams output_params);

  const Topology& topology() const { return topo_; }
  const ImageShape& input_shape() const { return input_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t fc_width() const { return fc_width_; }

  NodeId source() const { return source_; }
  NodeId variable_linear() const { return variable_; }
  NodeId output_linear() const { return output_; }

  const NodeSpec& spec(NodeId id) const { return topo_.spec(id); }
  std::span<const NodeId> parents(NodeId id) const { return topo_.parents(id); }
  std::span<const NodeId> children(NodeId id) const { return topo_.children(id); }
  const std::vector<NodeId>& topo_order() const { return topo_.topo_order(); }
  std::string display_name(NodeId id) const { return topo_.display_name(id); }

  /// Replaces edge (x,y) by (x,new),(new,y). Params are required for
  /// ConvBlock/Linear specs and rejected for the others.
  NodeId insert_between(NodeId x, NodeId y, NodeSpec spec, std::optional<LayerParams> params = {});
  /// Adds edge (x,y). y must be a Combine node and x must precede y in the
  /// current topological order.
  void connect(NodeId x, NodeId y);

  /// Hyperparameter edit used by morphisms that resize a layer. The caller
  /// supplies parameters matching the new spec.
  void update_node(NodeId id, NodeSpec spec, std::optional<LayerParams> params);

  ndt::ConvParams& conv_params(NodeId id);
  const ndt::ConvParams& conv_params(NodeId id) const;
  ndt::LinearParams& linear_params(NodeId id);
  const ndt::LinearParams& linear_params(NodeId id) const;
  const std::map<NodeId, LayerParams>& all_params() const { return params_; }

  sched::AgingState& aging() { return aging_; }
  const sched::AgingState& aging() const { return aging_; }

  std::size_t parameter_count() const;
  /// Trainable values of one node (0 for pools and combines).
  std::size_t parameter_count(NodeId id) const;

  /// Structure invariants beyond acyclicity: single source, single sink,
  /// fan-in rules, exactly one variable Linear, params match specs.
  /// Throws IntegrityError.
  void validate_structure() const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  friend Graph decode_graph_parts(Topology, ImageShape, std::size_t, std::size_t,
                                  std::map<NodeId, LayerParams>, sched::AgingState);
  Graph() = default;
  void locate_roles();

  Topology topo_;
  std::map<NodeId, LayerParams> params_;
  ImageShape input_;
  std::size_t num_classes_ = 0;
  std::size_t fc_width_ = 0;
  NodeId source_, variable_, output_;
  sched::AgingState aging_;
};

/// Assembles a graph from decoded parts and validates it (deserialization).
Graph decode_graph_parts(Topology topo, ImageShape input, std::size_t num_classes,
                         std::size_t fc_width, std::map<NodeId, LayerParams> params,
                         sched::AgingState aging);

/// Topology factory used by the decoder: nodes and ordered adjacency exactly
/// as given, ordinal counter set to `next_ordinal`.
Topology make_topology(const std::map<NodeId, NodeSpec>& specs,
                       const std::map<NodeId, std::vector<NodeId>>& parents,
                       const std::map<NodeId, std::vector<NodeId>>& children,
                       std::uint32_t next_ordinal);

/// Draws the seed ConvBlock hyperparameters (kernel, padding, channels in
/// that order).
ConvBlockSpec sample_seed_spec(ImageShape input, Rng& rng);

/// Random starting architecture: one ConvBlock with kernel {3,5}, padding
/// {true,false} and {8,16,32} channels (each uniform), then the two Linear
/// layers. Falls back to padded when an unpadded kernel does not fit.
Graph seed_graph(ImageShape input, std::size_t num_classes, std::size_t fc_width, Rng& rng);

}  // namespace hcnas::graph
