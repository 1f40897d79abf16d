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

#include "hcnas/graph/graph.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

#include "hcnas/errors.hpp"
#include "hcnas/graph/init.hpp"
#include "hcnas/graph/shapes.hpp"

namespace hcnas::graph {

std::string to_string(const ImageShape& s) {
  return "(" + std::to_string(s.channels) + "," + std::to_string(s.height) + "," +
         std::to_string(s.width) + ")";
}

std::string kind_label(const NodeSpec& spec) {
  struct Visitor {
    std::string operator()(const ConvBlockSpec&) const { return "conv"; }
    std::string operator()(const MaxPoolSpec&) const { return "maxpool"; }
    std::string operator()(const CombineSpec& c) const {
      return c.mode == ndt::CombineMode::Add ? "add" : "concat";
    }
    std::string operator()(const LinearSpec&) const { return "linear"; }
  };
  return std::visit(Visitor{}, spec);
}

std::string describe_spec(const NodeSpec& spec) {
  if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
    return "k=" + std::to_string(c->kernel) + (c->padded ? " same " : " valid ") + std::to_string(c->in_ch) + "->" +
           std::to_string(c->out_ch);
  }
  if (const auto* m = spec_as<MaxPoolSpec>(spec)) {
    return "k=" + std::to_string(m->kernel) + " s=" + std::to_string(m->stride);
  }
  if (const auto* l = spec_as<LinearSpec>(spec)) return std::to_string(l->in_dim) + "->" + std::to_string(l->out_dim);
  return {};
}

bool is_image_node(const NodeSpec& spec) { return !std::holds_alternative<LinearSpec>(spec); }

bool has_params(const NodeSpec& spec) {
  return std::holds_alternative<ConvBlockSpec>(spec) || std::holds_alternative<LinearSpec>(spec);
}

// ---------------------------------------------------------------- Topology

auto Topology::entry(NodeId id) const -> const Entry& {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw InputError("no node with ordinal " + std::to_string(id.value));
  return it->second;
}

auto Topology::entry(NodeId id) -> Entry& {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw InputError("no node with ordinal " + std::to_string(id.value));
  return it->second;
}

NodeId Topology::add_node(NodeSpec spec) {
  const NodeId id{next_ordinal_++};
  nodes_.emplace(id, Entry{std::move(spec), {}, {}});
  invalidate();
  return id;
}

bool Topology::has_edge(NodeId from, NodeId to) const {
  const auto& ch = entry(from).children;
  return std::find(ch.begin(), ch.end(), to) != ch.end();
}

bool Topology::reaches(NodeId from, NodeId to) const {
  std::vector<NodeId> stack{from};
  std::unordered_set<NodeId> seen{from};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (n == to) return true;
    for (NodeId c : entry(n).children) {
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  return false;
}

void Topology::add_edge(NodeId from, NodeId to) {
  entry(from);
  entry(to);
  if (from == to || reaches(to, from)) {
    throw TopologicalOrderError("edge " + display_name(from) + "->" + display_name(to) +
                                " would create a cycle");
  }
  if (has_edge(from, to)) throw InputError("edge " + display_name(from) + "->" + display_name(to) + " already exists");
  entry(from).children.push_back(to);
  entry(to).parents.push_back(from);
  invalidate();
}

void Topology::splice(NodeId from, NodeId to, NodeId middle) {
  Entry& f = entry(from);
  Entry& t = entry(to);
  Entry& m = entry(middle);
  auto ci = std::find(f.children.begin(), f.children.end(), to);
  auto pi = std::find(t.parents.begin(), t.parents.end(), from);
  if (ci == f.children.end() || pi == t.parents.end()) {
    throw InputError("no edge " + display_name(from) + "->" + display_name(to));
  }
  if (!m.parents.empty() || !m.children.empty()) throw InputError("spliced node must be unconnected");
  *ci = middle;
  *pi = middle;
  m.parents.push_back(from);
  m.children.push_back(to);
  invalidate();
}

const NodeSpec& Topology::spec(NodeId id) const { return entry(id).spec; }

NodeSpec& Topology::mutable_spec(NodeId id) {
  invalidate();
  return entry(id).spec;
}

std::span<const NodeId> Topology::parents(NodeId id) const { return entry(id).parents; }
std::span<const NodeId> Topology::children(NodeId id) const { return entry(id).children; }

std::size_t Topology::edge_count() const {
  std::size_t n = 0;
  for (const auto& [id, e] : nodes_) n += e.children.size();
  return n;
}

std::vector<NodeId> Topology::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, e] : nodes_) ids.push_back(id);
  return ids;
}

std::vector<std::pair<NodeId, NodeId>> Topology::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [id, e] : nodes_) {
    for (NodeId c : e.children) out.emplace_back(id, c);
  }
  return out;
}

const std::vector<NodeId>& Topology::topo_order() const {
  if (topo_cache_) return *topo_cache_;
  std::map<NodeId, std::size_t> indegree;
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, e] : nodes_) {
    indegree[id] = e.parents.size();
    if (e.parents.empty()) ready.push(id);
  }
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    const NodeId n = ready.top();
    ready.pop();
    order.push_back(n);
    for (NodeId c : nodes_.at(n).children) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != nodes_.size()) throw IntegrityError("graph contains a cycle");
  position_cache_.clear();
  for (std::size_t i = 0; i < order.size(); ++i) position_cache_[order[i]] = i;
  topo_cache_ = std::move(order);
  return *topo_cache_;
}

std::size_t Topology::position(NodeId id) const {
  topo_order();
  auto it = position_cache_.find(id);
  if (it == position_cache_.end()) throw InputError("no node with ordinal " + std::to_string(id.value));
  return it->second;
}

std::string Topology::display_name(NodeId id) const {
  auto it = nodes_.find(id);
  const std::string label = it == nodes_.end() ? "node" : kind_label(it->second.spec);
  return label + std::to_string(id.value);
}

Topology make_topology(const std::map<NodeId, NodeSpec>& specs,
                       const std::map<NodeId, std::vector<NodeId>>& parents,
                       const std::map<NodeId, std::vector<NodeId>>& children,
                       std::uint32_t next_ordinal) {
  Topology t;
  for (const auto& [id, spec] : specs) {
    if (id.value >= next_ordinal) throw InputError("node ordinal beyond ordinal counter");
    Topology::Entry e{spec, {}, {}};
    if (auto it = parents.find(id); it != parents.end()) e.parents = it->second;
    if (auto it = children.find(id); it != children.end()) e.children = it->second;
    t.nodes_.emplace(id, std::move(e));
  }
  // Adjacency must be symmetric and reference known nodes.
  for (const auto& [id, e] : t.nodes_) {
    for (NodeId c : e.children) {
      auto it = t.nodes_.find(c);
      if (it == t.nodes_.end()) throw InputError("edge to unknown node " + std::to_string(c.value));
      if (std::count(it->second.parents.begin(), it->second.parents.end(), id) != 1) {
        throw InputError("adjacency lists disagree on edge " + std::to_string(id.value) + "->" +
                         std::to_string(c.value));
      }
    }
    for (NodeId p : e.parents) {
      if (!t.nodes_.contains(p)) throw InputError("edge from unknown node " + std::to_string(p.value));
    }
    if (std::unordered_set<NodeId>(e.children.begin(), e.children.end()).size() != e.children.size()) {
      throw InputError("duplicate edge from node " + std::to_string(id.value));
    }
  }
  std::size_t pcount = 0;
  for (const auto& [id, e] : t.nodes_) pcount += e.parents.size();
  if (pcount != t.edge_count()) throw InputError("adjacency lists disagree on edge count");
  t.next_ordinal_ = next_ordinal;
  t.topo_order();
  return t;
}

// ------------------------------------------------------------------- Graph

namespace {

void check_params(const Topology& topo, NodeId id, const std::optional<LayerParams>& params) {
  const NodeSpec& spec = topo.spec(id);
  if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
    const auto* p = params ? std::get_if<ndt::ConvParams>(&*params) : nullptr;
    if (p == nullptr) throw IntegrityError(topo.display_name(id) + " lacks conv parameters");
    const ndt::Shape want{c->out_ch, c->in_ch, c->kernel, c->kernel};
    if (p->weight.value.shape() != want || p->bias.value.shape() != ndt::Shape{c->out_ch} ||
        p->gamma.value.shape() != ndt::Shape{c->out_ch} || p->beta.value.shape() != ndt::Shape{c->out_ch} ||
        p->running_mean.shape() != ndt::Shape{c->out_ch} || p->running_var.shape() != ndt::Shape{c->out_ch} ||
        p->weight.grad.shape() != want) {
      throw IntegrityError(topo.display_name(id) + " parameter shapes do not match " +
                           ndt::to_string(want));
    }
  } else if (const auto* l = spec_as<LinearSpec>(spec)) {
    const auto* p = params ? std::get_if<ndt::LinearParams>(&*params) : nullptr;
    if (p == nullptr) throw IntegrityError(topo.display_name(id) + " lacks linear parameters");
    const ndt::Shape want{l->in_dim, l->out_dim};
    if (p->weight.value.shape() != want || p->bias.value.shape() != ndt::Shape{l->out_dim} ||
        p->weight.grad.shape() != want) {
      throw IntegrityError(topo.display_name(id) + " parameter shapes do not match " +
                           ndt::to_string(want));
    }
  } else if (params) {
    throw IntegrityError(topo.display_name(id) + " takes no parameters");
  }
}

template <typename T>
bool same_values(const ndt::BasicParameter<T>& a, const ndt::BasicParameter<T>& b) {
  return a.value == b.value;
}

bool same_params(const LayerParams& a, const LayerParams& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<ndt::ConvParams>(&a)) {
    const auto& cb = std::get<ndt::ConvParams>(b);
    return same_values(ca->weight, cb.weight) && same_values(ca->bias, cb.bias) &&
           same_values(ca->gamma, cb.gamma) && same_values(ca->beta, cb.beta) &&
           ca->running_mean == cb.running_mean && ca->running_var == cb.running_var;
  }
  const auto& la = std::get<ndt::LinearParams>(a);
  const auto& lb = std::get<ndt::LinearParams>(b);
  return same_values(la.weight, lb.weight) && same_values(la.bias, lb.bias);
}

}  // namespace

Graph Graph::chain(ImageShape input, ConvBlockSpec first, ndt::ConvParams first_params,
                   std::size_t num_classes, std::size_t fc_width, ndt::LinearParams variable_params,
                   ndt::LinearParams output_params) {
  Graph g;
  g.input_ = input;
  g.num_classes_ = num_classes;
  g.fc_width_ = fc_width;
  const ImageShape conv_out = conv_output_shape(first, input);
  const NodeId conv = g.topo_.add_node(first);
  const NodeId var = g.topo_.add_node(LinearSpec{conv_out.size(), fc_width, true});
  const NodeId out = g.topo_.add_node(LinearSpec{fc_width, num_classes, false});
  g.topo_.add_edge(conv, var);
  g.topo_.add_edge(var, out);
  g.params_.emplace(conv, std::move(first_params));
  g.params_.emplace(var, std::move(variable_params));
  g.params_.emplace(out, std::move(output_params));
  g.locate_roles();
  g.validate_structure();
  return g;
}

void Graph::locate_roles() {
  bool have_var = false;
  for (NodeId id : topo_.node_ids()) {
    if (topo_.parents(id).empty()) source_ = id;
    if (topo_.children(id).empty()) output_ = id;
    if (const auto* l = spec_as<LinearSpec>(topo_.spec(id)); l != nullptr && l->is_variable) {
      variable_ = id;
      have_var = true;
    }
  }
  if (!have_var) throw IntegrityError("graph has no variable linear layer");
}

NodeId Graph::insert_between(NodeId x, NodeId y, NodeSpec spec, std::optional<LayerParams> params) {
  if (!topo_.contains(x) || !topo_.contains(y) || !topo_.has_edge(x, y)) {
    throw InputError("insert_between: no edge " + topo_.display_name(x) + "->" + topo_.display_name(y));
  }
  if (std::holds_alternative<LinearSpec>(spec)) throw InputError("insert_between: linear layers are fixed");
  if (!is_image_node(topo_.spec(x))) {
    throw InputError("insert_between: " + topo_.display_name(x) + " does not produce an image");
  }
  Topology trial_check;  // parameter check needs the spec in a topology
  const NodeId probe = trial_check.add_node(spec);
  check_params(trial_check, probe, params);

  const NodeId id = topo_.add_node(std::move(spec));
  topo_.splice(x, y, id);
  if (params) params_.emplace(id, std::move(*params));
  return id;
}

void Graph::connect(NodeId x, NodeId y) {
  if (!topo_.contains(x) || !topo_.contains(y)) throw InputError("connect: unknown node");
  if (!std::holds_alternative<CombineSpec>(topo_.spec(y))) {
    throw InputError("connect: " + topo_.display_name(y) + " is not a combine node");
  }
  if (!is_image_node(topo_.spec(x))) {
    throw InputError("connect: " + topo_.display_name(x) + " does not produce an image");
  }
  if (topo_.has_edge(x, y)) {
    throw InputError("connect: edge " + topo_.display_name(x) + "->" + topo_.display_name(y) + " exists");
  }
  if (topo_.position(x) >= topo_.position(y)) {
    throw TopologicalOrderError("connect: " + topo_.display_name(x) + " does not precede " +
                                topo_.display_name(y) + " in topological order");
  }
  topo_.add_edge(x, y);
}

void Graph::update_node(NodeId id, NodeSpec spec, std::optional<LayerParams> params) {
  if (topo_.spec(id).index() != spec.index()) throw InputError("update_node cannot change node kind");
  Topology trial_check;
  const NodeId probe = trial_check.add_node(spec);
  check_params(trial_check, probe, params);
  topo_.mutable_spec(id) = std::move(spec);
  if (params) {
    params_.insert_or_assign(id, std::move(*params));
  } else {
    params_.erase(id);
  }
}

ndt::ConvParams& Graph::conv_params(NodeId id) {
  auto it = params_.find(id);
  if (it == params_.end() || !std::holds_alternative<ndt::ConvParams>(it->second)) {
    throw InputError(topo_.display_name(id) + " is not a conv block");
  }
  return std::get<ndt::ConvParams>(it->second);
}

const ndt::ConvParams& Graph::conv_params(NodeId id) const {
  return const_cast<Graph*>(this)->conv_params(id);
}

ndt::LinearParams& Graph::linear_params(NodeId id) {
  auto it = params_.find(id);
  if (it == params_.end() || !std::holds_alternative<ndt::LinearParams>(it->second)) {
    throw InputError(topo_.display_name(id) + " is not a linear layer");
  }
  return std::get<ndt::LinearParams>(it->second);
}

const ndt::LinearParams& Graph::linear_params(NodeId id) const {
  return const_cast<Graph*>(this)->linear_params(id);
}

std::size_t Graph::parameter_count(NodeId id) const {
  auto it = params_.find(id);
  if (it == params_.end()) return 0;
  if (const auto* c = std::get_if<ndt::ConvParams>(&it->second)) {
    return c->weight.value.size() + c->bias.value.size() + c->gamma.value.size() + c->beta.value.size();
  }
  const auto& l = std::get<ndt::LinearParams>(it->second);
  return l.weight.value.size() + l.bias.value.size();
}

std::size_t Graph::parameter_count() const {
  std::size_t n = 0;
  for (const auto& entry : params_) n += parameter_count(entry.first);
  return n;
}

void Graph::validate_structure() const {
  const auto& order = topo_.topo_order();
  std::size_t sources = 0, sinks = 0, variables = 0;
  for (NodeId id : order) {
    const NodeSpec& spec = topo_.spec(id);
    const auto np = topo_.parents(id).size();
    if (np == 0) {
      ++sources;
      if (!std::holds_alternative<ConvBlockSpec>(spec)) {
        throw IntegrityError("source " + topo_.display_name(id) + " is not a conv block");
      }
    } else if (std::holds_alternative<CombineSpec>(spec)) {
      if (np < 2) throw IntegrityError(topo_.display_name(id) + " has fewer than two inputs");
    } else if (np != 1) {
      throw IntegrityError(topo_.display_name(id) + " has " + std::to_string(np) + " parents");
    }
    if (topo_.children(id).empty()) ++sinks;
    if (const auto* l = spec_as<LinearSpec>(spec)) {
      if (l->is_variable) {
        ++variables;
        const auto ch = topo_.children(id);
        if (ch.size() != 1 || ch[0] != output_) {
          throw IntegrityError("variable linear must feed only the output layer");
        }
      } else if (id != output_) {
        throw IntegrityError("unexpected extra linear layer " + topo_.display_name(id));
      }
    }
    auto it = params_.find(id);
    check_params(topo_, id, it == params_.end() ? std::nullopt : std::optional<LayerParams>(it->second));
  }
  if (sources != 1 || sinks != 1 || variables != 1) {
    throw IntegrityError("graph must have one source, one sink and one variable linear layer");
  }
  if (params_.size() > topo_.node_count()) throw IntegrityError("parameters for unknown nodes");
  for (const auto& [id, p] : params_) {
    if (!topo_.contains(id)) throw IntegrityError("parameters for unknown node");
  }
}

bool operator==(const Graph& a, const Graph& b) {
  if (!(a.topo_ == b.topo_) || !(a.input_ == b.input_) || a.num_classes_ != b.num_classes_ ||
      a.fc_width_ != b.fc_width_ || !(a.aging_ == b.aging_) || a.params_.size() != b.params_.size()) {
    return false;
  }
  for (const auto& [id, p] : a.params_) {
    auto it = b.params_.find(id);
    if (it == b.params_.end() || !same_params(p, it->second)) return false;
  }
  return true;
}

Graph decode_graph_parts(Topology topo, ImageShape input, std::size_t num_classes,
                         std::size_t fc_width, std::map<NodeId, LayerParams> params,
                         sched::AgingState aging) {
  Graph g;
  g.topo_ = std::move(topo);
  g.input_ = input;
  g.num_classes_ = num_classes;
  g.fc_width_ = fc_width;
  g.params_ = std::move(params);
  g.aging_ = std::move(aging);
  g.locate_roles();
  g.validate_structure();
  return g;
}

// -------------------------------------------------------------------- seed

ConvBlockSpec sample_seed_spec(ImageShape input, Rng& rng) {
  static constexpr std::size_t kKernels[] = {3, 5};
  static constexpr std::size_t kChannels[] = {8, 16, 32};
  ConvBlockSpec s;
  s.kernel = kKernels[uniform_index(rng, 2)];
  s.padded = coin(rng);
  s.out_ch = kChannels[uniform_index(rng, 3)];
  s.in_ch = input.channels;
  if (!s.padded && (input.height < s.kernel || input.width < s.kernel)) s.padded = true;
  return s;
}

Graph seed_graph(ImageShape input, std::size_t num_classes, std::size_t fc_width, Rng& rng) {
  if (input.channels == 0 || input.height == 0 || input.width == 0) {
    throw InputError("input shape must be positive, got " + to_string(input));
  }
  if (num_classes == 0 || fc_width == 0) throw InputError("num_classes and fc_width must be positive");
  const ConvBlockSpec spec = sample_seed_spec(input, rng);
  const ImageShape out = conv_output_shape(spec, input);
  auto conv = glorot_conv(spec.in_ch, spec.out_ch, spec.kernel, rng);
  auto var = glorot_linear(out.size(), fc_width, rng);
  auto head = glorot_linear(fc_width, num_classes, rng);
  return Graph::chain(input, spec, std::move(conv), num_classes, fc_width, std::move(var), std::move(head));
}

}  // namespace hcnas::graph
