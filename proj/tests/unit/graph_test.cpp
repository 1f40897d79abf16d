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

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <string>

#include "doctest.h"
#include "hcnas/graph/dot.hpp"
#include "hcnas/graph/graph.hpp"
#include "hcnas/graph/init.hpp"
#include "hcnas/graph/network.hpp"
#include "hcnas/graph/serialize.hpp"
#include "hcnas/graph/shapes.hpp"
#include "support/helpers.hpp"

using namespace hcnas;
using namespace hcnas::graph;
using hcnas::testing::random_graph;
using hcnas::testing::random_tensor;

namespace {

Graph chain_graph(ImageShape in, ConvBlockSpec spec, std::size_t classes, std::size_t fc_width, Rng& rng) {
  const ImageShape out = conv_output_shape(spec, in);
  return Graph::chain(in, spec, glorot_conv(spec.in_ch, spec.out_ch, spec.kernel, rng), classes, fc_width,
                      glorot_linear(out.size(), fc_width, rng), glorot_linear(fc_width, classes, rng));
}

NodeShape image(std::size_t c, std::size_t h, std::size_t w) { return NodeShape{false, {c, h, w}, 0}; }

// Evaluates a graph node by node with the single-layer kernels, independent
// of Network, recording every node's output.
std::map<NodeId, ndt::Tensor> execute(const Graph& g, const ndt::Tensor& input) {
  std::map<NodeId, ndt::Tensor> out;
  for (NodeId id : g.topo_order()) {
    const NodeSpec& spec = g.spec(id);
    const auto parents = g.parents(id);
    if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
      auto p = g.conv_params(id);
      out[id] = ndt::conv_block_forward(parents.empty() ? input : out.at(parents[0]), p, c->padded, false);
    } else if (const auto* m = spec_as<MaxPoolSpec>(spec)) {
      out[id] = ndt::maxpool_forward(out.at(parents[0]), m->kernel, m->stride);
    } else if (const auto* cb = spec_as<CombineSpec>(spec)) {
      std::vector<ndt::Tensor> ins;
      for (NodeId p : parents) ins.push_back(out.at(p));
      out[id] = ndt::combine_forward<float>(ins, cb->mode);
    } else {
      const auto& l = std::get<LinearSpec>(spec);
      ndt::Tensor x = out.at(parents[0]);
      if (l.is_variable) x = x.reshaped({x.dim(0), x.size() / x.dim(0)});
      auto p = g.linear_params(id);
      ndt::Tensor y = ndt::linear_forward(x, p);
      if (l.is_variable) {
        for (auto& v : y.data()) v = std::max(v, 0.0f);
      }
      out[id] = y;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("seed graph examples") {
  Rng rng(1);
  {
    Graph g = chain_graph({3, 32, 32}, {3, true, 3, 16}, 10, 1024, rng);
    const auto s = infer_shapes(g);
    CHECK(s.at(g.source()) == image(16, 32, 32));
    CHECK(flatten_size(g, s) == 16384);
    CHECK(std::get<LinearSpec>(g.spec(g.variable_linear())).in_dim == 16384);
    CHECK(std::get<LinearSpec>(g.spec(g.variable_linear())).out_dim == 1024);
  }
  {
    Graph g = chain_graph({1, 16, 16}, {5, false, 1, 8}, 10, 1024, rng);
    const auto s = infer_shapes(g);
    CHECK(s.at(g.source()) == image(8, 12, 12));
    CHECK(flatten_size(g, s) == 1152);
  }
  {
    Graph g = chain_graph({3, 32, 32}, {5, false, 3, 8}, 10, 1024, rng);
    const auto s = infer_shapes(g);
    CHECK(s.at(g.source()) == image(8, 28, 28));
    CHECK(flatten_size(g, s) == 6272);
  }
}

TEST_CASE("seed sampling frequencies") {
  Rng rng(2);
  const int n = 10000;
  std::map<std::size_t, int> kernels, channels;
  int padded = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_seed_spec({3, 32, 32}, rng);
    ++kernels[s.kernel];
    ++channels[s.out_ch];
    padded += s.padded ? 1 : 0;
  }
  CHECK(kernels.size() == 2);
  for (auto [k, c] : kernels) CHECK(std::fabs(c / double(n) - 0.5) < 0.02);
  CHECK(channels.size() == 3);
  for (auto [ch, c] : channels) CHECK(std::fabs(c / double(n) - 1.0 / 3.0) < 0.02);
  CHECK(std::fabs(padded / double(n) - 0.5) < 0.02);
}

TEST_CASE("seed sampling falls back to padding on tiny inputs") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Graph g = seed_graph({1, 4, 4}, 3, 16, rng);
    const auto& c = std::get<ConvBlockSpec>(g.spec(g.source()));
    if (c.kernel == 5) CHECK(c.padded);
    CHECK_NOTHROW(infer_shapes(g));
    g.validate_structure();
  }
  CHECK_THROWS_AS(seed_graph({1, 4, 4}, 0, 16, rng), InputError);
}

TEST_CASE("seed topological order and names") {
  Rng rng(4);
  Graph g = seed_graph({1, 16, 16}, 10, 64, rng);
  const auto& order = g.topo_order();
  REQUIRE(order.size() == 3);
  CHECK(g.display_name(order[0]) == "conv0");
  CHECK(g.display_name(order[1]) == "linear1");
  CHECK(g.display_name(order[2]) == "linear2");
  CHECK(order[1] == g.variable_linear());
  CHECK(order[2] == g.output_linear());
  CHECK(g.topology().edge_count() == 2);
}

TEST_CASE("insert_between and connect") {
  Rng rng(5);
  Graph g = chain_graph({1, 12, 12}, {3, true, 1, 8}, 4, 32, rng);
  const NodeId c0 = g.source();
  const NodeId lin = g.variable_linear();
  const auto edges_before = g.topology().edges();
  const NodeId c1 = g.insert_between(c0, lin, ConvBlockSpec{3, true, 8, 8}, LayerParams(glorot_conv(8, 8, 3, rng)));
  auto edges_after = g.topology().edges();
  std::set<std::pair<NodeId, NodeId>> before(edges_before.begin(), edges_before.end());
  std::set<std::pair<NodeId, NodeId>> after(edges_after.begin(), edges_after.end());
  before.erase({c0, lin});
  before.insert({c0, c1});
  before.insert({c1, lin});
  CHECK(before == after);
  CHECK(g.display_name(c1) == "conv3");

  CHECK_THROWS_AS(g.insert_between(lin, c0, MaxPoolSpec{2, 2}), InputError);  // no such edge
  CHECK_THROWS_AS(g.connect(c0, c1), InputError);                             // not a combine

  // Skip by hand: conv0 → conv3 → add ← conv0.
  const NodeId add = g.insert_between(c1, lin, CombineSpec{ndt::CombineMode::Add});
  g.connect(c0, add);
  CHECK(g.parents(add).size() == 2);
  CHECK(g.topology().position(c1) < g.topology().position(add));
  CHECK(g.topo_order().size() == 5);
  CHECK_NOTHROW(infer_shapes(g));
  g.validate_structure();

  // A node after the combine cannot feed it; duplicate edges are rejected.
  const NodeId c2 = g.insert_between(add, lin, ConvBlockSpec{3, true, 8, 8}, LayerParams(glorot_conv(8, 8, 3, rng)));
  CHECK_THROWS_AS(g.connect(c2, add), TopologicalOrderError);
  CHECK_THROWS_AS(g.connect(c0, add), InputError);
}

TEST_CASE("shape errors name the node") {
  Topology t;
  const NodeId a = t.add_node(ConvBlockSpec{5, false, 8, 8});
  const NodeId b = t.add_node(ConvBlockSpec{3, true, 8, 8});
  const NodeId s = t.add_node(ConvBlockSpec{3, true, 8, 8});
  const NodeId add = t.add_node(CombineSpec{ndt::CombineMode::Add});
  const NodeId v = t.add_node(LinearSpec{8 * 24 * 24, 16, true});
  const NodeId o = t.add_node(LinearSpec{16, 10, false});
  t.add_edge(s, a);
  t.add_edge(s, b);
  t.add_edge(a, add);  // (8,24,24)
  t.add_edge(b, add);  // (8,28,28)
  t.add_edge(add, v);
  t.add_edge(v, o);
  const auto r = try_infer_shapes(t, {8, 28, 28}, 16);
  REQUIRE(std::holds_alternative<ShapeError>(r));
  CHECK(std::get<ShapeError>(r).kind == ShapeErrorKind::AddMismatch);
  CHECK(std::get<ShapeError>(r).node == add);

  Topology d;
  const NodeId c = d.add_node(ConvBlockSpec{5, false, 1, 4});
  const NodeId p = d.add_node(MaxPoolSpec{3, 3});
  const NodeId lv = d.add_node(LinearSpec{4, 8, true});
  const NodeId lo = d.add_node(LinearSpec{8, 2, false});
  d.add_edge(c, p);
  d.add_edge(p, lv);
  d.add_edge(lv, lo);
  const auto r2 = try_infer_shapes(d, {1, 6, 6}, 8);  // conv → (4,2,2), pool 3 → degenerate
  REQUIRE(std::holds_alternative<ShapeError>(r2));
  CHECK(std::get<ShapeError>(r2).kind == ShapeErrorKind::DegenerateSpatial);
  CHECK(std::get<ShapeError>(r2).node == p);
}

TEST_CASE("fc cap policy") {
  Rng rng(6);
  Graph g = chain_graph({1, 16, 16}, {3, true, 1, 8}, 10, 64, rng);  // F = 2048 > 64
  CHECK_NOTHROW(infer_shapes(g));
  ShapeOptions strict;
  strict.strict_fc_cap = true;
  try {
    infer_shapes(g, strict);
    FAIL("strict cap accepted F > fc_width");
  } catch (const ShapeInferenceError& e) {
    CHECK(e.error().kind == ShapeErrorKind::FcWidthExceeded);
  }
}

TEST_CASE("six-way add fan-in topology builds and runs") {
  // conv0 feeds add27 together with conv7, conv11, conv13, conv17 and
  // conv19; add27 feeds conv1, then the classifier.
  Rng rng(7);
  std::map<NodeId, NodeSpec> specs;
  std::map<NodeId, std::vector<NodeId>> parents, children;
  std::map<NodeId, LayerParams> params;
  auto id = [](std::uint32_t v) { return NodeId{v}; };
  const std::vector<std::uint32_t> chain = {0, 7, 11, 13, 17, 19};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const std::size_t in = i == 0 ? 3 : 16;
    specs[id(chain[i])] = ConvBlockSpec{3, true, in, 16};
    params[id(chain[i])] = glorot_conv(in, 16, 3, rng);
    if (i > 0) {
      parents[id(chain[i])].push_back(id(chain[i - 1]));
      children[id(chain[i - 1])].push_back(id(chain[i]));
    }
    children[id(chain[i])].push_back(id(27));
    parents[id(27)].push_back(id(chain[i]));
  }
  specs[id(27)] = CombineSpec{ndt::CombineMode::Add};
  specs[id(1)] = ConvBlockSpec{5, false, 16, 8};
  params[id(1)] = glorot_conv(16, 8, 5, rng);
  parents[id(1)] = {id(27)};
  children[id(27)] = {id(1)};
  specs[id(30)] = LinearSpec{8 * 28 * 28, 64, true};
  params[id(30)] = glorot_linear(8 * 28 * 28, 64, rng);
  parents[id(30)] = {id(1)};
  children[id(1)] = {id(30)};
  specs[id(31)] = LinearSpec{64, 10, false};
  params[id(31)] = glorot_linear(64, 10, rng);
  parents[id(31)] = {id(30)};
  children[id(30)] = {id(31)};
  Graph g = decode_graph_parts(make_topology(specs, parents, children, 32), {3, 32, 32}, 10, 64, params, {});

  CHECK(g.parents(id(27)).size() == 6);
  CHECK(g.display_name(id(27)) == "add27");
  Network net(g);
  const auto logits = net.logits(random_tensor({2, 3, 32, 32}, rng));
  CHECK(logits.shape() == ndt::Shape{2, 10});
  const std::string dot = to_dot(g);
  CHECK(dot.find("conv0 -> add27;") != std::string::npos);
  CHECK(dot.find("add27 -> conv1;") != std::string::npos);
}

TEST_CASE("random graphs keep every structural invariant") {
  Rng rng(8);
  std::size_t combines = 0;
  for (int i = 0; i < 1000; ++i) {
    Graph g = random_graph(rng, 1 + uniform_index(rng, 8));
    const auto& topo = g.topology();
    for (auto [x, y] : topo.edges()) CHECK(topo.position(x) < topo.position(y));
    std::set<std::string> names;
    for (NodeId n : g.topo_order()) {
      names.insert(g.display_name(n));
      if (std::holds_alternative<CombineSpec>(g.spec(n))) {
        ++combines;
        CHECK(g.parents(n).size() >= 2);
      } else if (n != g.source()) {
        CHECK(g.parents(n).size() == 1);
      }
    }
    CHECK(names.size() == topo.node_count());
    CHECK_NOTHROW(g.validate_structure());
  }
  CHECK(combines > 100);
}

TEST_CASE("random insertions never create a cycle") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    Graph g = random_graph(rng, uniform_index(rng, 5));
    std::vector<std::pair<NodeId, NodeId>> image_edges;
    for (auto [x, y] : g.topology().edges()) {
      if (is_image_node(g.spec(x))) image_edges.push_back({x, y});
    }
    const auto [x, y] = image_edges[uniform_index(rng, image_edges.size())];
    g.insert_between(x, y, MaxPoolSpec{2, 2});
    CHECK_NOTHROW(g.topo_order());
    for (auto [a, b] : g.topology().edges()) CHECK(g.topology().position(a) < g.topology().position(b));
  }
}

TEST_CASE("inferred shapes match executed shapes") {
  Rng rng(10);
  for (int i = 0; i < 500; ++i) {
    Graph g = random_graph(rng, 1 + uniform_index(rng, 6));
    const ShapeMap shapes = infer_shapes(g);
    const auto& in = g.input_shape();
    const auto x = random_tensor({2, in.channels, in.height, in.width}, rng);
    const auto outs = execute(g, x);
    for (const auto& [id, t] : outs) {
      const NodeShape& s = shapes.at(id);
      if (s.flat) {
        CHECK(t.shape() == ndt::Shape{2, s.features});
      } else {
        CHECK(t.shape() == ndt::Shape{2, s.image.channels, s.image.height, s.image.width});
      }
    }
    Network net(g);
    const auto logits = net.logits(x);
    CHECK(logits.shape() == ndt::Shape{2, g.num_classes()});
    CHECK(testing::max_abs_diff(logits, outs.at(g.output_linear())) < 1e-4);
  }
}

TEST_CASE("network parameters and multipliers") {
  Rng rng(11);
  Graph g = chain_graph({1, 8, 8}, {3, true, 1, 4}, 3, 16, rng);
  g.aging().alpha[g.source()] = 0.0;
  g.aging().frozen.insert(g.source());
  g.aging().alpha[g.variable_linear()] = 0.25;
  Network net(g);
  const auto ps = net.parameters();
  REQUIRE(ps.size() == 8);
  CHECK(ps[0] == &g.conv_params(g.source()).weight);
  CHECK(ps[3] == &g.conv_params(g.source()).beta);
  CHECK(ps[4] == &g.linear_params(g.variable_linear()).weight);
  net.sync_lr_multipliers(true);
  CHECK(ps[0]->frozen);
  CHECK(ps[4]->lr_multiplier == 0.25f);
  CHECK(ps[7]->lr_multiplier == 1.0f);
  net.sync_lr_multipliers(false);
  for (auto* p : ps) CHECK(p->lr_multiplier == 1.0f);
  CHECK_THROWS_AS(net.logits(random_tensor({1, 1, 9, 8}, rng)), DimensionError);
}

TEST_CASE("serialization round trip") {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    Graph g = random_graph(rng, uniform_index(rng, 7));
    const nlohmann::json att = {{"note", i}};
    const std::string bytes = serialize(g, att);
    nlohmann::json back_att;
    Graph back = deserialize(bytes, &back_att);
    CHECK(back == g);
    CHECK(back_att == att);
    CHECK(serialize(back, att) == bytes);
    CHECK(back.topology().next_ordinal() == g.topology().next_ordinal());
    // Bit-identical forward after the round trip.
    const auto& in = g.input_shape();
    const auto x = random_tensor({2, in.channels, in.height, in.width}, rng);
    Network n1(g), n2(back);
    CHECK(n1.logits(x) == n2.logits(x));
  }
}

TEST_CASE("serialization rejects damaged input") {
  Rng rng(13);
  Graph g = random_graph(rng, 4);
  const std::string bytes = serialize(g);
  for (int i = 0; i < 200; ++i) {
    const std::size_t cut = i < 40 ? static_cast<std::size_t>(i) : uniform_index(rng, bytes.size());
    CHECK_THROWS_AS(deserialize(std::string_view(bytes).substr(0, cut)), ParseError);
  }
  CHECK_THROWS_AS(deserialize(bytes + "x"), ParseError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize(magic), ParseError);

  std::string version = bytes;
  const auto pos = version.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  version[pos + std::string("\"format_version\": ").size()] = '2';
  CHECK_THROWS_AS(deserialize(version), FormatError);

  try {
    deserialize(std::string_view(bytes).substr(0, bytes.size() - 3));
    FAIL("truncated blob accepted");
  } catch (const ParseError& e) {
    CHECK(e.offset() <= bytes.size());
  }
}

TEST_CASE("DOT export counts") {
  Rng rng(14);
  {
    Graph g = seed_graph({1, 16, 16}, 10, 64, rng);
    const std::string dot = to_dot(g);
    CHECK(dot.rfind("digraph NASGraph {", 0) == 0);
    CHECK(std::count(dot.begin(), dot.end(), '\n') == 2 + 3 + 2 + 1);
    CHECK(dot.find("fillcolor=red") != std::string::npos);
  }
  const std::regex node_re(R"(^  (\w+) \[label=)");
  const std::regex edge_re(R"(^  (\w+) -> (\w+);$)");
  for (int i = 0; i < 100; ++i) {
    Graph g = random_graph(rng, uniform_index(rng, 8));
    const std::string dot = to_dot(g);
    std::size_t nodes = 0, edges = 0, red = 0, blue = 0;
    std::size_t start = 0;
    while (start < dot.size()) {
      const std::size_t end = dot.find('\n', start);
      const std::string line = dot.substr(start, end - start);
      start = end + 1;
      std::smatch m;
      if (std::regex_search(line, m, node_re)) {
        ++nodes;
        red += line.find("fillcolor=red") != std::string::npos;
        blue += line.find("fillcolor=blue") != std::string::npos;
      }
      if (std::regex_match(line, m, edge_re)) ++edges;
    }
    std::size_t convs = 0, combines = 0;
    for (NodeId n : g.topo_order()) {
      convs += std::holds_alternative<ConvBlockSpec>(g.spec(n));
      combines += std::holds_alternative<CombineSpec>(g.spec(n));
    }
    CHECK(nodes == g.topology().node_count());
    CHECK(edges == g.topology().edge_count());
    CHECK(red == convs);
    CHECK(blue == combines);
  }
}
