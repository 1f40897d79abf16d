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

#include "hcnas/graph/serialize.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hcnas/errors.hpp"

namespace hcnas::graph {

using nlohmann::json;

namespace {

void put_floats(std::string& blob, std::span<const float> values) {
  for (float v : values) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
  }
}

void get_floats(std::string_view blob, std::size_t offset, std::span<float> out) {
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
  for (std::size_t i = 0; i < out.size(); ++i, p += 4) {
    const std::uint32_t u = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                            (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    out[i] = std::bit_cast<float>(u);
  }
}

std::vector<std::span<const float>> tensors_of(const LayerParams& p) {
  if (const auto* c = std::get_if<ndt::ConvParams>(&p)) {
    return {c->weight.value.data(), c->bias.value.data(), c->gamma.value.data(),
            c->beta.value.data(),   c->running_mean.data(), c->running_var.data()};
  }
  const auto& l = std::get<ndt::LinearParams>(p);
  return {l.weight.value.data(), l.bias.value.data()};
}

std::vector<std::span<float>> tensors_of(LayerParams& p) {
  if (auto* c = std::get_if<ndt::ConvParams>(&p)) {
    return {c->weight.value.data(), c->bias.value.data(), c->gamma.value.data(),
            c->beta.value.data(),   c->running_mean.data(), c->running_var.data()};
  }
  auto& l = std::get<ndt::LinearParams>(p);
  return {l.weight.value.data(), l.bias.value.data()};
}

json spec_to_json(const NodeSpec& spec) {
  json j;
  j["kind"] = kind_label(spec);
  if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
    j["kernel"] = c->kernel;
    j["padded"] = c->padded;
    j["in_ch"] = c->in_ch;
    j["out_ch"] = c->out_ch;
  } else if (const auto* m = spec_as<MaxPoolSpec>(spec)) {
    j["kernel"] = m->kernel;
    j["stride"] = m->stride;
  } else if (const auto* l = spec_as<LinearSpec>(spec)) {
    j["in_dim"] = l->in_dim;
    j["out_dim"] = l->out_dim;
    j["is_variable"] = l->is_variable;
  }
  return j;
}

NodeSpec spec_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "conv") {
    return ConvBlockSpec{j.at("kernel").get<std::size_t>(), j.at("padded").get<bool>(),
                         j.at("in_ch").get<std::size_t>(), j.at("out_ch").get<std::size_t>()};
  }
  if (kind == "maxpool") return MaxPoolSpec{j.at("kernel").get<std::size_t>(), j.at("stride").get<std::size_t>()};
  if (kind == "add") return CombineSpec{ndt::CombineMode::Add};
  if (kind == "concat") return CombineSpec{ndt::CombineMode::Concat};
  if (kind == "linear") {
    return LinearSpec{j.at("in_dim").get<std::size_t>(), j.at("out_dim").get<std::size_t>(),
                      j.at("is_variable").get<bool>()};
  }
  throw InputError("unknown node kind '" + kind + "'");
}

std::optional<LayerParams> empty_params(const NodeSpec& spec) {
  if (const auto* c = spec_as<ConvBlockSpec>(spec)) return ndt::ConvParams::zeros(c->in_ch, c->out_ch, c->kernel);
  if (const auto* l = spec_as<LinearSpec>(spec)) return ndt::LinearParams::zeros(l->in_dim, l->out_dim);
  return std::nullopt;
}

}  // namespace

std::string serialize(const Graph& g, const json& attachments) {
  const Topology& topo = g.topology();
  std::string blob;
  json nodes = json::array();
  for (NodeId id : topo.node_ids()) {
    json n = spec_to_json(topo.spec(id));
    n["id"] = id.value;
    json parents = json::array(), children = json::array();
    for (NodeId p : topo.parents(id)) parents.push_back(p.value);
    for (NodeId c : topo.children(id)) children.push_back(c.value);
    n["parents"] = parents;
    n["children"] = children;
    if (auto it = g.all_params().find(id); it != g.all_params().end()) {
      n["offset"] = blob.size();
      for (auto t : tensors_of(it->second)) put_floats(blob, t);
    }
    nodes.push_back(std::move(n));
  }
  json alpha = json::array();
  for (const auto& [id, a] : g.aging().alpha) alpha.push_back(json::array({id.value, a}));
  json frozen = json::array();
  for (NodeId id : g.aging().frozen) frozen.push_back(id.value);

  json m;
  m["format_version"] = kFormatVersion;
  m["input_shape"] = {g.input_shape().channels, g.input_shape().height, g.input_shape().width};
  m["num_classes"] = g.num_classes();
  m["fc_width"] = g.fc_width();
  m["next_ordinal"] = topo.next_ordinal();
  m["nodes"] = std::move(nodes);
  m["aging"] = {{"alpha", alpha}, {"frozen", frozen}};
  m["blob_bytes"] = blob.size();
  m["attachments"] = attachments;

  const std::string manifest = m.dump(1);
  std::string out(kGraphMagic);
  out += std::to_string(manifest.size());
  out += '\n';
  out += manifest;
  out += blob;
  return out;
}

Graph deserialize(std::string_view bytes, json* attachments) {
  if (bytes.substr(0, kGraphMagic.size()) != kGraphMagic) throw ParseError("bad graph magic", 0);
  std::size_t pos = kGraphMagic.size();
  const std::size_t nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos || nl == pos) throw ParseError("missing manifest length", pos);
  std::size_t manifest_len = 0;
  const auto [end, ec] = std::from_chars(bytes.data() + pos, bytes.data() + nl, manifest_len);
  if (ec != std::errc{} || end != bytes.data() + nl) {
    throw ParseError("malformed manifest length", static_cast<std::size_t>(end - bytes.data()));
  }
  pos = nl + 1;
  const std::size_t manifest_start = pos;
  if (bytes.size() - pos < manifest_len) throw ParseError("truncated manifest", bytes.size());

  json m;
  try {
    m = json::parse(bytes.substr(pos, manifest_len));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what(),
                     manifest_start + (e.byte > 0 ? e.byte - 1 : 0));
  }
  const std::size_t blob_start = manifest_start + manifest_len;
  const std::string_view blob = bytes.substr(blob_start);

  try {
    const int version = m.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw FormatError("unsupported graph format version " + std::to_string(version), manifest_start);
    }
    const std::size_t blob_bytes = m.at("blob_bytes").get<std::size_t>();
    if (blob.size() < blob_bytes) throw ParseError("truncated parameter blob", bytes.size());
    if (blob.size() > blob_bytes) throw ParseError("trailing bytes after parameter blob", blob_start + blob_bytes);

    const auto& shape = m.at("input_shape");
    const ImageShape input{shape.at(0).get<std::size_t>(), shape.at(1).get<std::size_t>(),
                           shape.at(2).get<std::size_t>()};
    std::map<NodeId, NodeSpec> specs;
    std::map<NodeId, std::vector<NodeId>> parents, children;
    std::map<NodeId, LayerParams> params;
    for (const auto& n : m.at("nodes")) {
      const NodeId id{n.at("id").get<std::uint32_t>()};
      if (specs.contains(id)) throw InputError("duplicate node id " + std::to_string(id.value));
      NodeSpec spec = spec_from_json(n);
      for (const auto& p : n.at("parents")) parents[id].push_back(NodeId{p.get<std::uint32_t>()});
      for (const auto& c : n.at("children")) children[id].push_back(NodeId{c.get<std::uint32_t>()});
      if (auto p = empty_params(spec)) {
        std::size_t off = n.at("offset").get<std::size_t>();
        for (auto t : tensors_of(*p)) {
          if (off > blob_bytes || (blob_bytes - off) / 4 < t.size()) {
            throw ParseError("parameter range outside blob", blob_start + std::min(off, blob_bytes));
          }
          get_floats(blob, off, t);
          off += 4 * t.size();
        }
        params.emplace(id, std::move(*p));
      } else if (n.contains("offset")) {
        throw InputError("parameterless node " + std::to_string(id.value) + " has a blob offset");
      }
      specs.emplace(id, std::move(spec));
    }
    Topology topo = make_topology(specs, parents, children, m.at("next_ordinal").get<std::uint32_t>());

    sched::AgingState aging;
    for (const auto& a : m.at("aging").at("alpha")) {
      aging.alpha[NodeId{a.at(0).get<std::uint32_t>()}] = a.at(1).get<double>();
    }
    for (const auto& f : m.at("aging").at("frozen")) aging.frozen.insert(NodeId{f.get<std::uint32_t>()});

    Graph g = decode_graph_parts(std::move(topo), input, m.at("num_classes").get<std::size_t>(),
                                 m.at("fc_width").get<std::size_t>(), std::move(params), std::move(aging));
    if (attachments != nullptr) *attachments = m.value("attachments", json(nullptr));
    return g;
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), manifest_start);
  } catch (const Error& e) {
    throw ParseError(std::string("inconsistent manifest: ") + e.what(), manifest_start);
  }
}

void save_graph(const std::string& path, const Graph& g, const json& attachments) {
  const std::string bytes = serialize(g, attachments);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw InputError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw InputError("cannot move " + tmp + " to " + path);
}

Graph load_graph(const std::string& path, json* attachments) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open graph file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str(), attachments);
}

}  // namespace hcnas::graph
