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

#include "hcnas/morph/morph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "hcnas/errors.hpp"
#include "hcnas/graph/init.hpp"
#include "hcnas/graph/shapes.hpp"

namespace hcnas::morph {

using graph::ConvBlockSpec;
using graph::Graph;
using graph::NodeId;
using graph::spec_as;

namespace {

graph::ShapeOptions trial_options(const MorphOptions& opts) {
  graph::ShapeOptions o;
  o.allow_flatten_resize = true;
  o.strict_fc_cap = opts.strict_fc_cap;
  return o;
}

graph::ShapeMap current_shapes(const Graph& g, const MorphOptions& opts) {
  return graph::infer_shapes(g, trial_options(opts));
}

/// Trial insertion of `spec` on edge (x,y) followed by shape inference.
bool insertion_fits(const Graph& g, NodeId x, NodeId y, graph::NodeSpec spec, const MorphOptions& opts) {
  graph::Topology t = g.topology();
  const NodeId n = t.add_node(std::move(spec));
  t.splice(x, y, n);
  return std::holds_alternative<graph::ShapeMap>(
      graph::try_infer_shapes(t, g.input_shape(), g.fc_width(), trial_options(opts)));
}

bool is_image(const Graph& g, NodeId id) { return graph::is_image_node(g.spec(id)); }

bool is_edge(const Graph& g, NodeId x, NodeId y) {
  return g.topology().contains(x) && g.topology().contains(y) && g.topology().has_edge(x, y);
}

bool single_parent(const Graph& g, NodeId id, NodeId* parent) {
  const auto ps = g.parents(id);
  if (ps.size() != 1) return false;
  *parent = ps[0];
  return true;
}

ConvBlockSpec deepen_spec(const Graph& g, const graph::ShapeMap& shapes, NodeId x, const MorphHyper& h) {
  const auto near = spec_as<ConvBlockSpec>(g.spec(nearest_conv_ancestor(g, x)));
  return ConvBlockSpec{h.kernel, h.padded, shapes.at(x).image.channels, near->out_ch};
}

bool valid_with_shapes(const Graph& g, const graph::ShapeMap& shapes, const MorphSite& s,
                       const MorphOptions& opts) {
  const auto& topo = g.topology();
  if (!topo.contains(s.a) || !topo.contains(s.b) || s.a == s.b) return false;
  switch (s.kind) {
    case MorphKind::Skip: {
      const auto& bs = g.spec(s.b);
      if (std::holds_alternative<graph::CombineSpec>(bs) || s.b == g.output_linear()) return false;
      NodeId p;
      if (!single_parent(g, s.b, &p) || s.a == p || !is_image(g, s.a)) return false;
      if (topo.position(s.a) >= topo.position(s.b)) return false;
      if (shapes.at(s.a) != shapes.at(p)) return false;
      const auto* pc = spec_as<graph::CombineSpec>(g.spec(p));
      if (pc != nullptr && pc->mode == ndt::CombineMode::Add && topo.has_edge(s.a, p)) return false;
      return true;
    }
    case MorphKind::Merge: {
      if (!std::holds_alternative<ConvBlockSpec>(g.spec(s.b))) return false;
      NodeId p;
      if (!single_parent(g, s.b, &p) || s.a == p || !is_image(g, s.a)) return false;
      if (topo.position(s.a) >= topo.position(s.b)) return false;
      const auto& sa = shapes.at(s.a).image;
      const auto& sp = shapes.at(p).image;
      return sa.height == sp.height && sa.width == sp.width;
    }
    case MorphKind::Widen: {
      if (s.hyper.factor != 2 && s.hyper.factor != 4) return false;
      if (!std::holds_alternative<ConvBlockSpec>(g.spec(s.a)) ||
          !std::holds_alternative<ConvBlockSpec>(g.spec(s.b))) {
        return false;
      }
      const auto ch = g.children(s.a);
      const auto ps = g.parents(s.b);
      return ch.size() == 1 && ch[0] == s.b && ps.size() == 1 && ps[0] == s.a;
    }
    case MorphKind::Deepen:
      if (s.hyper.kernel != 3 && s.hyper.kernel != 5) return false;
      if (!is_edge(g, s.a, s.b) || !is_image(g, s.a)) return false;
      return insertion_fits(g, s.a, s.b, deepen_spec(g, shapes, s.a, s.hyper), opts);
    case MorphKind::MaxPoolIns:
      if (s.hyper.kernel != 2 && s.hyper.kernel != 3) return false;
      if (!is_edge(g, s.a, s.b) || !is_image(g, s.a)) return false;
      return insertion_fits(g, s.a, s.b, graph::MaxPoolSpec{s.hyper.kernel, s.hyper.kernel}, opts);
    case MorphKind::LinearMorph: return false;
  }
  return false;
}

void require_valid(const Graph& g, const MorphSite& s, const MorphOptions& opts) {
  if (!is_valid_site(g, s, opts)) {
    throw MorphRejected(std::string(kind_name(s.kind)) + " site " + to_string(s, g) + " is not valid");
  }
}

void fill_new(std::span<float> out, InitMode init, float zero_one_value, std::size_t fan_in,
              std::size_t fan_out, Rng& rng) {
  if (init == InitMode::ZeroOne) {
    std::fill(out.begin(), out.end(), zero_one_value);
  } else {
    graph::glorot_uniform(out, fan_in, fan_out, rng);
  }
}

/// Appends `extra` output channels to a conv block.
ndt::ConvParams grow_out(const ndt::ConvParams& old, std::size_t extra, InitMode init, Rng& rng) {
  const std::size_t o = old.out_channels(), i = old.in_channels(), k = old.kernel();
  auto p = ndt::ConvParams::zeros(i, o + extra, k);
  const std::size_t slice = i * k * k;
  auto w = p.weight.value.data();
  std::copy(old.weight.value.data().begin(), old.weight.value.data().end(), w.begin());
  fill_new(w.subspan(o * slice), init, 0.0f, slice, (o + extra) * k * k, rng);
  auto keep = [o](std::span<const float> from, std::span<float> to) {
    std::copy(from.begin(), from.begin() + static_cast<std::ptrdiff_t>(o), to.begin());
  };
  keep(old.bias.value.data(), p.bias.value.data());
  keep(old.gamma.value.data(), p.gamma.value.data());
  keep(old.beta.value.data(), p.beta.value.data());
  keep(old.running_mean.data(), p.running_mean.data());
  keep(old.running_var.data(), p.running_var.data());
  return p;
}

/// Appends `extra` input channels to a conv block.
ndt::ConvParams grow_in(const ndt::ConvParams& old, std::size_t extra, InitMode init, Rng& rng) {
  const std::size_t o = old.out_channels(), i = old.in_channels(), k = old.kernel();
  auto p = ndt::ConvParams::zeros(i + extra, o, k);
  const std::size_t kk = k * k;
  auto src = old.weight.value.data();
  auto dst = p.weight.value.data();
  for (std::size_t oc = 0; oc < o; ++oc) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(oc * i * kk), i * kk,
                dst.begin() + static_cast<std::ptrdiff_t>(oc * (i + extra) * kk));
    fill_new(dst.subspan(oc * (i + extra) * kk + i * kk, extra * kk), init, 0.0f, (i + extra) * kk, o * kk, rng);
  }
  p.bias = old.bias;
  p.gamma = old.gamma;
  p.beta = old.beta;
  p.running_mean = old.running_mean;
  p.running_var = old.running_var;
  return p;
}

MorphOutcome finish(Graph& g, MorphKind kind, std::optional<NodeId> new_node, Rng& rng,
                    const MorphOptions& opts) {
  MorphOutcome out;
  out.new_node = new_node;
  out.linear_resized = morph_linear(g, opts.init, rng);
  sched::on_morphism(g.aging(), kind, g, is_layer_addition(kind) ? new_node : std::nullopt, opts.aging);
  return out;
}

}  // namespace

std::string to_string(const MorphSite& s, const Graph& g) {
  auto name = [&](NodeId id) {
    return g.topology().contains(id) ? g.display_name(id) : "#" + std::to_string(id.value);
  };
  std::string out = "(" + name(s.a) + "," + name(s.b) + ")";
  if (s.kind == MorphKind::Deepen) {
    out += " k=" + std::to_string(s.hyper.kernel) + (s.hyper.padded ? " same" : " valid");
  } else if (s.kind == MorphKind::MaxPoolIns) {
    out += " k=" + std::to_string(s.hyper.kernel);
  } else if (s.kind == MorphKind::Widen) {
    out += " x" + std::to_string(s.hyper.factor);
  }
  return out;
}

std::vector<MorphHyper> hyper_choices(MorphKind kind) {
  switch (kind) {
    case MorphKind::Deepen:
      return {{3, false, 0}, {3, true, 0}, {5, false, 0}, {5, true, 0}};
    case MorphKind::MaxPoolIns: return {{2, false, 0}, {3, false, 0}};
    case MorphKind::Widen: return {{0, false, 2}, {0, false, 4}};
    default: return {MorphHyper{}};
  }
}

NodeId nearest_conv_ancestor(const Graph& g, NodeId x) {
  const auto& topo = g.topology();
  std::vector<NodeId> frontier{x};
  std::set<NodeId> seen{x};
  while (!frontier.empty()) {
    std::optional<NodeId> best;
    for (NodeId n : frontier) {
      if (!std::holds_alternative<ConvBlockSpec>(g.spec(n))) continue;
      if (!best || topo.position(n) > topo.position(*best) ||
          (topo.position(n) == topo.position(*best) && *best < n)) {
        best = n;
      }
    }
    if (best) return *best;
    std::vector<NodeId> next;
    for (NodeId n : frontier) {
      for (NodeId p : g.parents(n)) {
        if (seen.insert(p).second) next.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  throw IntegrityError("no convolution above " + g.display_name(x));
}

std::vector<MorphSite> enumerate_sites(const Graph& g, MorphKind kind, const MorphHyper& hyper,
                                       const MorphOptions& opts) {
  const auto shapes = current_shapes(g, opts);
  const auto& order = g.topo_order();
  std::vector<MorphSite> sites;
  auto consider = [&](NodeId a, NodeId b) {
    MorphSite s{kind, a, b, hyper};
    if (valid_with_shapes(g, shapes, s, opts)) sites.push_back(s);
  };
  switch (kind) {
    case MorphKind::Skip:
    case MorphKind::Merge:
      for (std::size_t j = 0; j < order.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) consider(order[i], order[j]);
      }
      break;
    case MorphKind::Widen:
    case MorphKind::Deepen:
    case MorphKind::MaxPoolIns:
      for (NodeId y : order) {
        for (NodeId x : g.parents(y)) consider(x, y);
      }
      break;
    case MorphKind::LinearMorph: break;
  }
  return sites;
}

std::vector<MorphSite> enumerate_sites(const Graph& g, MorphKind kind, const MorphOptions& opts) {
  std::vector<MorphSite> all;
  for (const auto& h : hyper_choices(kind)) {
    auto s = enumerate_sites(g, kind, h, opts);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

bool is_valid_site(const Graph& g, const MorphSite& site, const MorphOptions& opts) {
  const auto& topo = g.topology();
  if (!topo.contains(site.a) || !topo.contains(site.b)) return false;
  return valid_with_shapes(g, current_shapes(g, opts), site, opts);
}

MorphOutcome apply_skip(Graph& g, NodeId a, NodeId b, const MorphOptions& opts) {
  require_valid(g, MorphSite{MorphKind::Skip, a, b, {}}, opts);
  const NodeId p = g.parents(b)[0];
  const auto* pc = spec_as<graph::CombineSpec>(g.spec(p));
  NodeId add;
  if (pc != nullptr && pc->mode == ndt::CombineMode::Add &&
      g.topology().position(a) < g.topology().position(p)) {
    add = p;
  } else {
    add = g.insert_between(p, b, graph::CombineSpec{ndt::CombineMode::Add});
  }
  g.connect(a, add);
  Rng unused(0);
  return finish(g, MorphKind::Skip, add, unused, opts);
}

MorphOutcome apply_deepen(Graph& g, NodeId x, NodeId y, std::size_t kernel, bool padded, Rng& rng,
                          const MorphOptions& opts) {
  const MorphSite site{MorphKind::Deepen, x, y, {kernel, padded, 0}};
  require_valid(g, site, opts);
  const auto spec = deepen_spec(g, current_shapes(g, opts), x, site.hyper);
  ndt::ConvParams p;
  if (opts.init == InitMode::ZeroOne) {
    p = ndt::ConvParams::zeros(spec.in_ch, spec.out_ch, spec.kernel);
    p.weight.value.fill(1.0f);
  } else {
    p = graph::glorot_conv(spec.in_ch, spec.out_ch, spec.kernel, rng);
  }
  const NodeId n = g.insert_between(x, y, spec, graph::LayerParams(std::move(p)));
  return finish(g, MorphKind::Deepen, n, rng, opts);
}

MorphOutcome apply_widen(Graph& g, NodeId x, NodeId y, std::size_t factor, Rng& rng, const MorphOptions& opts) {
  require_valid(g, MorphSite{MorphKind::Widen, x, y, {0, false, factor}}, opts);
  auto xs = *spec_as<ConvBlockSpec>(g.spec(x));
  auto ys = *spec_as<ConvBlockSpec>(g.spec(y));
  const std::size_t extra = xs.out_ch * (factor - 1);
  auto xp = grow_out(g.conv_params(x), extra, opts.init, rng);
  auto yp = grow_in(g.conv_params(y), extra, opts.init, rng);
  xs.out_ch += extra;
  ys.in_ch += extra;
  g.update_node(x, xs, graph::LayerParams(std::move(xp)));
  g.update_node(y, ys, graph::LayerParams(std::move(yp)));
  return finish(g, MorphKind::Widen, std::nullopt, rng, opts);
}

MorphOutcome apply_merge(Graph& g, NodeId a, NodeId b, Rng& rng, const MorphOptions& opts) {
  require_valid(g, MorphSite{MorphKind::Merge, a, b, {}}, opts);
  const auto shapes = current_shapes(g, opts);
  const NodeId p = g.parents(b)[0];
  const std::size_t extra = shapes.at(a).image.channels;
  auto bs = *spec_as<ConvBlockSpec>(g.spec(b));
  auto bp = grow_in(g.conv_params(b), extra, opts.init, rng);
  const NodeId cat = g.insert_between(p, b, graph::CombineSpec{ndt::CombineMode::Concat});
  g.connect(a, cat);
  bs.in_ch += extra;
  g.update_node(b, bs, graph::LayerParams(std::move(bp)));
  return finish(g, MorphKind::Merge, cat, rng, opts);
}

MorphOutcome apply_maxpool(Graph& g, NodeId x, NodeId y, std::size_t kernel, Rng& rng, const MorphOptions& opts) {
  require_valid(g, MorphSite{MorphKind::MaxPoolIns, x, y, {kernel, false, 0}}, opts);
  const NodeId n = g.insert_between(x, y, graph::MaxPoolSpec{kernel, kernel});
  return finish(g, MorphKind::MaxPoolIns, n, rng, opts);
}

MorphOutcome apply_morph(Graph& g, const MorphSite& site, std::uint64_t init_seed, const MorphOptions& opts) {
  Rng rng(init_seed);
  switch (site.kind) {
    case MorphKind::Skip: return apply_skip(g, site.a, site.b, opts);
    case MorphKind::Deepen: return apply_deepen(g, site.a, site.b, site.hyper.kernel, site.hyper.padded, rng, opts);
    case MorphKind::Widen: return apply_widen(g, site.a, site.b, site.hyper.factor, rng, opts);
    case MorphKind::Merge: return apply_merge(g, site.a, site.b, rng, opts);
    case MorphKind::MaxPoolIns: return apply_maxpool(g, site.a, site.b, site.hyper.kernel, rng, opts);
    case MorphKind::LinearMorph: {
      MorphOutcome out;
      out.linear_resized = morph_linear(g, opts.init, rng);
      return out;
    }
  }
  throw MorphRejected("unknown morphism kind");
}

bool morph_linear(Graph& g, InitMode init, Rng& rng) {
  graph::ShapeOptions o;
  o.allow_flatten_resize = true;
  const auto shapes = graph::infer_shapes(g, o);
  const NodeId v = g.variable_linear();
  const std::size_t f_new = graph::flatten_size(g, shapes);
  auto spec = *spec_as<graph::LinearSpec>(g.spec(v));
  const std::size_t f_old = spec.in_dim;
  if (f_new == f_old) return false;
  const auto& old = g.linear_params(v);
  const std::size_t out = spec.out_dim;
  auto p = ndt::LinearParams::zeros(f_new, out);
  const std::size_t keep = std::min(f_old, f_new) * out;
  std::copy_n(old.weight.value.data().begin(), keep, p.weight.value.data().begin());
  if (f_new > f_old) fill_new(p.weight.value.data().subspan(keep), init, 0.0f, f_new, out, rng);
  p.bias = old.bias;
  spec.in_dim = f_new;
  g.update_node(v, spec, graph::LayerParams(std::move(p)));
  return true;
}

nlohmann::json to_json(const MorphLog& log) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : log.entries) {
    nlohmann::json j;
    j["kind"] = kind_name(e.site.kind);
    j["a"] = e.site.a.value;
    j["b"] = e.site.b.value;
    j["kernel"] = e.site.hyper.kernel;
    j["padded"] = e.site.hyper.padded;
    j["factor"] = e.site.hyper.factor;
    // Seeds are kept as strings: 64-bit values do not survive JSON doubles.
    j["init_seed"] = std::to_string(e.init_seed);
    j["draws"] = e.draws;
    j["linear_resized"] = e.linear_resized;
    entries.push_back(std::move(j));
  }
  return {{"init", init_mode_name(log.init)}, {"exhausted", log.exhausted}, {"entries", entries}};
}

MorphLog morph_log_from_json(const nlohmann::json& j) {
  MorphLog log;
  try {
    const auto init = parse_init_mode(j.at("init").get<std::string>());
    if (!init) throw InputError("unknown init mode in morph log");
    log.init = *init;
    log.exhausted = j.at("exhausted").get<bool>();
    for (const auto& e : j.at("entries")) {
      MorphLogEntry entry;
      const auto kind = parse_kind(e.at("kind").get<std::string>());
      if (!kind) throw InputError("unknown morphism kind in morph log");
      entry.site.kind = *kind;
      entry.site.a = NodeId{e.at("a").get<std::uint32_t>()};
      entry.site.b = NodeId{e.at("b").get<std::uint32_t>()};
      entry.site.hyper = {e.at("kernel").get<std::size_t>(), e.at("padded").get<bool>(),
                          e.at("factor").get<std::size_t>()};
      entry.init_seed = std::stoull(e.at("init_seed").get<std::string>());
      entry.draws = e.at("draws").get<std::uint64_t>();
      entry.linear_resized = e.at("linear_resized").get<bool>();
      log.entries.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed morph log: ") + e.what());
  } catch (const std::logic_error& e) {
    throw InputError(std::string("malformed morph log: ") + e.what());
  }
  return log;
}

std::string kinds_summary(const MorphLog& log) {
  std::string out;
  for (const auto& e : log.entries) {
    if (!out.empty()) out += '+';
    out += kind_name(e.site.kind);
    if (e.linear_resized) out += "+linear";
  }
  return out;
}

MorphResult random_morph_sequence(const Graph& parent, std::size_t n_nm, Rng& rng, const MorphOptions& opts) {
  if (n_nm == 0) throw InputError("n_NM must be at least 1");
  MorphResult r{parent, MorphLog{opts.init, {}, false}};
  for (std::size_t step = 0; step < n_nm; ++step) {
    CountingEngine<Rng> counted(rng);
    std::vector<MorphKind> remaining(kSampledKinds.begin(), kSampledKinds.end());
    std::optional<MorphSite> chosen;
    while (!remaining.empty() && !chosen) {
      const std::size_t ki = uniform_index(counted, remaining.size());
      const MorphKind kind = remaining[ki];
      const MorphHyper hyper = sample_hyper(kind, counted);
      const auto sites = enumerate_sites(r.child, kind, hyper, opts);
      if (sites.empty()) {
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(ki));
        continue;
      }
      chosen = sites[uniform_index(counted, sites.size())];
    }
    if (!chosen) {
      r.log.exhausted = true;
      break;
    }
    const std::uint64_t init_seed = counted();
    const MorphOutcome out = apply_morph(r.child, *chosen, init_seed, opts);
    r.log.entries.push_back(MorphLogEntry{*chosen, init_seed, counted.count(), out.linear_resized});
  }
  return r;
}

Graph replay(const Graph& parent, const MorphLog& log, const MorphOptions& opts) {
  Graph g = parent;
  MorphOptions o = opts;
  o.init = log.init;
  for (const auto& e : log.entries) apply_morph(g, e.site, e.init_seed, o);
  return g;
}

}  // namespace hcnas::morph
