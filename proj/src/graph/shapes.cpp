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

#include "hcnas/graph/shapes.hpp"

#include "hcnas/ndt/kernels.hpp"

namespace hcnas::graph {

std::string to_string(const NodeShape& s) {
  return s.flat ? "(" + std::to_string(s.features) + ")" : to_string(s.image);
}

std::string_view shape_error_name(ShapeErrorKind k) {
  switch (k) {
    case ShapeErrorKind::AddMismatch: return "add-mismatch";
    case ShapeErrorKind::ConcatMismatch: return "concat-mismatch";
    case ShapeErrorKind::DegenerateSpatial: return "degenerate-spatial";
    case ShapeErrorKind::FcWidthExceeded: return "fc-width-exceeded";
    case ShapeErrorKind::ChannelMismatch: return "channel-mismatch";
    case ShapeErrorKind::LinearMismatch: return "linear-mismatch";
  }
  return "?";
}

std::optional<ImageShape> try_conv_output_shape(const ConvBlockSpec& spec, const ImageShape& in) {
  const std::size_t pad = spec.padded ? (spec.kernel - 1) / 2 : 0;
  const std::size_t h = in.height + 2 * pad, w = in.width + 2 * pad;
  if (spec.kernel == 0 || h < spec.kernel || w < spec.kernel) return std::nullopt;
  return ImageShape{spec.out_ch, h - spec.kernel + 1, w - spec.kernel + 1};
}

std::optional<ImageShape> try_pool_output_shape(const MaxPoolSpec& spec, const ImageShape& in) {
  if (spec.kernel == 0 || spec.stride == 0 || in.height < spec.kernel || in.width < spec.kernel) {
    return std::nullopt;
  }
  return ImageShape{in.channels, ndt::pooled_extent(in.height, spec.kernel, 0, spec.stride),
                    ndt::pooled_extent(in.width, spec.kernel, 0, spec.stride)};
}

ImageShape conv_output_shape(const ConvBlockSpec& spec, const ImageShape& in) {
  if (auto s = try_conv_output_shape(spec, in)) return *s;
  throw DegenerateShapeError("conv k=" + std::to_string(spec.kernel) + " on " + to_string(in) +
                             " leaves no output");
}

ImageShape pool_output_shape(const MaxPoolSpec& spec, const ImageShape& in) {
  if (auto s = try_pool_output_shape(spec, in)) return *s;
  throw DegenerateShapeError("maxpool k=" + std::to_string(spec.kernel) + " on " + to_string(in) +
                             " leaves no output");
}

ShapeResult try_infer_shapes(const Topology& topo, const ImageShape& input, std::size_t fc_width,
                             const ShapeOptions& options) {
  ShapeMap shapes;
  auto fail = [&](ShapeErrorKind kind, NodeId id, const std::string& detail) -> ShapeResult {
    return ShapeError{kind, id,
                      std::string(shape_error_name(kind)) + " at " + topo.display_name(id) + ": " + detail};
  };
  auto image_of = [&](NodeId id) -> const NodeShape& { return shapes.at(id); };

  for (NodeId id : topo.topo_order()) {
    const auto parents = topo.parents(id);
    const NodeSpec& spec = topo.spec(id);
    NodeShape out;
    if (parents.empty() && !std::holds_alternative<ConvBlockSpec>(spec)) {
      return fail(ShapeErrorKind::ChannelMismatch, id, "node has no input");
    }
    if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
      ImageShape in = input;
      if (!parents.empty()) {
        const NodeShape& p = image_of(parents[0]);
        if (p.flat) return fail(ShapeErrorKind::ChannelMismatch, id, "input is flat");
        in = p.image;
      }
      if (in.channels != c->in_ch) {
        return fail(ShapeErrorKind::ChannelMismatch, id,
                    "expects " + std::to_string(c->in_ch) + " channels, gets " + to_string(in));
      }
      auto o = try_conv_output_shape(*c, in);
      if (!o) return fail(ShapeErrorKind::DegenerateSpatial, id, "kernel does not fit " + to_string(in));
      out.image = *o;
    } else if (const auto* m = spec_as<MaxPoolSpec>(spec)) {
      const NodeShape& p = image_of(parents[0]);
      if (p.flat) return fail(ShapeErrorKind::ChannelMismatch, id, "input is flat");
      auto o = try_pool_output_shape(*m, p.image);
      if (!o) return fail(ShapeErrorKind::DegenerateSpatial, id, "window does not fit " + to_string(p.image));
      out.image = *o;
    } else if (const auto* cb = spec_as<CombineSpec>(spec)) {
      const NodeShape& first = image_of(parents[0]);
      if (first.flat) return fail(ShapeErrorKind::ChannelMismatch, id, "input is flat");
      out.image = first.image;
      for (std::size_t i = 1; i < parents.size(); ++i) {
        const NodeShape& p = image_of(parents[i]);
        if (cb->mode == ndt::CombineMode::Add) {
          if (p.flat || p.image != first.image) {
            return fail(ShapeErrorKind::AddMismatch, id, to_string(first) + " vs " + to_string(p));
          }
        } else {
          if (p.flat || p.image.height != first.image.height || p.image.width != first.image.width) {
            return fail(ShapeErrorKind::ConcatMismatch, id, to_string(first) + " vs " + to_string(p));
          }
          out.image.channels += p.image.channels;
        }
      }
    } else {
      const auto& l = std::get<LinearSpec>(spec);
      const NodeShape& p = image_of(parents[0]);
      out.flat = true;
      out.features = l.out_dim;
      if (l.is_variable) {
        if (p.flat) return fail(ShapeErrorKind::LinearMismatch, id, "variable layer needs an image input");
        const std::size_t f = p.image.size();
        if (options.strict_fc_cap && f > fc_width) {
          return fail(ShapeErrorKind::FcWidthExceeded, id,
                      "flatten size " + std::to_string(f) + " exceeds " + std::to_string(fc_width));
        }
        if (f != l.in_dim && !options.allow_flatten_resize) {
          return fail(ShapeErrorKind::LinearMismatch, id,
                      "flatten size " + std::to_string(f) + " but in_dim " + std::to_string(l.in_dim));
        }
      } else if (!p.flat || p.features != l.in_dim) {
        return fail(ShapeErrorKind::LinearMismatch, id,
                    "input " + to_string(p) + " but in_dim " + std::to_string(l.in_dim));
      }
    }
    shapes.emplace(id, out);
  }
  return shapes;
}

ShapeMap infer_shapes(const Graph& g, const ShapeOptions& options) {
  auto r = try_infer_shapes(g.topology(), g.input_shape(), g.fc_width(), options);
  if (auto* e = std::get_if<ShapeError>(&r)) throw ShapeInferenceError(std::move(*e));
  return std::get<ShapeMap>(std::move(r));
}

std::size_t flatten_size(const Graph& g, const ShapeMap& shapes) {
  return shapes.at(g.parents(g.variable_linear())[0]).size();
}

}  // namespace hcnas::graph
