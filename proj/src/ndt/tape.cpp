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

#include "hcnas/ndt/tape.hpp"

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "hcnas/ndt/kernels.hpp"

namespace hcnas::ndt {

template <typename T>
Var BasicTape<T>::push(TensorT value, Backward bw) {
  nodes_.push_back(Node{std::move(value), TensorT{}, std::move(bw)});
  return Var{nodes_.size() - 1};
}

template <typename T>
auto BasicTape<T>::node(Var v) const -> const Node& {
  if (!v.valid() || v.index >= nodes_.size()) throw UsageError("variable is not on this tape");
  return nodes_[v.index];
}

template <typename T>
auto BasicTape<T>::grad_slot(Var v) -> TensorT& {
  Node& n = nodes_[v.index];
  if (n.grad.empty()) n.grad = TensorT(n.value.shape());
  return n.grad;
}

template <typename T>
void BasicTape<T>::mix(std::uint64_t v) {
  decisions_ ^= v;
  decisions_ *= 1099511628211ull;
}

template <typename T>
Var BasicTape<T>::constant(TensorT value) {
  return push(std::move(value), nullptr);
}

template <typename T>
Var BasicTape<T>::conv_block(Var xv, BasicConvParams<T>& p, bool padded, bool training) {
  const TensorT& x = node(xv).value;
  if (x.rank() != 4 || x.dim(1) != p.in_channels()) {
    throw DimensionError("conv block expects " + std::to_string(p.in_channels()) +
                         " input channels, got input " + to_string(x.shape()));
  }
  const ConvGeometry g = conv_geometry(x.shape(), p.out_channels(), p.kernel(), padded);
  const Shape out_shape{g.batch, g.out_ch, g.out_h, g.out_w};
  TensorT z(out_shape);
  conv2d_forward<T>(g, x.ptr(), p.weight.value.ptr(), p.bias.value.ptr(), z.ptr());

  TensorT y(out_shape);
  TensorT xhat(out_shape);
  TensorT invstd({g.out_ch});
  if (training) {
    batchnorm_train_forward<T>(g.batch, g.out_ch, g.out_plane(), z.ptr(), p.gamma.value.ptr(),
                               p.beta.value.ptr(), y.ptr(), xhat.ptr(), invstd.ptr(),
                               p.running_mean.ptr(), p.running_var.ptr());
  } else {
    batchnorm_eval_forward<T>(g.batch, g.out_ch, g.out_plane(), z.ptr(), p.gamma.value.ptr(),
                              p.beta.value.ptr(), p.running_mean.ptr(), p.running_var.ptr(),
                              y.ptr(), xhat.ptr(), invstd.ptr());
  }
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  if (track_) {
    for (auto v : y.data()) mix(v > T{0});
  }
  register_param(p.weight);
  register_param(p.bias);
  register_param(p.gamma);
  register_param(p.beta);

  // ReLU mask comes from this node's own output.
  const std::size_t self = nodes_.size();
  return push(std::move(y), [xv, g, self, &p, xhat = std::move(xhat), invstd = std::move(invstd),
                             training](BasicTape& tape, const TensorT& dy) {
    const TensorT& out = tape.nodes_[self].value;
    TensorT dbn(out.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dbn[i] = out[i] > T{0} ? dy[i] : T{0};
    TensorT dz(out.shape());
    batchnorm_backward<T>(g.batch, g.out_ch, g.out_plane(), dbn.ptr(), xhat.ptr(),
                          p.gamma.value.ptr(), invstd.ptr(), training, dz.ptr(),
                          p.gamma.grad.ptr(), p.beta.grad.ptr());
    const TensorT& x = tape.nodes_[xv.index].value;
    TensorT dx(x.shape());
    conv2d_backward<T>(g, x.ptr(), p.weight.value.ptr(), dz.ptr(), dx.ptr(), p.weight.grad.ptr(),
                       p.bias.grad.ptr());
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
  });
}

template <typename T>
Var BasicTape<T>::maxpool(Var xv, std::size_t kernel, std::size_t stride) {
  const TensorT& x = node(xv).value;
  const PoolGeometry g = pool_geometry(x.shape(), kernel, stride);
  TensorT y({g.batch, g.channels, g.out_h, g.out_w});
  std::vector<std::uint32_t> argmax(y.size());
  ndt::maxpool_forward<T>(g, x.ptr(), y.ptr(), argmax.data());
  if (track_) {
    for (auto a : argmax) mix(a);
  }
  return push(std::move(y), [xv, g, argmax = std::move(argmax)](BasicTape& tape, const TensorT& dy) {
    TensorT dx(tape.nodes_[xv.index].value.shape());
    maxpool_backward<T>(g, dy.ptr(), argmax.data(), dx.ptr());
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
  });
}

template <typename T>
Var BasicTape<T>::linear(Var xv, BasicLinearParams<T>& p) {
  const TensorT& x = node(xv).value;
  if (x.rank() != 2 || x.dim(1) != p.in_dim()) {
    throw DimensionError("linear expects [N," + std::to_string(p.in_dim()) + "] input, got " +
                         to_string(x.shape()));
  }
  const std::size_t n = x.dim(0);
  const std::size_t f = p.in_dim();
  const std::size_t o = p.out_dim();
  TensorT y({n, o});
  ndt::linear_forward<T>(n, f, o, x.ptr(), p.weight.value.ptr(), p.bias.value.ptr(), y.ptr());
  register_param(p.weight);
  register_param(p.bias);
  return push(std::move(y), [xv, n, f, o, &p](BasicTape& tape, const TensorT& dy) {
    const TensorT& x = tape.nodes_[xv.index].value;
    TensorT dx(x.shape());
    linear_backward<T>(n, f, o, x.ptr(), p.weight.value.ptr(), dy.ptr(), dx.ptr(),
                       p.weight.grad.ptr(), p.bias.grad.ptr());
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
  });
}

template <typename T>
Var BasicTape<T>::relu(Var xv) {
  TensorT y = node(xv).value;
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  if (track_) {
    for (auto v : y.data()) mix(v > T{0});
  }
  const std::size_t self = nodes_.size();
  return push(std::move(y), [xv, self](BasicTape& tape, const TensorT& dy) {
    const TensorT& out = tape.nodes_[self].value;
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += out[i] > T{0} ? dy[i] : T{0};
  });
}

template <typename T>
Var BasicTape<T>::flatten(Var xv) {
  const TensorT& x = node(xv).value;
  const std::size_t n = x.dim(0);
  TensorT y = x.reshaped({n, x.size() / n});
  return push(std::move(y), [xv](BasicTape& tape, const TensorT& dy) {
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dy[i];
  });
}

template <typename T>
Var BasicTape<T>::combine(std::span<const Var> inputs, CombineMode mode) {
  if (inputs.empty()) throw MergeError("combine needs at least one input");
  std::vector<Var> ins(inputs.begin(), inputs.end());
  const Shape& first = node(ins[0]).value.shape();
  if (mode == CombineMode::Add) {
    TensorT y = node(ins[0]).value;
    for (std::size_t i = 1; i < ins.size(); ++i) {
      const TensorT& xi = node(ins[i]).value;
      if (xi.shape() != first) {
        throw MergeError("add inputs differ: " + to_string(first) + " vs " + to_string(xi.shape()));
      }
      for (std::size_t j = 0; j < y.size(); ++j) y[j] += xi[j];
    }
    return push(std::move(y), [ins](BasicTape& tape, const TensorT& dy) {
      for (Var v : ins) {
        TensorT& gx = tape.grad_slot(v);
        for (std::size_t j = 0; j < gx.size(); ++j) gx[j] += dy[j];
      }
    });
  }

  if (first.size() != 4) throw MergeError("concat expects N,C,H,W inputs, got " + to_string(first));
  std::size_t channels = 0;
  for (Var v : ins) {
    const Shape& s = node(v).value.shape();
    if (s.size() != 4 || s[0] != first[0] || s[2] != first[2] || s[3] != first[3]) {
      throw MergeError("concat inputs differ in N,H,W: " + to_string(first) + " vs " + to_string(s));
    }
    channels += s[1];
  }
  const std::size_t n = first[0];
  const std::size_t plane = first[2] * first[3];
  TensorT y({n, channels, first[2], first[3]});
  std::size_t offset = 0;
  for (Var v : ins) {
    const TensorT& xi = node(v).value;
    const std::size_t block = xi.dim(1) * plane;
    for (std::size_t b = 0; b < n; ++b) {
      std::copy_n(xi.ptr() + b * block, block, y.ptr() + (b * channels + offset) * plane);
    }
    offset += xi.dim(1);
  }
  return push(std::move(y), [ins, n, channels, plane](BasicTape& tape, const TensorT& dy) {
    std::size_t offset = 0;
    for (Var v : ins) {
      TensorT& gx = tape.grad_slot(v);
      const std::size_t c = gx.dim(1);
      const std::size_t block = c * plane;
      for (std::size_t b = 0; b < n; ++b) {
        const T* src = dy.ptr() + (b * channels + offset) * plane;
        T* dst = gx.ptr() + b * block;
        for (std::size_t j = 0; j < block; ++j) dst[j] += src[j];
      }
      offset += c;
    }
  });
}

template <typename T>
Var BasicTape<T>::cross_entropy(Var lv, std::span<const int> labels) {
  const TensorT& logits = node(lv).value;
  if (logits.rank() != 2) throw DimensionError("cross entropy expects [N,K] logits, got " + to_string(logits.shape()));
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.dim(1);
  TensorT probs({n, k});
  const T loss = softmax_cross_entropy<T>(n, k, logits.ptr(), labels, probs.ptr());
  std::vector<int> lab(labels.begin(), labels.end());
  return push(TensorT({1}, std::vector<T>{loss}),
              [lv, n, k, probs = std::move(probs), lab = std::move(lab)](BasicTape& tape, const TensorT& dy) {
                TensorT& gx = tape.grad_slot(lv);
                const T scale = dy[0] / static_cast<T>(n);
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < k; ++j) {
                    const T target = static_cast<int>(j) == lab[i] ? T{1} : T{0};
                    gx[i * k + j] += scale * (probs[i * k + j] - target);
                  }
                }
              });
}

template <typename T>
Var BasicTape<T>::dot(Var xv, const TensorT& weights) {
  const TensorT& x = node(xv).value;
  if (x.size() != weights.size()) throw DimensionError("dot operands differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(x[i]) * weights[i];
  return push(TensorT({1}, std::vector<T>{static_cast<T>(s)}), [xv, weights](BasicTape& tape, const TensorT& dy) {
    TensorT& gx = tape.grad_slot(xv);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dy[0] * weights[i];
  });
}

template <typename T>
auto BasicTape<T>::value(Var v) const -> const TensorT& {
  return node(v).value;
}

template <typename T>
auto BasicTape<T>::grad(Var v) const -> TensorT {
  const Node& n = node(v);
  return n.grad.empty() ? TensorT(n.value.shape()) : n.grad;
}

template <typename T>
auto BasicTape<T>::take(Var v) -> TensorT {
  node(v);
  return std::move(nodes_[v.index].value);
}

template <typename T>
void BasicTape<T>::backward(Var root) {
  if (nodes_.empty()) throw UsageError("backward called before any forward was recorded");
  const Node& r = node(root);
  if (r.value.size() != 1) throw UsageError("backward root must be a scalar, got " + to_string(r.value.shape()));

  std::unordered_set<ParamT*> seen;
  for (ParamT* p : params_) {
    if (seen.insert(p).second) p->zero_grad();
  }
  for (Node& n : nodes_) n.grad = TensorT{};
  grad_slot(root)[0] = T{1};

  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

template <typename T>
void BasicTape<T>::clear() {
  nodes_.clear();
  params_.clear();
  decisions_ = 1469598103934665603ull;
}

template <typename T>
BasicTensor<T> conv_block_forward(const BasicTensor<T>& input, BasicConvParams<T>& params,
                                  bool padded, bool training) {
  BasicTape<T> tape;
  return tape.take(tape.conv_block(tape.constant(input), params, padded, training));
}

template <typename T>
BasicTensor<T> maxpool_forward(const BasicTensor<T>& input, std::size_t kernel, std::size_t stride) {
  BasicTape<T> tape;
  return tape.take(tape.maxpool(tape.constant(input), kernel, stride));
}

template <typename T>
BasicTensor<T> linear_forward(const BasicTensor<T>& input, BasicLinearParams<T>& params) {
  BasicTape<T> tape;
  return tape.take(tape.linear(tape.constant(input), params));
}

template <typename T>
BasicTensor<T> combine_forward(std::span<const BasicTensor<T>> inputs, CombineMode mode) {
  BasicTape<T> tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return tape.take(tape.combine(vars, mode));
}

template <typename T>
T cross_entropy_loss(const BasicTensor<T>& logits, std::span<const int> labels) {
  BasicTape<T> tape;
  return tape.value(tape.cross_entropy(tape.constant(logits), labels))[0];
}

template class BasicTape<float>;
template class BasicTape<double>;

#define HCNAS_INSTANTIATE(T)                                                                     \
  template BasicTensor<T> conv_block_forward<T>(const BasicTensor<T>&, BasicConvParams<T>&,      \
                                                bool, bool);                                     \
  template BasicTensor<T> maxpool_forward<T>(const BasicTensor<T>&, std::size_t, std::size_t);   \
  template BasicTensor<T> linear_forward<T>(const BasicTensor<T>&, BasicLinearParams<T>&);       \
  template BasicTensor<T> combine_forward<T>(std::span<const BasicTensor<T>>, CombineMode);      \
  template T cross_entropy_loss<T>(const BasicTensor<T>&, std::span<const int>);

HCNAS_INSTANTIATE(float)
HCNAS_INSTANTIATE(double)

#undef HCNAS_INSTANTIATE

}  // namespace hcnas::ndt
