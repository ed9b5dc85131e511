/* Copyright 2026 The IFA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ifa/ops.hpp"

#include <algorithm>
#include <cmath>

namespace ifa {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

int normalize_axis(int axis, int rank, const Shape& shape) {
  int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for shape " + to_string(shape));
  }
  return a;
}

template <typename Backward>
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::initializer_list<Tensor> inputs, Backward&& fn) {
  return record_op(op, std::move(shape), std::move(value), inputs, std::forward<Backward>(fn));
}

// Strides of `b` broadcast against `a` (0 where b's extent is 1).
std::vector<Index> broadcast_strides(const Shape& a, const Shape& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": cannot broadcast " + to_string(b) + " onto " +
                         to_string(a));
  }
  std::vector<Index> strides(a.size(), 0);
  Index stride = 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (b[i] != a[i] && b[i] != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + to_string(b) + " onto " +
                           to_string(a));
    }
    strides[i] = b[i] == 1 ? 0 : stride;
    stride *= b[i];
  }
  return strides;
}

// Calls fn(ia, ib) for every flat index ia of shape `a` and its broadcast
// partner ib in b.
template <typename Fn>
void for_each_broadcast(const Shape& a, const std::vector<Index>& bstrides, Fn&& fn) {
  const std::size_t r = a.size();
  const Index n = numel(a);
  if (r == 0) {
    if (n == 1) fn(Index{0}, Index{0});
    return;
  }
  // Innermost dimension runs as a tight loop.
  const Index inner = a[r - 1];
  const Index inner_stride = bstrides[r - 1];
  std::vector<Index> idx(r, 0);
  Index ib_base = 0;
  for (Index ia = 0; ia < n; ia += inner) {
    for (Index j = 0; j < inner; ++j) fn(ia + j, ib_base + j * inner_stride);
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      ib_base += bstrides[d];
      if (idx[d] < a[d]) break;
      ib_base -= bstrides[d] * a[d];
      idx[d] = 0;
    }
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& t, Fwd fwd, Deriv deriv) {
  std::vector<double> out(t.values().begin(), t.values().end());
  for (double& v : out) v = fwd(v);
  NodePtr in = t.node();
  return make_result(op, t.shape(), std::move(out), {t}, [in, deriv](Node& self) {
    auto g = in->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * deriv(in->value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  NodePtr na = a.node(), nb = b.node();
  return make_result("add", a.shape(), std::move(out), {a, b}, [na, nb](Node& self) {
    for (NodePtr n : {na, nb}) {
      if (!n->requires_grad) continue;
      auto g = n->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor broadcast_add(const Tensor& a, const Tensor& b) {
  auto bstrides = broadcast_strides(a.shape(), b.shape(), "broadcast_add");
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for_each_broadcast(a.shape(), bstrides, [&](Index ia, Index ib) { out[ia] += bv[ib]; });
  NodePtr na = a.node(), nb = b.node();
  Shape shape = a.shape();
  return make_result("broadcast_add", a.shape(), std::move(out), {a, b},
                     [na, nb, bstrides, shape](Node& self) {
                       if (na->requires_grad) {
                         auto g = na->grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                       }
                       if (nb->requires_grad) {
                         auto g = nb->grad_buffer();
                         for_each_broadcast(shape, bstrides,
                                            [&](Index ia, Index ib) { g[ib] += self.grad[ia]; });
                       }
                     });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  auto bstrides = broadcast_strides(a.shape(), b.shape(), "multiply");
  std::vector<double> out(a.values().begin(), a.values().end());
  auto bv = b.values();
  for_each_broadcast(a.shape(), bstrides, [&](Index ia, Index ib) { out[ia] *= bv[ib]; });
  NodePtr na = a.node(), nb = b.node();
  Shape shape = a.shape();
  return make_result("multiply", a.shape(), std::move(out), {a, b},
                     [na, nb, bstrides, shape](Node& self) {
                       if (na->requires_grad) {
                         auto g = na->grad_buffer();
                         for_each_broadcast(shape, bstrides, [&](Index ia, Index ib) {
                           g[ia] += self.grad[ia] * nb->value[ib];
                         });
                       }
                       if (nb->requires_grad) {
                         auto g = nb->grad_buffer();
                         for_each_broadcast(shape, bstrides, [&](Index ia, Index ib) {
                           g[ib] += self.grad[ia] * na->value[ia];
                         });
                       }
                     });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()));
  }
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MatrixMap(out.data(), m, n).noalias() = a.matrix() * b.matrix();
  NodePtr na = a.node(), nb = b.node();
  return make_result("matmul", Shape{m, n}, std::move(out), {a, b},
                     [na, nb, m, k, n](Node& self) {
                       ConstMatrixMap g(self.grad.data(), m, n);
                       if (na->requires_grad) {
                         MatrixMap(na->grad_buffer().data(), m, k).noalias() +=
                             g * ConstMatrixMap(nb->value.data(), k, n).transpose();
                       }
                       if (nb->requires_grad) {
                         MatrixMap(nb->grad_buffer().data(), k, n).noalias() +=
                             ConstMatrixMap(na->value.data(), m, k).transpose() * g;
                       }
                     });
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding) {
  if (input.rank() != 3 || kernel.rank() != 4 || kernel.dim(1) != input.dim(0)) {
    throw DimensionError("conv2d: input " + to_string(input.shape()) + " incompatible with kernel " +
                         to_string(kernel.shape()));
  }
  if (stride < 1 || padding < 0) throw DimensionError("conv2d: stride must be >= 1, padding >= 0");
  const Index cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Index cout = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  if (h + 2 * padding < kh || w + 2 * padding < kw) {
    throw DimensionError("conv2d: kernel " + to_string(kernel.shape()) +
                         " larger than padded input " + to_string(input.shape()));
  }
  const Index oh = (h + 2 * padding - kh) / stride + 1;
  const Index ow = (w + 2 * padding - kw) / stride + 1;
  const Index rows = cin * kh * kw, cols = oh * ow;

  // im2col: one column per output pixel.
  auto col = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows * cols), 0.0);
  auto in = input.values();
  for (Index c = 0; c < cin; ++c) {
    for (Index i = 0; i < kh; ++i) {
      for (Index j = 0; j < kw; ++j) {
        double* dst = col->data() + ((c * kh + i) * kw + j) * cols;
        for (Index y = 0; y < oh; ++y) {
          const Index iy = y * stride - padding + i;
          if (iy < 0 || iy >= h) continue;
          const double* src = in.data() + (c * h + iy) * w;
          for (Index x = 0; x < ow; ++x) {
            const Index ix = x * stride - padding + j;
            if (ix >= 0 && ix < w) dst[y * ow + x] = src[ix];
          }
        }
      }
    }
  }

  std::vector<double> out(static_cast<std::size_t>(cout * cols));
  MatrixMap(out.data(), cout, cols).noalias() =
      ConstMatrixMap(kernel.values().data(), cout, rows) * ConstMatrixMap(col->data(), rows, cols);

  NodePtr ni = input.node(), nk = kernel.node();
  return make_result(
      "conv2d", Shape{cout, oh, ow}, std::move(out), {input, kernel},
      [=](Node& self) {
        ConstMatrixMap g(self.grad.data(), cout, cols);
        if (nk->requires_grad) {
          MatrixMap(nk->grad_buffer().data(), cout, rows).noalias() +=
              g * ConstMatrixMap(col->data(), rows, cols).transpose();
        }
        if (ni->requires_grad) {
          RowMatrix dcol = ConstMatrixMap(nk->value.data(), cout, rows).transpose() * g;
          auto gi = ni->grad_buffer();
          for (Index c = 0; c < cin; ++c) {
            for (Index i = 0; i < kh; ++i) {
              for (Index j = 0; j < kw; ++j) {
                const double* src = dcol.data() + ((c * kh + i) * kw + j) * cols;
                for (Index y = 0; y < oh; ++y) {
                  const Index iy = y * stride - padding + i;
                  if (iy < 0 || iy >= h) continue;
                  double* dst = gi.data() + (c * h + iy) * w;
                  for (Index x = 0; x < ow; ++x) {
                    const Index ix = x * stride - padding + j;
                    if (ix >= 0 && ix < w) dst[ix] += src[y * ow + x];
                  }
                }
              }
            }
          }
        }
      });
}

Tensor relu(const Tensor& t) {
  return unary(
      "relu", t, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& t) {
  return unary(
      "tanh", t, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& t) {
  return unary(
      "sigmoid", t,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& t) {
  return unary(
      "exp", t, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& t) {
  return unary(
      "log", t, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor softmax(const Tensor& t, int axis) {
  const Shape& shape = t.shape();
  const int a = normalize_axis(axis, t.rank(), shape);
  Index outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= shape[i];
  for (int i = a + 1; i < t.rank(); ++i) inner *= shape[i];
  const Index n = shape[a];

  std::vector<double> out(t.values().begin(), t.values().end());
  for (Index o = 0; o < outer; ++o) {
    for (Index in = 0; in < inner; ++in) {
      double* base = out.data() + o * n * inner + in;
      double mx = base[0];
      for (Index k = 1; k < n; ++k) mx = std::max(mx, base[k * inner]);
      double z = 0.0;
      for (Index k = 0; k < n; ++k) {
        base[k * inner] = std::exp(base[k * inner] - mx);
        z += base[k * inner];
      }
      for (Index k = 0; k < n; ++k) base[k * inner] /= z;
    }
  }
  NodePtr nt = t.node();
  return make_result("softmax", shape, std::move(out), {t}, [nt, outer, inner, n](Node& self) {
    auto g = nt->grad_buffer();
    for (Index o = 0; o < outer; ++o) {
      for (Index in = 0; in < inner; ++in) {
        const Index off = o * n * inner + in;
        double dot = 0.0;
        for (Index k = 0; k < n; ++k) dot += self.grad[off + k * inner] * self.value[off + k * inner];
        for (Index k = 0; k < n; ++k) {
          const Index i = off + k * inner;
          g[i] += self.value[i] * (self.grad[i] - dot);
        }
      }
    }
  });
}

Tensor sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  NodePtr nt = t.node();
  return make_result("sum", Shape{}, {s}, {t}, [nt](Node& self) {
    auto g = nt->grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor sum(const Tensor& t, int axis) {
  const Shape& shape = t.shape();
  const int a = normalize_axis(axis, t.rank(), shape);
  Index outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= shape[i];
  for (int i = a + 1; i < t.rank(); ++i) inner *= shape[i];
  const Index n = shape[a];
  Shape out_shape = shape;
  out_shape.erase(out_shape.begin() + a);

  std::vector<double> out(static_cast<std::size_t>(outer * inner), 0.0);
  auto v = t.values();
  for (Index o = 0; o < outer; ++o)
    for (Index k = 0; k < n; ++k)
      for (Index in = 0; in < inner; ++in) out[o * inner + in] += v[(o * n + k) * inner + in];

  NodePtr nt = t.node();
  return make_result("sum_axis", out_shape, std::move(out), {t}, [nt, outer, inner, n](Node& self) {
    auto g = nt->grad_buffer();
    for (Index o = 0; o < outer; ++o)
      for (Index k = 0; k < n; ++k)
        for (Index in = 0; in < inner; ++in) g[(o * n + k) * inner + in] += self.grad[o * inner + in];
  });
}

Tensor reshape(const Tensor& t, Shape shape) {
  if (numel(shape) != t.size()) {
    throw DimensionError("reshape: cannot view " + to_string(t.shape()) + " as " + to_string(shape));
  }
  std::vector<double> out(t.values().begin(), t.values().end());
  NodePtr nt = t.node();
  return make_result("reshape", std::move(shape), std::move(out), {t}, [nt](Node& self) {
    auto g = nt->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor transpose(const Tensor& t) {
  if (t.rank() != 2) throw DimensionError("transpose: needs rank 2, got " + to_string(t.shape()));
  const Index r = t.dim(0), c = t.dim(1);
  std::vector<double> out(static_cast<std::size_t>(r * c));
  MatrixMap(out.data(), c, r) = t.matrix().transpose();
  NodePtr nt = t.node();
  return make_result("transpose", Shape{c, r}, std::move(out), {t}, [nt, r, c](Node& self) {
    MatrixMap(nt->grad_buffer().data(), r, c) += ConstMatrixMap(self.grad.data(), c, r).transpose();
  });
}

Tensor slice(const Tensor& t, int axis, Index begin, Index end) {
  const Shape& shape = t.shape();
  const int a = normalize_axis(axis, t.rank(), shape);
  if (begin < 0 || end > shape[a] || begin >= end) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for axis " + std::to_string(a) + " of " + to_string(shape));
  }
  Index outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= shape[i];
  for (int i = a + 1; i < t.rank(); ++i) inner *= shape[i];
  const Index n = shape[a], m = end - begin;
  Shape out_shape = shape;
  out_shape[a] = m;

  std::vector<double> out(static_cast<std::size_t>(outer * m * inner));
  auto v = t.values();
  for (Index o = 0; o < outer; ++o)
    std::copy_n(v.begin() + (o * n + begin) * inner, m * inner, out.begin() + o * m * inner);

  NodePtr nt = t.node();
  return make_result("slice", out_shape, std::move(out), {t},
                     [nt, outer, inner, n, m, begin](Node& self) {
                       auto g = nt->grad_buffer();
                       for (Index o = 0; o < outer; ++o)
                         for (Index i = 0; i < m * inner; ++i)
                           g[(o * n + begin) * inner + i] += self.grad[o * m * inner + i];
                     });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  const int a = normalize_axis(axis, static_cast<int>(first.size()), first);
  Shape out_shape = first;
  out_shape[a] = 0;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    if (s.size() != first.size()) throw DimensionError("concat: rank mismatch " + to_string(s));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != a && s[i] != first[i]) {
        throw DimensionError("concat: shape mismatch " + to_string(first) + " vs " + to_string(s));
      }
    }
    out_shape[a] += s[a];
  }
  Index outer = 1, inner = 1;
  for (int i = 0; i < a; ++i) outer *= first[i];
  for (int i = a + 1; i < static_cast<int>(first.size()); ++i) inner *= first[i];
  const Index total = out_shape[a];

  std::vector<double> out(static_cast<std::size_t>(numel(out_shape)));
  std::vector<NodePtr> nodes;
  std::vector<Index> offsets;
  Index offset = 0;
  bool tracked = false;
  for (const Tensor& p : parts) {
    const Index m = p.dim(a);
    auto v = p.values();
    for (Index o = 0; o < outer; ++o)
      std::copy_n(v.begin() + o * m * inner, m * inner, out.begin() + (o * total + offset) * inner);
    nodes.push_back(p.node());
    offsets.push_back(offset);
    offset += m;
    if (p.requires_grad() && p.node()->consumed) {
      throw GraphError("concat: input belongs to a graph that was already backpropagated");
    }
    tracked = tracked || p.requires_grad();
  }

  auto result = record_op("concat", out_shape, std::move(out), {}, nullptr);
  if (!grad_mode_enabled()) return result;
  auto node = result.node();
  if (tracked) {
    node->requires_grad = true;
    node->parents = nodes;
    node->backward_fn = [nodes, offsets, outer, inner, total, a](Node& self) {
      for (std::size_t p = 0; p < nodes.size(); ++p) {
        if (!nodes[p]->requires_grad) continue;
        const Index m = nodes[p]->shape[a];
        auto g = nodes[p]->grad_buffer();
        for (Index o = 0; o < outer; ++o)
          for (Index i = 0; i < m * inner; ++i)
            g[o * m * inner + i] += self.grad[(o * total + offsets[p]) * inner + i];
      }
    };
  }
  return result;
}

Tensor scale(const Tensor& t, double factor) {
  return multiply(t, Tensor(Shape(t.shape().size(), 1), factor));
}

Tensor log_softmax(const Tensor& t, int axis) { return log(softmax(t, axis)); }

}  // namespace ifa
