#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "chemception/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chemception {

// Reverse-mode graph. Nodes are created in topological order by
// construction, so forward() replays the creation order and backward()
// walks it in reverse. The graph is built once per network; per batch the
// input placeholder is rewritten and forward() re-runs every op with
// whatever batch dimension it finds.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = false;
  std::string name;
  std::function<void()> fwd;
  std::function<void()> bwd;
};

template <typename T>
using NodeRef = std::shared_ptr<Node<T>>;

template <typename T>
using MatMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap = Eigen::Map<
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Column-extraction for NHWC convolution windows: one row per output site,
// one column per (kh, kw, c) tap. Shared by conv forward and both backward
// passes, which recompute it rather than keep it alive.
template <typename T>
void im2col(const Tensor<T>& x, int kh, int kw, int stride, Padding pad,
            std::vector<T>& cols) {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int oh = conv_out_dim(h, kh, stride, pad);
  const int ow = conv_out_dim(w, kw, stride, pad);
  const int plo_h = pad_low(h, kh, stride, pad);
  const int plo_w = pad_low(w, kw, stride, pad);
  const std::int64_t row_len = static_cast<std::int64_t>(kh) * kw * c;
  cols.assign(static_cast<std::size_t>(n) * oh * ow * row_len, T(0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < n; ++b) {
    const T* xb = x.data.data() + static_cast<std::int64_t>(b) * h * w * c;
    T* rb = cols.data() + static_cast<std::int64_t>(b) * oh * ow * row_len;
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        T* row = rb + (static_cast<std::int64_t>(i) * ow + j) * row_len;
        for (int ki = 0; ki < kh; ++ki) {
          const int yi = i * stride - plo_h + ki;
          if (yi < 0 || yi >= h) continue;
          for (int kj = 0; kj < kw; ++kj) {
            const int xj = j * stride - plo_w + kj;
            if (xj < 0 || xj >= w) continue;
            const T* src = xb + (static_cast<std::int64_t>(yi) * w + xj) * c;
            T* dst = row + (static_cast<std::int64_t>(ki) * kw + kj) * c;
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
}

// Scatter-add the column gradient back onto the input image.
template <typename T>
void col2im(const std::vector<T>& cols, int kh, int kw, int stride, Padding pad,
            Tensor<T>& dx) {
  const int n = dx.dim(0), h = dx.dim(1), w = dx.dim(2), c = dx.dim(3);
  const int oh = conv_out_dim(h, kh, stride, pad);
  const int ow = conv_out_dim(w, kw, stride, pad);
  const int plo_h = pad_low(h, kh, stride, pad);
  const int plo_w = pad_low(w, kw, stride, pad);
  const std::int64_t row_len = static_cast<std::int64_t>(kh) * kw * c;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < n; ++b) {
    T* xb = dx.data.data() + static_cast<std::int64_t>(b) * h * w * c;
    const T* rb = cols.data() + static_cast<std::int64_t>(b) * oh * ow * row_len;
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        const T* row = rb + (static_cast<std::int64_t>(i) * ow + j) * row_len;
        for (int ki = 0; ki < kh; ++ki) {
          const int yi = i * stride - plo_h + ki;
          if (yi < 0 || yi >= h) continue;
          for (int kj = 0; kj < kw; ++kj) {
            const int xj = j * stride - plo_w + kj;
            if (xj < 0 || xj >= w) continue;
            T* dst = xb + (static_cast<std::int64_t>(yi) * w + xj) * c;
            const T* src = row + (static_cast<std::int64_t>(ki) * kw + kj) * c;
            for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
          }
        }
      }
    }
  }
}

template <typename T>
class Graph {
 public:
  NodeRef<T> input(std::vector<int> shape, std::string name = "input") {
    auto n = make(std::move(name));
    n->value = Tensor<T>(std::move(shape));
    return n;
  }

  NodeRef<T> param(Tensor<T> init, std::string name) {
    auto n = make(std::move(name));
    n->value = std::move(init);
    n->trainable = true;
    return n;
  }

  // ---- ops ----

  NodeRef<T> conv2d(NodeRef<T> x, NodeRef<T> w, NodeRef<T> b, int stride,
                    Padding pad, std::string name = "conv") {
    auto n = make(std::move(name), {x, w, b});
    Node<T>* self = n.get();
    n->fwd = [self, x, w, b, stride, pad] {
      const auto& xs = x->value.shape;
      const auto& ws = w->value.shape;
      if (xs.size() != 4 || ws.size() != 4)
        throw ShapeMismatch(self->name + ": conv2d wants NHWC input and kernel");
      if (xs[3] != ws[2])
        throw ShapeMismatch(self->name + ": input channels " +
                            std::to_string(xs[3]) + " != kernel c_in " +
                            std::to_string(ws[2]));
      if (b->value.size() != ws[3])
        throw ShapeMismatch(self->name + ": bias length != c_out");
      const int kh = ws[0], kw = ws[1], cin = ws[2], cout = ws[3];
      const int oh = conv_out_dim(xs[1], kh, stride, pad);
      const int ow = conv_out_dim(xs[2], kw, stride, pad);
      self->value = Tensor<T>({xs[0], oh, ow, cout});
      std::vector<T> cols;
      im2col(x->value, kh, kw, stride, pad, cols);
      const std::int64_t rows = static_cast<std::int64_t>(xs[0]) * oh * ow;
      const std::int64_t taps = static_cast<std::int64_t>(kh) * kw * cin;
      ConstMatMap<T> A(cols.data(), rows, taps);
      ConstMatMap<T> W(w->value.data.data(), taps, cout);
      MatMap<T> O(self->value.data.data(), rows, cout);
      O.noalias() = A * W;
      ConstMatMap<T> bias(b->value.data.data(), 1, cout);
      O.rowwise() += bias.row(0);
    };
    n->bwd = [self, x, w, b, stride, pad] {
      const auto& xs = x->value.shape;
      const auto& ws = w->value.shape;
      const int kh = ws[0], kw = ws[1], cin = ws[2], cout = ws[3];
      const int oh = self->value.dim(1), ow = self->value.dim(2);
      const std::int64_t rows = static_cast<std::int64_t>(xs[0]) * oh * ow;
      const std::int64_t taps = static_cast<std::int64_t>(kh) * kw * cin;
      ConstMatMap<T> dO(self->grad.data.data(), rows, cout);
      // bias
      MatMap<T> dB(b->grad.data.data(), 1, cout);
      dB.row(0) += dO.colwise().sum();
      // weights: cols^T * dO
      std::vector<T> cols;
      im2col(x->value, kh, kw, stride, pad, cols);
      ConstMatMap<T> A(cols.data(), rows, taps);
      MatMap<T> dW(w->grad.data.data(), taps, cout);
      dW.noalias() += A.transpose() * dO;
      // input: scatter dO * W^T
      std::vector<T> dcols(cols.size());
      MatMap<T> dA(dcols.data(), rows, taps);
      ConstMatMap<T> W(w->value.data.data(), taps, cout);
      dA.noalias() = dO * W.transpose();
      col2im(dcols, kh, kw, stride, pad, x->grad);
    };
    return n;
  }

  NodeRef<T> relu(NodeRef<T> x, std::string name = "relu") {
    auto n = make(std::move(name), {x});
    Node<T>* self = n.get();
    n->fwd = [self, x] {
      self->value.shape = x->value.shape;
      self->value.data.resize(x->value.data.size());
      for (std::size_t i = 0; i < x->value.data.size(); ++i)
        self->value.data[i] = std::max(x->value.data[i], T(0));
    };
    n->bwd = [self, x] {
      for (std::size_t i = 0; i < x->value.data.size(); ++i)
        if (x->value.data[i] > T(0)) x->grad.data[i] += self->grad.data[i];
    };
    return n;
  }

  NodeRef<T> max_pool(NodeRef<T> x, int k, int stride, Padding pad,
                      std::string name = "maxpool") {
    auto n = make(std::move(name), {x});
    Node<T>* self = n.get();
    auto argmax = std::make_shared<std::vector<std::int64_t>>();
    n->fwd = [self, x, k, stride, pad, argmax] {
      pool_forward(*self, *x, k, stride, pad, /*is_max=*/true, argmax.get());
    };
    n->bwd = [self, x, argmax] {
      for (std::size_t i = 0; i < argmax->size(); ++i) {
        std::int64_t src = (*argmax)[i];
        if (src >= 0) x->grad.data[static_cast<std::size_t>(src)] += self->grad.data[i];
      }
    };
    return n;
  }

  NodeRef<T> avg_pool(NodeRef<T> x, int k, int stride, Padding pad,
                      std::string name = "avgpool") {
    auto n = make(std::move(name), {x});
    Node<T>* self = n.get();
    n->fwd = [self, x, k, stride, pad] {
      pool_forward(*self, *x, k, stride, pad, /*is_max=*/false, nullptr);
    };
    n->bwd = [self, x, k, stride, pad] {
      pool_backward_avg(*self, *x, k, stride, pad);
    };
    return n;
  }

  NodeRef<T> concat_channels(std::vector<NodeRef<T>> xs,
                             std::string name = "concat") {
    if (xs.empty()) throw ShapeMismatch("concat of nothing");
    auto n = make(std::move(name), xs);
    Node<T>* self = n.get();
    n->fwd = [self, xs] {
      const auto& first = xs[0]->value.shape;
      if (first.size() != 4) throw ShapeMismatch(self->name + ": NHWC only");
      int ctotal = 0;
      for (const auto& xi : xs) {
        const auto& s = xi->value.shape;
        if (s.size() != 4 || s[0] != first[0] || s[1] != first[1] ||
            s[2] != first[2])
          throw ShapeMismatch(self->name + ": mismatched N/H/W across inputs");
        ctotal += s[3];
      }
      self->value = Tensor<T>({first[0], first[1], first[2], ctotal});
      const std::int64_t sites =
          static_cast<std::int64_t>(first[0]) * first[1] * first[2];
      std::int64_t off = 0;
      for (const auto& xi : xs) {
        const int ci = xi->value.dim(3);
        for (std::int64_t s = 0; s < sites; ++s)
          std::copy(xi->value.data.begin() + s * ci,
                    xi->value.data.begin() + (s + 1) * ci,
                    self->value.data.begin() + s * ctotal + off);
        off += ci;
      }
    };
    n->bwd = [self, xs] {
      const auto& shape = self->value.shape;
      const std::int64_t sites =
          static_cast<std::int64_t>(shape[0]) * shape[1] * shape[2];
      const int ctotal = shape[3];
      std::int64_t off = 0;
      for (const auto& xi : xs) {
        const int ci = xi->value.dim(3);
        for (std::int64_t s = 0; s < sites; ++s)
          for (int c = 0; c < ci; ++c)
            xi->grad.data[static_cast<std::size_t>(s * ci + c)] +=
                self->grad.data[static_cast<std::size_t>(s * ctotal + off + c)];
        off += ci;
      }
    };
    return n;
  }

  NodeRef<T> residual_add(NodeRef<T> x, NodeRef<T> fx, std::string name = "add") {
    auto n = make(std::move(name), {x, fx});
    Node<T>* self = n.get();
    n->fwd = [self, x, fx] {
      if (!x->value.same_shape(fx->value))
        throw ShapeMismatch(self->name + ": " + shape_str(x->value.shape) +
                            " + " + shape_str(fx->value.shape));
      self->value.shape = x->value.shape;
      self->value.data.resize(x->value.data.size());
      for (std::size_t i = 0; i < x->value.data.size(); ++i)
        self->value.data[i] = x->value.data[i] + fx->value.data[i];
    };
    n->bwd = [self, x, fx] {
      for (std::size_t i = 0; i < self->grad.data.size(); ++i) {
        x->grad.data[i] += self->grad.data[i];
        fx->grad.data[i] += self->grad.data[i];
      }
    };
    return n;
  }

  NodeRef<T> scale(NodeRef<T> x, double s, std::string name = "scale") {
    auto n = make(std::move(name), {x});
    Node<T>* self = n.get();
    n->fwd = [self, x, s] {
      self->value.shape = x->value.shape;
      self->value.data.resize(x->value.data.size());
      for (std::size_t i = 0; i < x->value.data.size(); ++i)
        self->value.data[i] = static_cast<T>(s) * x->value.data[i];
    };
    n->bwd = [self, x, s] {
      for (std::size_t i = 0; i < self->grad.data.size(); ++i)
        x->grad.data[i] += static_cast<T>(s) * self->grad.data[i];
    };
    return n;
  }

  NodeRef<T> global_avg_pool(NodeRef<T> x, std::string name = "gap") {
    auto n = make(std::move(name), {x});
    Node<T>* self = n.get();
    n->fwd = [self, x] {
      const auto& s = x->value.shape;
      if (s.size() != 4) throw ShapeMismatch(self->name + ": NHWC only");
      self->value = Tensor<T>({s[0], s[3]});
      const std::int64_t hw = static_cast<std::int64_t>(s[1]) * s[2];
      for (int b = 0; b < s[0]; ++b) {
        const T* xb = x->value.data.data() +
                      static_cast<std::int64_t>(b) * hw * s[3];
        T* ob = self->value.data.data() + static_cast<std::int64_t>(b) * s[3];
        for (std::int64_t p = 0; p < hw; ++p)
          for (int c = 0; c < s[3]; ++c) ob[c] += xb[p * s[3] + c];
        for (int c = 0; c < s[3]; ++c) ob[c] /= static_cast<T>(hw);
      }
    };
    n->bwd = [self, x] {
      const auto& s = x->value.shape;
      const std::int64_t hw = static_cast<std::int64_t>(s[1]) * s[2];
      for (int b = 0; b < s[0]; ++b) {
        const T* gb = self->grad.data.data() + static_cast<std::int64_t>(b) * s[3];
        T* xb = x->grad.data.data() + static_cast<std::int64_t>(b) * hw * s[3];
        for (std::int64_t p = 0; p < hw; ++p)
          for (int c = 0; c < s[3]; ++c)
            xb[p * s[3] + c] += gb[c] / static_cast<T>(hw);
      }
    };
    return n;
  }

  NodeRef<T> dense(NodeRef<T> x, NodeRef<T> w, NodeRef<T> b,
                   std::string name = "dense") {
    auto n = make(std::move(name), {x, w, b});
    Node<T>* self = n.get();
    n->fwd = [self, x, w, b] {
      const auto& xs = x->value.shape;
      const auto& ws = w->value.shape;
      if (xs.size() != 2 || ws.size() != 2 || xs[1] != ws[0])
        throw ShapeMismatch(self->name + ": " + shape_str(xs) + " x " +
                            shape_str(ws));
      if (b->value.size() != ws[1])
        throw ShapeMismatch(self->name + ": bias length != units");
      self->value = Tensor<T>({xs[0], ws[1]});
      ConstMatMap<T> X(x->value.data.data(), xs[0], xs[1]);
      ConstMatMap<T> W(w->value.data.data(), ws[0], ws[1]);
      MatMap<T> O(self->value.data.data(), xs[0], ws[1]);
      O.noalias() = X * W;
      ConstMatMap<T> bias(b->value.data.data(), 1, ws[1]);
      O.rowwise() += bias.row(0);
    };
    n->bwd = [self, x, w, b] {
      const auto& xs = x->value.shape;
      const auto& ws = w->value.shape;
      ConstMatMap<T> dO(self->grad.data.data(), xs[0], ws[1]);
      ConstMatMap<T> X(x->value.data.data(), xs[0], xs[1]);
      ConstMatMap<T> W(w->value.data.data(), ws[0], ws[1]);
      MatMap<T> dX(x->grad.data.data(), xs[0], xs[1]);
      MatMap<T> dW(w->grad.data.data(), ws[0], ws[1]);
      MatMap<T> dB(b->grad.data.data(), 1, ws[1]);
      dX.noalias() += dO * W.transpose();
      dW.noalias() += X.transpose() * dO;
      dB.row(0) += dO.colwise().sum();
    };
    return n;
  }

  // Cross-entropy over softmax. Labels live in a shared vector so the
  // training loop can rewrite them per batch; loss is the batch mean.
  NodeRef<T> softmax_xent(NodeRef<T> logits,
                          std::shared_ptr<std::vector<int>> labels,
                          std::string name = "xent") {
    auto n = make(std::move(name), {logits});
    Node<T>* self = n.get();
    auto probs = std::make_shared<Tensor<T>>();
    n->fwd = [self, logits, labels, probs] {
      const auto& s = logits->value.shape;
      if (s.size() != 2) throw ShapeMismatch(self->name + ": logits must be NxK");
      if (static_cast<int>(labels->size()) != s[0])
        throw ShapeMismatch(self->name + ": label count != batch");
      *probs = softmax_rows(logits->value);
      T loss = 0;
      for (int b = 0; b < s[0]; ++b) {
        int y = (*labels)[b];
        if (y < 0 || y >= s[1]) throw ShapeMismatch(self->name + ": bad label");
        T p = std::max((*probs)[b * s[1] + y], static_cast<T>(1e-12));
        loss -= std::log(p);
      }
      self->value = Tensor<T>({1});
      self->value[0] = loss / static_cast<T>(s[0]);
    };
    n->bwd = [self, logits, labels, probs] {
      const auto& s = logits->value.shape;
      const T g = self->grad[0] / static_cast<T>(s[0]);
      for (int b = 0; b < s[0]; ++b)
        for (int k = 0; k < s[1]; ++k) {
          T onehot = (k == (*labels)[b]) ? T(1) : T(0);
          logits->grad[b * s[1] + k] += g * ((*probs)[b * s[1] + k] - onehot);
        }
    };
    return n;
  }

  NodeRef<T> mse_loss(NodeRef<T> pred, NodeRef<T> target,
                      std::string name = "mse") {
    auto n = make(std::move(name), {pred, target});
    Node<T>* self = n.get();
    n->fwd = [self, pred, target] {
      if (!pred->value.same_shape(target->value))
        throw ShapeMismatch(self->name + ": " + shape_str(pred->value.shape) +
                            " vs " + shape_str(target->value.shape));
      if (pred->value.size() == 0) throw EmptyInput(self->name + ": empty");
      T acc = 0;
      for (std::int64_t i = 0; i < pred->value.size(); ++i) {
        T d = pred->value[i] - target->value[i];
        acc += d * d;
      }
      self->value = Tensor<T>({1});
      self->value[0] = acc / static_cast<T>(pred->value.size());
    };
    n->bwd = [self, pred, target] {
      const T g = self->grad[0] * T(2) / static_cast<T>(pred->value.size());
      for (std::int64_t i = 0; i < pred->value.size(); ++i)
        pred->grad[i] += g * (pred->value[i] - target->value[i]);
    };
    return n;
  }

  // ---- execution ----

  void forward() {
    for (const auto& n : nodes_) {
      if (n->fwd) {
        n->fwd();
        if (!n->value.all_finite())
          throw NumericalFault("non-finite value in '" + n->name + "'");
      }
    }
  }

  void backward(const NodeRef<T>& loss) {
    if (loss->value.size() != 1)
      throw ShapeMismatch("backward wants a scalar loss");
    for (const auto& n : nodes_) {
      n->grad.shape = n->value.shape;
      n->grad.data.assign(n->value.data.size(), T(0));
    }
    loss->grad[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
      if ((*it)->bwd) (*it)->bwd();
    for (const auto& n : nodes_)
      if (n->trainable && !n->grad.all_finite())
        throw NumericalFault("non-finite gradient for '" + n->name + "'");
  }

  std::vector<NodeRef<T>> trainable() const {
    std::vector<NodeRef<T>> out;
    for (const auto& n : nodes_)
      if (n->trainable) out.push_back(n);
    return out;
  }

  const std::vector<NodeRef<T>>& nodes() const { return nodes_; }

  static Tensor<T> softmax_rows(const Tensor<T>& logits) {
    const int n = logits.dim(0), k = logits.dim(1);
    Tensor<T> p({n, k});
    for (int b = 0; b < n; ++b) {
      T hi = logits[b * k];
      for (int i = 1; i < k; ++i) hi = std::max(hi, logits[b * k + i]);
      T sum = 0;
      for (int i = 0; i < k; ++i) {
        p[b * k + i] = std::exp(logits[b * k + i] - hi);
        sum += p[b * k + i];
      }
      for (int i = 0; i < k; ++i) p[b * k + i] /= sum;
    }
    return p;
  }

 private:
  NodeRef<T> make(std::string name, std::vector<NodeRef<T>> inputs = {}) {
    auto n = std::make_shared<Node<T>>();
    n->name = std::move(name);
    (void)inputs;  // inputs are captured by the closures; kept for clarity
    nodes_.push_back(n);
    return n;
  }

  static void pool_forward(Node<T>& self, const Node<T>& x, int k, int stride,
                           Padding pad, bool is_max,
                           std::vector<std::int64_t>* argmax) {
    const auto& s = x.value.shape;
    if (s.size() != 4) throw ShapeMismatch(self.name + ": NHWC only");
    const int n = s[0], h = s[1], w = s[2], c = s[3];
    const int oh = conv_out_dim(h, k, stride, pad);
    const int ow = conv_out_dim(w, k, stride, pad);
    const int plo_h = pad_low(h, k, stride, pad);
    const int plo_w = pad_low(w, k, stride, pad);
    self.value = Tensor<T>({n, oh, ow, c});
    if (argmax) argmax->assign(self.value.data.size(), -1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j)
          for (int ch = 0; ch < c; ++ch) {
            T best = is_max ? -std::numeric_limits<T>::infinity() : T(0);
            std::int64_t best_idx = -1;
            int cnt = 0;
            for (int ki = 0; ki < k; ++ki) {
              const int yi = i * stride - plo_h + ki;
              if (yi < 0 || yi >= h) continue;
              for (int kj = 0; kj < k; ++kj) {
                const int xj = j * stride - plo_w + kj;
                if (xj < 0 || xj >= w) continue;
                std::int64_t idx =
                    ((static_cast<std::int64_t>(b) * h + yi) * w + xj) * c + ch;
                ++cnt;
                if (is_max) {
                  if (x.value[idx] > best) {
                    best = x.value[idx];
                    best_idx = idx;
                  }
                } else {
                  best += x.value[idx];
                }
              }
            }
            std::int64_t out_idx =
                ((static_cast<std::int64_t>(b) * oh + i) * ow + j) * c + ch;
            if (is_max) {
              self.value[out_idx] = cnt ? best : T(0);
              if (argmax) (*argmax)[static_cast<std::size_t>(out_idx)] = best_idx;
            } else {
              // padding cells are excluded from the average
              self.value[out_idx] = cnt ? best / static_cast<T>(cnt) : T(0);
            }
          }
    }
  }

  static void pool_backward_avg(const Node<T>& self, Node<T>& x, int k,
                                int stride, Padding pad) {
    const auto& s = x.value.shape;
    const int n = s[0], h = s[1], w = s[2], c = s[3];
    const int oh = self.value.dim(1), ow = self.value.dim(2);
    const int plo_h = pad_low(h, k, stride, pad);
    const int plo_w = pad_low(w, k, stride, pad);
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          int cnt = 0;
          for (int ki = 0; ki < k; ++ki) {
            const int yi = i * stride - plo_h + ki;
            if (yi < 0 || yi >= h) continue;
            for (int kj = 0; kj < k; ++kj) {
              const int xj = j * stride - plo_w + kj;
              if (xj >= 0 && xj < w) ++cnt;
            }
          }
          if (!cnt) continue;
          for (int ch = 0; ch < c; ++ch) {
            std::int64_t out_idx =
                ((static_cast<std::int64_t>(b) * oh + i) * ow + j) * c + ch;
            T g = self.grad[out_idx] / static_cast<T>(cnt);
            for (int ki = 0; ki < k; ++ki) {
              const int yi = i * stride - plo_h + ki;
              if (yi < 0 || yi >= h) continue;
              for (int kj = 0; kj < k; ++kj) {
                const int xj = j * stride - plo_w + kj;
                if (xj < 0 || xj >= w) continue;
                x.grad[((static_cast<std::int64_t>(b) * h + yi) * w + xj) * c +
                       ch] += g;
              }
            }
          }
        }
  }

  std::vector<NodeRef<T>> nodes_;
};

}  // namespace chemception
