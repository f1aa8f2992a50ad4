/*
 * Copyright 2026 The FlexLP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flex/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace flex {

namespace k = kernels::omp;

Real stable_sigmoid(Real x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

Real bce_logit(Real x, Real t) {
  return std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
}

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

const Tensor& Gradients::operator[](const Var& v) const {
  if (v.id() >= grads_.size()) throw InputError("variable is not on this tape");
  return grads_[v.id()];
}

std::vector<Tensor> Gradients::of(const std::vector<Var>& leaves) const {
  std::vector<Tensor> out;
  out.reserve(leaves.size());
  for (const auto& v : leaves) out.push_back((*this)[v]);
  return out;
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), false, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), true, true, {}, {}});
  return Var(this, nodes_.size() - 1);
}

std::vector<Var> Tape::leaves(const ParamList& params) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(leaf(p.value));
  return out;
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  bool rg = false;
  for (auto id : inputs) rg = rg || nodes_[id].requires_grad;
  Node n{std::move(value), rg, false, {}, {}};
  if (rg) {
    n.inputs = std::move(inputs);
    n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(const Var& loss) const {
  if (loss.tape() != this) throw InputError("loss is not recorded on this tape");
  if (loss.value().size() != 1)
    throw InputError("backward requires a scalar loss, got " +
                     loss.value().shape_str());
  Gradients g;
  g.grads_.resize(nodes_.size());
  g.grads_[loss.id()] = Tensor(1, 1, 1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || n.is_leaf || g.grads_[i].empty()) continue;
    n.backward(g.grads_[i], g.grads_);
    // interior gradients are no longer needed once propagated
    g.grads_[i] = Tensor();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf && g.grads_[i].empty())
      g.grads_[i] = Tensor(nodes_[i].value.rows(), nodes_[i].value.cols(), 0.0);
    if (!nodes_[i].is_leaf && i != loss.id()) g.grads_[i] = Tensor();
  }
  return g;
}

namespace ad {
namespace {

using Grads = std::vector<Tensor>;

void accumulate(Grads& grads, std::size_t id, const Tensor& delta) {
  Tensor& slot = grads[id];
  if (slot.empty()) {
    slot = delta;
    return;
  }
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += delta[i];
}

void accumulate(Grads& grads, std::size_t id, Tensor&& delta) {
  Tensor& slot = grads[id];
  if (slot.empty()) {
    slot = std::move(delta);
    return;
  }
  for (std::size_t i = 0; i < slot.size(); ++i) slot[i] += delta[i];
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(op, detail);
}

std::string shapes(const Var& a, const Var& b) {
  return a.value().shape_str() + " vs " + b.value().shape_str();
}

Tape& same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape() != b.tape() || a.tape() == nullptr)
    throw InputError(std::string(op) + ": operands live on different tapes");
  return *a.tape();
}

template <class F>
Var unary(const Var& a, F&& fwd, std::function<Real(Real x, Real y)> dydx) {
  Tape& t = *a.tape();
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const std::size_t ia = a.id();
  Tape* tp = &t;
  auto fn = [tp, ia, dydx](const Tensor& g, Grads& grads) {
    const Tensor& x = tp->value(ia);
    Tensor dx(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = g[i] * dydx(x[i], 0.0);
    accumulate(grads, ia, std::move(dx));
  };
  return t.record(std::move(y), {ia}, fn);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "matmul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.cols() == y.rows(), "matmul", shapes(a, b));
  const std::size_t m = x.rows(), kk = x.cols(), n = y.cols();
  Tensor out(m, n);
  k::gemm_nn(x.values(), y.values(), out.values(), m, kk, n);
  const std::size_t ia = a.id(), ib = b.id();
  Tape* tp = &t;
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    const Tensor& x = tp->value(ia);
    const Tensor& y = tp->value(ib);
    if (tp->requires_grad(ia)) {
      Tensor dx(m, kk);
      k::gemm_nt(g.values(), y.values(), dx.values(), m, n, kk);
      accumulate(grads, ia, std::move(dx));
    }
    if (tp->requires_grad(ib)) {
      Tensor dy(kk, n);
      k::gemm_tn(x.values(), g.values(), dy.values(), kk, m, n);
      accumulate(grads, ib, std::move(dy));
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "matmul_nt");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.cols() == y.cols(), "matmul_nt", shapes(a, b));
  const std::size_t m = x.rows(), kk = x.cols(), n = y.rows();
  Tensor out(m, n);
  k::gemm_nt(x.values(), y.values(), out.values(), m, kk, n);
  const std::size_t ia = a.id(), ib = b.id();
  Tape* tp = &t;
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    const Tensor& x = tp->value(ia);
    const Tensor& y = tp->value(ib);
    if (tp->requires_grad(ia)) {
      Tensor dx(m, kk);
      k::gemm_nn(g.values(), y.values(), dx.values(), m, n, kk);
      accumulate(grads, ia, std::move(dx));
    }
    if (tp->requires_grad(ib)) {
      Tensor dy(n, kk);
      k::gemm_tn(g.values(), x.values(), dy.values(), n, m, kk);
      accumulate(grads, ib, std::move(dy));
    }
  });
}

Var spmm(std::shared_ptr<const CsrMatrix> s, const Var& b) {
  Tape& t = *b.tape();
  const Tensor& y = b.value();
  require(s->cols == y.rows(), "spmm",
          "sparse " + std::to_string(s->rows) + "x" + std::to_string(s->cols) +
              " vs " + y.shape_str());
  const std::size_t n = y.cols();
  Tensor out(s->rows, n);
  k::spmm(*s, y.values(), out.values(), n);
  const std::size_t ib = b.id();
  return t.record(std::move(out), {ib}, [=](const Tensor& g, Grads& grads) {
    const CsrMatrix st = s->transposed();
    Tensor dy(st.rows, n);
    k::spmm(st, g.values(), dy.values(), n);
    accumulate(grads, ib, std::move(dy));
  });
}

Var add(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "add");
  require(a.value().same_shape(b.value()), "add", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    accumulate(grads, ia, g);
    accumulate(grads, ib, g);
  });
}

Var add_row(const Var& a, const Var& bias) {
  Tape& t = same_tape(a, bias, "add_row");
  const Tensor& x = a.value();
  require(bias.value().rows() == 1 && bias.value().cols() == x.cols(), "add_row",
          shapes(a, bias));
  Tensor out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) += bias.value()[c];
  const std::size_t ia = a.id(), ib = bias.id();
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    accumulate(grads, ia, g);
    Tensor db(1, g.cols(), 0.0);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) db[c] += g(r, c);
    accumulate(grads, ib, std::move(db));
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "sub");
  require(a.value().same_shape(b.value()), "sub", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    accumulate(grads, ia, g);
    Tensor neg = g;
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
    accumulate(grads, ib, std::move(neg));
  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "mul");
  require(a.value().same_shape(b.value()), "mul", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  Tape* tp = &t;
  return t.record(std::move(out), {ia, ib}, [=](const Tensor& g, Grads& grads) {
    const Tensor& x = tp->value(ia);
    const Tensor& y = tp->value(ib);
    if (tp->requires_grad(ia)) {
      Tensor dx = g;
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i];
      accumulate(grads, ia, std::move(dx));
    }
    if (tp->requires_grad(ib)) {
      Tensor dy = g;
      for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= x[i];
      accumulate(grads, ib, std::move(dy));
    }
  });
}

Var mul_const(const Var& a, const Tensor& c) {
  require(a.value().same_shape(c), "mul_const",
          a.value().shape_str() + " vs " + c.shape_str());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [=](const Tensor& g, Grads& grads) {
                            Tensor dx = g;
                            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= c[i];
                            accumulate(grads, ia, std::move(dx));
                          });
}

Var scale(const Var& a, Real c) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= c;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {ia},
                          [=](const Tensor& g, Grads& grads) {
                            Tensor dx = g;
                            for (auto& v : dx.values()) v *= c;
                            accumulate(grads, ia, std::move(dx));
                          });
}

Var add_scalar(const Var& a, Real c) {
  Tensor out = a.value();
  for (auto& v : out.values()) v += c;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {ia}, [=](const Tensor& g, Grads& grads) {
    accumulate(grads, ia, g);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols", "no inputs");
  Tape& t = *parts.front().tape();
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw InputError("concat_cols: operands on different tapes");
    require(p.value().rows() == rows, "concat_cols",
            "row counts " + std::to_string(rows) + " vs " +
                std::to_string(p.value().rows()));
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    cols += p.value().cols();
  }
  Tensor out(rows, cols);
  std::size_t c0 = 0;
  for (const auto& p : parts) {
    const Tensor& x = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(x.data() + r * x.cols(), x.data() + (r + 1) * x.cols(),
                out.data() + r * cols + c0);
    c0 += x.cols();
  }
  Tape* tp = &t;
  return t.record(std::move(out), ids, [=](const Tensor& g, Grads& grads) {
    std::size_t c0 = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      const std::size_t w = widths[p];
      if (tp->requires_grad(ids[p])) {
        Tensor d(rows, w);
        for (std::size_t r = 0; r < rows; ++r)
          std::copy(g.data() + r * cols + c0, g.data() + r * cols + c0 + w,
                    d.data() + r * w);
        accumulate(grads, ids[p], std::move(d));
      }
      c0 += w;
    }
  });
}

Var slice_rows(const Var& a, std::size_t start, std::size_t count) {
  const Tensor& x = a.value();
  require(start + count <= x.rows(), "slice_rows",
          "rows [" + std::to_string(start) + "," + std::to_string(start + count) +
              ") of " + x.shape_str());
  const std::size_t c = x.cols();
  Tensor out(count, c);
  std::copy(x.data() + start * c, x.data() + (start + count) * c, out.data());
  const std::size_t ia = a.id(), total = x.rows();
  return a.tape()->record(std::move(out), {ia}, [=](const Tensor& g, Grads& grads) {
    Tensor d(total, c, 0.0);
    std::copy(g.data(), g.data() + g.size(), d.data() + start * c);
    accumulate(grads, ia, std::move(d));
  });
}

Var gather_rows(const Var& a, const std::vector<std::size_t>& rows) {
  const Tensor& x = a.value();
  const std::size_t c = x.cols();
  Tensor out(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < x.rows(), "gather_rows",
            "row " + std::to_string(rows[i]) + " of " + x.shape_str());
    std::copy(x.data() + rows[i] * c, x.data() + (rows[i] + 1) * c,
              out.data() + i * c);
  }
  const std::size_t ia = a.id(), total = x.rows();
  return a.tape()->record(std::move(out), {ia}, [=](const Tensor& g, Grads& grads) {
    Tensor d(total, c, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) d(rows[i], j) += g(i, j);
    accumulate(grads, ia, std::move(d));
  });
}

Var sum(const Var& a) {
  const Tensor& x = a.value();
  Real s = 0.0;
  for (Real v : x.values()) s += v;
  const std::size_t ia = a.id(), r = x.rows(), c = x.cols();
  return a.tape()->record(Tensor::scalar(s), {ia}, [=](const Tensor& g, Grads& grads) {
    accumulate(grads, ia, Tensor(r, c, g[0]));
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean", "empty tensor");
  return scale(sum(a), 1.0 / static_cast<Real>(n));
}

Var row_sum(const Var& a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out[r] += x(r, c);
  const std::size_t ia = a.id(), cols = x.cols();
  return a.tape()->record(std::move(out), {ia}, [=](const Tensor& g, Grads& grads) {
    Tensor d(g.rows(), cols);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) d(r, c) = g[r];
    accumulate(grads, ia, std::move(d));
  });
}

Var sigmoid(const Var& a) {
  return unary(a, stable_sigmoid, [](Real x, Real) {
    const Real s = stable_sigmoid(x);
    return s * (1.0 - s);
  });
}

Var relu(const Var& a) {
  return unary(a, [](Real x) { return x > 0 ? x : 0.0; },
               [](Real x, Real) { return x > 0 ? 1.0 : 0.0; });
}

Var exp(const Var& a) {
  return unary(a, [](Real x) { return std::exp(x); },
               [](Real x, Real) { return std::exp(x); });
}

Var log(const Var& a) {
  return unary(a, [](Real x) { return std::log(x); },
               [](Real x, Real) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary(a, [](Real x) { return x * x; },
               [](Real x, Real) { return 2.0 * x; });
}

Var clamp(const Var& a, Real lo, Real hi) {
  return unary(a, [lo, hi](Real x) { return std::clamp(x, lo, hi); },
               [lo, hi](Real x, Real) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var bce_with_logits(const Var& logits, const Tensor& targets) {
  const std::size_t n = logits.value().size();
  if (n == 0) throw ShapeError("bce_with_logits", "empty input");
  return weighted_bce_with_logits(logits, targets,
                                  Tensor(logits.rows(), logits.cols(),
                                         1.0 / static_cast<Real>(n)));
}

Var weighted_bce_with_logits(const Var& logits, const Tensor& targets,
                             const Tensor& weights) {
  const Tensor& x = logits.value();
  require(x.same_shape(targets) && x.same_shape(weights), "bce_with_logits",
          x.shape_str() + " vs targets " + targets.shape_str() + " / weights " +
              weights.shape_str());
  Real loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (weights[i] != 0.0) loss += weights[i] * bce_logit(x[i], targets[i]);
  const std::size_t ia = logits.id();
  Tape* tp = logits.tape();
  return tp->record(Tensor::scalar(loss), {ia}, [=](const Tensor& g, Grads& grads) {
    const Tensor& x = tp->value(ia);
    Tensor d(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i)
      d[i] = g[0] * weights[i] * (stable_sigmoid(x[i]) - targets[i]);
    accumulate(grads, ia, std::move(d));
  });
}

Var block_gram(const Var& h, const BlockLayout& layout) {
  const Tensor& x = h.value();
  require(x.rows() == layout.total_nodes, "block_gram",
          x.shape_str() + " vs " + std::to_string(layout.total_nodes) + " batched nodes");
  const std::size_t d = x.cols();
  Tensor out(layout.total_entries, 1);
  k::block_gram(layout, x.values(), d, out.values());
  const std::size_t ih = h.id();
  Tape* tp = h.tape();
  return tp->record(std::move(out), {ih}, [=](const Tensor& g, Grads& grads) {
    // d(h h^T) = (G + G^T) h, per block
    const Tensor& x = tp->value(ih);
    Tensor sym(layout.total_entries, 1);
    for (std::size_t b = 0; b < layout.count(); ++b) {
      const std::size_t nb = layout.sizes[b], off = layout.entry_offsets[b];
      for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j)
          sym[off + i * nb + j] = g[off + i * nb + j] + g[off + j * nb + i];
    }
    Tensor dh(x.rows(), d);
    k::block_matmul(layout, sym.values(), x.values(), d, dh.values());
    accumulate(grads, ih, std::move(dh));
  });
}

Var block_matmul(const Var& a, const Var& h, const BlockLayout& layout) {
  Tape& t = same_tape(a, h, "block_matmul");
  const Tensor& av = a.value();
  const Tensor& hv = h.value();
  require(av.size() == layout.total_entries && hv.rows() == layout.total_nodes,
          "block_matmul", shapes(a, h));
  const std::size_t d = hv.cols();
  Tensor out(hv.rows(), d);
  k::block_matmul(layout, av.values(), hv.values(), d, out.values());
  const std::size_t ia = a.id(), ih = h.id();
  Tape* tp = &t;
  return t.record(std::move(out), {ia, ih}, [=](const Tensor& g, Grads& grads) {
    if (tp->requires_grad(ia)) {
      Tensor da(layout.total_entries, 1);
      k::block_outer(layout, g.values(), tp->value(ih).values(), d, da.values());
      accumulate(grads, ia, std::move(da));
    }
    if (tp->requires_grad(ih)) {
      Tensor dh(g.rows(), d);
      k::block_matmul_t(layout, tp->value(ia).values(), g.values(), d, dh.values());
      accumulate(grads, ih, std::move(dh));
    }
  });
}

Var block_gcn_normalize(const Var& a, const BlockLayout& layout) {
  const Tensor& av = a.value();
  require(av.size() == layout.total_entries, "block_gcn_normalize",
          av.shape_str() + " vs " + std::to_string(layout.total_entries) + " entries");
  // s_i = (sum_j A_ij + 1)^-1/2 ; N_ij = s_i (A_ij + [i==j]) s_j
  Tensor s(layout.total_nodes, 1);
  Tensor out(layout.total_entries, 1);
  for (std::size_t b = 0; b < layout.count(); ++b) {
    const std::size_t nb = layout.sizes[b], eo = layout.entry_offsets[b],
                      no = layout.node_offsets[b];
    for (std::size_t i = 0; i < nb; ++i) {
      Real deg = 1.0;
      for (std::size_t j = 0; j < nb; ++j) deg += av[eo + i * nb + j];
      s[no + i] = 1.0 / std::sqrt(deg);
    }
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < nb; ++j)
        out[eo + i * nb + j] =
            s[no + i] * (av[eo + i * nb + j] + (i == j ? 1.0 : 0.0)) * s[no + j];
  }
  const std::size_t ia = a.id();
  Tape* tp = a.tape();
  return tp->record(std::move(out), {ia}, [=](const Tensor& g, Grads& grads) {
    const Tensor& av = tp->value(ia);
    Tensor da(layout.total_entries, 1);
    for (std::size_t b = 0; b < layout.count(); ++b) {
      const std::size_t nb = layout.sizes[b], eo = layout.entry_offsets[b],
                        no = layout.node_offsets[b];
      // dL/ds_i, then chain through s_i = deg_i^-1/2
      std::vector<Real> ds(nb, 0.0);
      for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
          const Real bij = av[eo + i * nb + j] + (i == j ? 1.0 : 0.0);
          const Real gij = g[eo + i * nb + j];
          ds[i] += gij * bij * s[no + j];
          ds[j] += gij * s[no + i] * bij;
        }
      for (std::size_t i = 0; i < nb; ++i) {
        const Real si = s[no + i];
        const Real ddeg = ds[i] * (-0.5) * si * si * si;
        for (std::size_t j = 0; j < nb; ++j)
          da[eo + i * nb + j] = g[eo + i * nb + j] * si * s[no + j] + ddeg;
      }
    }
    accumulate(grads, ia, std::move(da));
  });
}

}  // namespace ad
}  // namespace flex
