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

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flex/kernels.hpp"
#include "flex/tensor.hpp"

namespace flex {

/// A named learnable tensor.
struct Parameter {
  std::string name;
  Tensor value;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

using ParamList = std::vector<Parameter>;

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid for the
/// lifetime of its tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of one backward pass, indexed by the node ids of the leaves.
class Gradients {
 public:
  const Tensor& operator[](const Var& v) const;
  std::vector<Tensor> of(const std::vector<Var>& leaves) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
};

/// Records operations in creation order, which is a topological order, so
/// backward is a single reverse sweep visiting each node once.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Differentiable input. Its value is copied, so gradients never touch
  /// storage outside the tape.
  Var leaf(Tensor value);
  std::vector<Var> leaves(const ParamList& params);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a scalar loss. Every leaf receives a gradient (zero
  /// when it did not participate).
  Gradients backward(const Var& loss) const;

  using BackwardFn =
      std::function<void(const Tensor& grad_out, std::vector<Tensor>& grads)>;
  /// Records a node computed from `inputs`; `fn` accumulates into the
  /// gradient slots of the inputs. Used by the op library.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    bool is_leaf = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

/// Differentiable operations. Each checks shapes and raises ShapeError
/// naming the op on mismatch.
namespace ad {

Var matmul(const Var& a, const Var& b);
/// a * b^T
Var matmul_nt(const Var& a, const Var& b);
/// Sparse constant times dense.
Var spmm(std::shared_ptr<const CsrMatrix> s, const Var& b);

Var add(const Var& a, const Var& b);
/// a (n x c) + bias (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& bias);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// Elementwise product with a constant tensor (masks, dropout).
Var mul_const(const Var& a, const Tensor& c);
Var scale(const Var& a, Real c);
Var add_scalar(const Var& a, Real c);

Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, std::size_t start, std::size_t count);
Var gather_rows(const Var& a, const std::vector<std::size_t>& rows);

Var sum(const Var& a);
Var mean(const Var& a);
/// Sum over columns, (n x c) -> (n x 1).
Var row_sum(const Var& a);

Var sigmoid(const Var& a);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// Clamps to [lo, hi]; gradient passes only strictly inside the interval.
Var clamp(const Var& a, Real lo, Real hi);

/// Mean binary cross-entropy of logits against {0,1} targets.
Var bce_with_logits(const Var& logits, const Tensor& targets);
/// Sum of weights[i] * bce(logits[i], targets[i]).
Var weighted_bce_with_logits(const Var& logits, const Tensor& targets,
                             const Tensor& weights);

// Block-diagonal operations. Packed block tensors are column vectors of
// layout.total_entries values (block i row-major at entry_offsets[i]).

/// Packed h_i h_i^T for each block; h is (total_nodes x d).
Var block_gram(const Var& h, const BlockLayout& layout);
/// Per-block a_i * h_i; a packed, h (total_nodes x d).
Var block_matmul(const Var& a, const Var& h, const BlockLayout& layout);
/// Per-block D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
Var block_gcn_normalize(const Var& a, const BlockLayout& layout);

}  // namespace ad

/// Elementwise reference helpers shared by ops and tests.
Real stable_sigmoid(Real x);
Real bce_logit(Real logit, Real target);

}  // namespace flex
