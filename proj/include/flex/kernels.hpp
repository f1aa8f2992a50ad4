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

// Data-parallel numeric kernels.
//
// Each kernel exists twice: kernels::serial is the plain reference loop kept
// for testing, kernels::omp the OpenMP version used in production. The two
// are required to be bit-identical: the parallel versions only distribute
// independent output rows (or blocks) across threads and never split a
// reduction, so every output element is summed in the same order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flex {

/// Weighted CSR matrix (rows sorted, no duplicates).
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const noexcept { return col.size(); }
  CsrMatrix transposed() const;
  /// Entry (r, c), zero when absent.
  double at(std::size_t r, std::size_t c) const;
};

/// Node and entry offsets of a block-diagonal batch whose dense blocks are
/// stored packed (block i occupies sizes[i]^2 consecutive row-major entries).
struct BlockLayout {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> node_offsets;
  std::vector<std::size_t> entry_offsets;
  std::size_t total_nodes = 0;
  std::size_t total_entries = 0;

  static BlockLayout from_sizes(std::vector<std::size_t> sizes);
  std::size_t count() const noexcept { return sizes.size(); }
  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

namespace kernels {

// Matrix arguments are row-major spans. Shapes: a (m x k), b (k x n) etc.
// All kernels overwrite their output.

#define FLEX_KERNEL_DECLS                                                     \
  /* c = a * b */                                                             \
  void gemm_nn(std::span<const double> a, std::span<const double> b,          \
               std::span<double> c, std::size_t m, std::size_t k,             \
               std::size_t n);                                                \
  /* c = a * b^T ; a (m x k), b (n x k) */                                    \
  void gemm_nt(std::span<const double> a, std::span<const double> b,          \
               std::span<double> c, std::size_t m, std::size_t k,             \
               std::size_t n);                                                \
  /* c = a^T * b ; a (k x m), b (k x n) */                                    \
  void gemm_tn(std::span<const double> a, std::span<const double> b,          \
               std::span<double> c, std::size_t m, std::size_t k,             \
               std::size_t n);                                                \
  /* c = s * b ; s sparse (m x k), b (k x n) */                               \
  void spmm(const CsrMatrix& s, std::span<const double> b,                    \
            std::span<double> c, std::size_t n);                              \
  /* packed per-block gram matrices h_i h_i^T ; h (N x d) */                  \
  void block_gram(const BlockLayout& layout, std::span<const double> h,       \
                  std::size_t d, std::span<double> out);                      \
  /* c_i = a_i * h_i per block ; a packed, h and c (N x d) */                 \
  void block_matmul(const BlockLayout& layout, std::span<const double> a,     \
                    std::span<const double> h, std::size_t d,                 \
                    std::span<double> c);                                     \
  /* c_i = a_i^T * h_i per block */                                           \
  void block_matmul_t(const BlockLayout& layout, std::span<const double> a,   \
                      std::span<const double> h, std::size_t d,               \
                      std::span<double> c);                                   \
  /* packed g_i = x_i * y_i^T per block ; x, y (N x d) */                     \
  void block_outer(const BlockLayout& layout, std::span<const double> x,      \
                   std::span<const double> y, std::size_t d,                  \
                   std::span<double> out);

namespace serial {
FLEX_KERNEL_DECLS
}  // namespace serial

namespace omp {
FLEX_KERNEL_DECLS
}  // namespace omp

#undef FLEX_KERNEL_DECLS

/// Threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();
/// Honors the FLEX_NUM_THREADS environment variable when set.
void configure_threads_from_env();

}  // namespace kernels
}  // namespace flex
