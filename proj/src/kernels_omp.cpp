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

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flex/kernels.hpp"

namespace flex {

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (auto c : col) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(nnz());
  t.val.resize(nnz());
  std::vector<std::size_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
      const auto slot = fill[col[e]]++;
      t.col[slot] = static_cast<std::uint32_t>(r);
      t.val[slot] = val[e];
    }
  }
  return t;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

BlockLayout BlockLayout::from_sizes(std::vector<std::size_t> sizes) {
  BlockLayout l;
  l.sizes = std::move(sizes);
  l.node_offsets.reserve(l.sizes.size());
  l.entry_offsets.reserve(l.sizes.size());
  for (auto s : l.sizes) {
    l.node_offsets.push_back(l.total_nodes);
    l.entry_offsets.push_back(l.total_entries);
    l.total_nodes += s;
    l.total_entries += s * s;
  }
  return l;
}

namespace kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void configure_threads_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("FLEX_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

namespace {

// Single output rows; the accumulation order matches the serial reference.
inline void row_nn(const double* ai, const double* b, double* ci,
                   std::size_t k, std::size_t n) {
  std::fill(ci, ci + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double aip = ai[p];
    if (aip == 0.0) continue;
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void row_nt(const double* ai, const double* b, double* ci,
                   std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
    ci[j] = s;
  }
}

inline void row_tn(const double* a, std::size_t i, std::size_t m,
                   const double* b, double* ci, std::size_t k, std::size_t n) {
  std::fill(ci, ci + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double api = a[p * m + i];
    if (api == 0.0) continue;
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
  }
}

using Index = std::ptrdiff_t;

}  // namespace

namespace omp {

void gemm_nn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
#pragma omp parallel for schedule(static) if (m * k * n > 32768)
  for (Index i = 0; i < static_cast<Index>(m); ++i)
    row_nn(a.data() + i * k, b.data(), c.data() + i * n, k, n);
}

void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
#pragma omp parallel for schedule(static) if (m * k * n > 32768)
  for (Index i = 0; i < static_cast<Index>(m); ++i)
    row_nt(a.data() + i * k, b.data(), c.data() + i * n, k, n);
}

void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
#pragma omp parallel for schedule(static) if (m * k * n > 32768)
  for (Index i = 0; i < static_cast<Index>(m); ++i)
    row_tn(a.data(), static_cast<std::size_t>(i), m, b.data(),
           c.data() + i * n, k, n);
}

void spmm(const CsrMatrix& s, std::span<const double> b, std::span<double> c,
          std::size_t n) {
#pragma omp parallel for schedule(dynamic, 64) if (s.nnz() * n > 32768)
  for (Index i = 0; i < static_cast<Index>(s.rows); ++i) {
    double* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
      const double w = s.val[e];
      const double* bj = b.data() + static_cast<std::size_t>(s.col[e]) * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += w * bj[j];
    }
  }
}

void block_gram(const BlockLayout& layout, std::span<const double> h,
                std::size_t d, std::span<double> out) {
#pragma omp parallel for schedule(dynamic) if (layout.count() > 1)
  for (Index b = 0; b < static_cast<Index>(layout.count()); ++b) {
    const std::size_t nb = layout.sizes[b];
    const double* hb = h.data() + layout.node_offsets[b] * d;
    double* ob = out.data() + layout.entry_offsets[b];
    for (std::size_t i = 0; i < nb; ++i) row_nt(hb + i * d, hb, ob + i * nb, d, nb);
  }
}

void block_matmul(const BlockLayout& layout, std::span<const double> a,
                  std::span<const double> h, std::size_t d,
                  std::span<double> c) {
#pragma omp parallel for schedule(dynamic) if (layout.count() > 1)
  for (Index b = 0; b < static_cast<Index>(layout.count()); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    const double* ab = a.data() + layout.entry_offsets[b];
    for (std::size_t i = 0; i < nb; ++i)
      row_nn(ab + i * nb, h.data() + off, c.data() + off + i * d, nb, d);
  }
}

void block_matmul_t(const BlockLayout& layout, std::span<const double> a,
                    std::span<const double> h, std::size_t d,
                    std::span<double> c) {
#pragma omp parallel for schedule(dynamic) if (layout.count() > 1)
  for (Index b = 0; b < static_cast<Index>(layout.count()); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    const double* ab = a.data() + layout.entry_offsets[b];
    for (std::size_t i = 0; i < nb; ++i)
      row_tn(ab, i, nb, h.data() + off, c.data() + off + i * d, nb, d);
  }
}

void block_outer(const BlockLayout& layout, std::span<const double> x,
                 std::span<const double> y, std::size_t d,
                 std::span<double> out) {
#pragma omp parallel for schedule(dynamic) if (layout.count() > 1)
  for (Index b = 0; b < static_cast<Index>(layout.count()); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    double* ob = out.data() + layout.entry_offsets[b];
    for (std::size_t i = 0; i < nb; ++i)
      row_nt(x.data() + off + i * d, y.data() + off, ob + i * nb, d, nb);
  }
}

}  // namespace omp
}  // namespace kernels
}  // namespace flex
