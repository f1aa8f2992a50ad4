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

// Reference kernels: straightforward loops, no threading.

#include <algorithm>

#include "flex/kernels.hpp"

namespace flex::kernels::serial {

void gemm_nn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c[i * n + j] = s;
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double api = a[p * m + i];
      if (api == 0.0) continue;
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void spmm(const CsrMatrix& s, std::span<const double> b, std::span<double> c,
          std::size_t n) {
  for (std::size_t i = 0; i < s.rows; ++i) {
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
  for (std::size_t b = 0; b < layout.count(); ++b) {
    const std::size_t nb = layout.sizes[b];
    const double* hb = h.data() + layout.node_offsets[b] * d;
    gemm_nt({hb, nb * d}, {hb, nb * d},
            out.subspan(layout.entry_offsets[b], nb * nb), nb, d, nb);
  }
}

void block_matmul(const BlockLayout& layout, std::span<const double> a,
                  std::span<const double> h, std::size_t d,
                  std::span<double> c) {
  for (std::size_t b = 0; b < layout.count(); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    gemm_nn(a.subspan(layout.entry_offsets[b], nb * nb), h.subspan(off, nb * d),
            c.subspan(off, nb * d), nb, nb, d);
  }
}

void block_matmul_t(const BlockLayout& layout, std::span<const double> a,
                    std::span<const double> h, std::size_t d,
                    std::span<double> c) {
  for (std::size_t b = 0; b < layout.count(); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    gemm_tn(a.subspan(layout.entry_offsets[b], nb * nb), h.subspan(off, nb * d),
            c.subspan(off, nb * d), nb, nb, d);
  }
}

void block_outer(const BlockLayout& layout, std::span<const double> x,
                 std::span<const double> y, std::size_t d,
                 std::span<double> out) {
  for (std::size_t b = 0; b < layout.count(); ++b) {
    const std::size_t nb = layout.sizes[b];
    const std::size_t off = layout.node_offsets[b] * d;
    gemm_nt(x.subspan(off, nb * d), y.subspan(off, nb * d),
            out.subspan(layout.entry_offsets[b], nb * nb), nb, d, nb);
  }
}

}  // namespace flex::kernels::serial
