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

#include "flex/adam.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flex/rng.hpp"

namespace flex {

AdamState::AdamState(const ParamList& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.value.rows(), p.value.cols(), 0.0);
    v_.emplace_back(p.value.rows(), p.value.cols(), 0.0);
  }
}

void AdamState::step(ParamList& params, const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != params.size())
    throw ShapeError("adam_step", "parameter/gradient/moment counts differ");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!grads[p].same_shape(params[p].value) || !m_[p].same_shape(params[p].value))
      throw ShapeError("adam_step", "parameter '" + params[p].name + "' " +
                                        params[p].value.shape_str() + " vs grad " +
                                        grads[p].shape_str());
    if (!grads[p].all_finite())
      throw NumericError("non-finite gradient for parameter '" + params[p].name +
                         "' at step " + std::to_string(t_ + 1));
  }
  ++t_;
  const Real bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<Real>(t_));
  const Real bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<Real>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = params[p].value;
    const Tensor& g = grads[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g[i];
      v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const Real mhat = m_[p][i] / bc1;
      const Real vhat = v_[p][i] / bc2;
      w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

// --- checkpoint io -----------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'F', 'L', 'E', 'X', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ValidationError("checkpoint truncated");
  return v;
}

void put_tensor(std::ostream& out, const Tensor& t) {
  put<std::uint32_t>(out, 2);
  put<std::uint64_t>(out, t.rows());
  put<std::uint64_t>(out, t.cols());
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(Real)));
}

Tensor get_tensor(std::istream& in) {
  const auto rank = get<std::uint32_t>(in);
  if (rank != 2) throw ValidationError("checkpoint tensor rank " + std::to_string(rank));
  const auto r = get<std::uint64_t>(in);
  const auto c = get<std::uint64_t>(in);
  if (r * c > (std::uint64_t{1} << 32)) throw ValidationError("checkpoint tensor too large");
  Tensor t(r, c);
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(Real)));
  if (!in) throw ValidationError("checkpoint truncated");
  return t;
}

}  // namespace

struct CheckpointIo {
  static void write_adam(std::ostream& out, const AdamState& a) {
    put<std::uint64_t>(out, a.t_);
    put(out, a.cfg_.lr);
    put(out, a.cfg_.beta1);
    put(out, a.cfg_.beta2);
    put(out, a.cfg_.eps);
    for (std::size_t p = 0; p < a.m_.size(); ++p) {
      put_tensor(out, a.m_[p]);
      put_tensor(out, a.v_[p]);
    }
  }
  static AdamState read_adam(std::istream& in, const ParamList& params) {
    AdamState a;
    a.t_ = get<std::uint64_t>(in);
    a.cfg_.lr = get<Real>(in);
    a.cfg_.beta1 = get<Real>(in);
    a.cfg_.beta2 = get<Real>(in);
    a.cfg_.eps = get<Real>(in);
    for (const auto& p : params) {
      a.m_.push_back(get_tensor(in));
      a.v_.push_back(get_tensor(in));
      if (!a.m_.back().same_shape(p.value) || !a.v_.back().same_shape(p.value))
        throw ValidationError("checkpoint moment shape mismatch for '" + p.name + "'");
    }
    return a;
  }
};

void write_checkpoint(std::ostream& out, const ParamList& params,
                      const AdamState* adam) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_tensor(out, p.value);
  }
  put<std::uint8_t>(out, adam ? 1 : 0);
  if (adam) CheckpointIo::write_adam(out, *adam);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ValidationError("not a checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw ValidationError("checkpoint truncated");
    ck.params.push_back({std::move(name), get_tensor(in)});
  }
  if (get<std::uint8_t>(in)) ck.adam = CheckpointIo::read_adam(in, ck.params);
  return ck;
}

void save_checkpoint(const std::string& path, const ParamList& params,
                     const AdamState* adam) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DependencyError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, params, adam);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("missing checkpoint '" + path + "'");
  return read_checkpoint(in);
}

std::string params_digest(const ParamList& params) {
  std::ostringstream buf;
  write_checkpoint(buf, params);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(buf.str())));
  return hex;
}

}  // namespace flex
