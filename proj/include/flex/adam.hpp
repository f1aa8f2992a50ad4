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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flex/autodiff.hpp"

namespace flex {

struct AdamConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

/// Adam with bias correction. Moments are shaped like the parameters they
/// were created for.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamList& params, AdamConfig cfg);

  /// One update. A non-finite gradient raises NumericError naming the
  /// parameter and leaves every parameter untouched.
  void step(ParamList& params, const std::vector<Tensor>& grads);

  const AdamConfig& config() const noexcept { return cfg_; }
  void set_lr(Real lr) noexcept { cfg_.lr = lr; }
  std::uint64_t steps() const noexcept { return t_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

 private:
  friend struct CheckpointIo;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// Binary checkpoint: magic "FLEXCKPT", u32 version, u32 parameter count,
/// then per parameter (u32 name length, name bytes, u32 rank, u64 dims...,
/// f64 values little-endian), then u8 has_adam and, when set, u64 step,
/// four f64 hyperparameters (lr, beta1, beta2, eps) and both moment tensors
/// per parameter in parameter order.
struct Checkpoint {
  ParamList params;
  std::optional<AdamState> adam;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParamList& params,
                      const AdamState* adam = nullptr);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const ParamList& params,
                     const AdamState* adam = nullptr);
Checkpoint load_checkpoint(const std::string& path);

/// Hex FNV-1a digest over a parameter table (names, shapes, raw values).
std::string params_digest(const ParamList& params);

}  // namespace flex
