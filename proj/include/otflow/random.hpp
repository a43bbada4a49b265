// Copyright 2026 The otflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace otflow {

//! Seed of a random stream. All randomness in the library is a pure function
//! of (seed, stream).
struct RngState
{
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

//! Philox4x32-10 counter-based block generator (Salmon et al., SC'11).
//! Output is bit-identical on every platform.
std::array<std::uint32_t, 4>
philox4x32_10(std::array<std::uint32_t, 4> counter,
              std::array<std::uint32_t, 2> key);

//! Random stream built on Philox4x32-10.
//!
//! The key is the 64-bit seed; the counter holds a 64-bit block index and the
//! 64-bit stream id. Uniforms take the top 53 bits of a 64-bit draw; normals
//! use the Box-Muller transform, consuming two uniforms per pair.
class Rng
{
public:
  explicit Rng(RngState state = {});
  Rng(std::uint64_t seed, std::uint64_t stream)
    : Rng(RngState{ seed, stream })
  {}

  std::uint64_t next_u64();
  //! Uniform on [0, 1).
  double uniform();
  //! Uniform on (0, 1].
  double uniform_positive();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  //! Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& values)
  {
    for (std::size_t i = values.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

  //! Independent stream for sub-task `index` (e.g. a row), derived from this
  //! stream's state without consuming it.
  Rng derive(std::uint64_t index) const;

  const RngState& state() const { return state_; }

private:
  void refill();

  RngState state_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

} // namespace otflow
