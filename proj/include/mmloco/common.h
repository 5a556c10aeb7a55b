// Copyright 2026 The mmloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMLOCO_COMMON_H_
#define MMLOCO_COMMON_H_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmloco {

inline constexpr std::string_view kToolName = "mmloco";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Malformed arguments, files or configurations.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Optimization produced a non-finite loss or parameters.
class TrainingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random stream with portable transforms. The engine output is fixed by the
// standard; uniform and normal draws are computed here rather than through
// <random> distributions so results do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, stream, index); used to give every
  // episode its own generator regardless of which worker runs it.
  static Rng Derive(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t index = 0);

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n);
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Calls fn(i) for i in [0, n) on up to `workers` threads. Work is handed out
// dynamically; fn must only touch state owned by index i. The first
// exception thrown by any call is rethrown after all threads finish.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

// 64-bit FNV-1a over a byte string; used for config hashes in file headers.
std::uint64_t Fnv1a64(std::string_view bytes);
std::string HexDigest(std::uint64_t value);

}  // namespace mmloco

#endif  // MMLOCO_COMMON_H_
