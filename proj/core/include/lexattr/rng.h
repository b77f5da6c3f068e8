/*
 * Copyright 2026 The lexattr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LEXATTR_RNG_H_
#define LEXATTR_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace lexattr {

// Seeded generator whose outputs are identical on every platform. The
// standard distributions are implementation-defined, so the transforms from
// raw 64-bit draws are written out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1).
  double UniformOpen() {
    double u;
    do {
      u = Uniform();
    } while (u == 0.0);
    return u;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  double Normal(double mean, double stdev) { return mean + stdev * Normal(); }

  // Uniform integer in [0, n). Rejection sampling avoids modulo bias.
  std::size_t Index(std::size_t n);

  std::uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lexattr

#endif  // LEXATTR_RNG_H_
