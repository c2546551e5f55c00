/*
 * Copyright 2026 The HFSS Authors.
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

#ifndef HFSS_TESTS_TEST_UTIL_HPP_
#define HFSS_TESTS_TEST_UTIL_HPP_

#include <stdlib.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hfss/image.hpp"

namespace hfss::testing {

inline ImageTensor random_image(ImageShape shape, std::uint64_t seed,
                                std::optional<int> label = std::nullopt) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(shape.size());
  for (double& x : v) x = u(gen);
  return ImageTensor(shape, std::move(v), label);
}

// Naive 2D DFT, then a circular shift putting frequency 0 at (h/2, w/2).
// Deliberately independent of the library's transform code.
inline std::vector<std::complex<double>> brute_force_shifted_dft(const std::vector<double>& x,
                                                                 int h, int w) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  for (int ku = 0; ku < h; ++ku) {
    for (int kv = 0; kv < w; ++kv) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          const double angle =
              -2.0 * std::numbers::pi * (static_cast<double>(ku) * y / h + static_cast<double>(kv) * xx / w);
          acc += x[y * w + xx] * std::polar(1.0, angle);
        }
      }
      const int su = (ku + h / 2) % h;
      const int sv = (kv + w / 2) % w;
      out[su * w + sv] = acc;
    }
  }
  return out;
}

// Naive inverse of a shifted spectrum, returning the complex result.
inline std::vector<std::complex<double>> brute_force_shifted_idft(
    const std::vector<std::complex<double>>& f, int h, int w) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      std::complex<double> acc = 0.0;
      for (int su = 0; su < h; ++su) {
        for (int sv = 0; sv < w; ++sv) {
          const int ku = (su + h / 2) % h;
          const int kv = (sv + w / 2) % w;
          const double angle =
              2.0 * std::numbers::pi * (static_cast<double>(ku) * y / h + static_cast<double>(kv) * xx / w);
          acc += f[su * w + sv] * std::polar(1.0, angle);
        }
      }
      out[y * w + xx] = acc / static_cast<double>(h * w);
    }
  }
  return out;
}

// Cosine with k full periods across the width, values in [0, 1].
inline ImageTensor horizontal_grating(int h, int w, int k, double mean = 0.5, double amp = 0.25) {
  std::vector<double> v(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      v[y * w + x] = mean + amp * std::cos(2.0 * std::numbers::pi * k * x / w);
    }
  }
  return ImageTensor({1, h, w}, std::move(v));
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "hfss-test-XXXXXX").string();
    path_ = mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hfss::testing

#endif  // HFSS_TESTS_TEST_UTIL_HPP_
