// Copyright 2026 The semfuse authors
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

// Test-only helpers shared across suites. Not part of the library.
#pragma once

#include <Eigen/Geometry>
#include <filesystem>
#include <random>
#include <string>

#include "semfuse/geometry.hpp"

namespace semfuse::test {

inline Eigen::Quaterniond random_unit_quaternion(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline RigidTransform random_transform(std::mt19937& rng, double translation_scale = 10.0) {
  std::uniform_real_distribution<double> u(-translation_scale, translation_scale);
  return RigidTransform::from_quaternion(random_unit_quaternion(rng),
                                         Eigen::Vector3d(u(rng), u(rng), u(rng)));
}

inline Point3 random_point(std::mt19937& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

/// Creates a unique scratch directory and removes it on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("semfuse_" + tag + "_" + std::to_string(counter++) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace semfuse::test
