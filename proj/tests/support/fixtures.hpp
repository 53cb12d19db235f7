#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fairworld/dataset.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("fairworld_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Columns A (PA), X (numeric), B (binary), Y (target) with random content.
inline fairworld::Dataset small_dataset(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n), x(n), b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2;
    x[i] = 1.0 + 5.0 * u(gen) + a[i];
    b[i] = u(gen) < 0.3 + 0.3 * a[i];
    y[i] = u(gen) < 0.2 + 0.1 * x[i] * 0.5 + 0.2 * b[i];
  }
  using fairworld::ColumnKind;
  return fairworld::Dataset({{"A", ColumnKind::Binary, a},
                             {"X", ColumnKind::Numeric, x},
                             {"B", ColumnKind::Binary, b},
                             {"Y", ColumnKind::Binary, y}},
                            "A", "Y");
}

}  // namespace fixtures
