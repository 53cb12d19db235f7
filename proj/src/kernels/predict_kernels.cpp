#include "fairworld/kernels.hpp"

namespace fairworld::kernels {

void predict_margin_serial(std::span<const Tree> trees, double base, const FeatureMatrix& x,
                           std::span<double> out) {
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    double f = base;
    for (const auto& t : trees) f += t.eval([&](std::size_t j) { return x(i, j); });
    out[i] = f;
  }
}

void predict_margin_omp(std::span<const Tree> trees, double base, const FeatureMatrix& x,
                        std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(x.n_rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double f = base;
    for (const auto& t : trees) f += t.eval([&](std::size_t j) { return x(i, j); });
    out[i] = f;
  }
}

}  // namespace fairworld::kernels
