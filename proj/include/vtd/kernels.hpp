#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. Every kernel has a serial reference in
// `serial::` and an OpenMP version in `parallel::` that must return
// bit-identical results; library code calls the parallel versions.
namespace vtd::kernels {

// Row-major dense matrix of training rows.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
};

namespace serial {

// Maxima of consecutive non-overlapping windows of length `window`.
// A trailing partial window becomes its own window when it holds at least
// half a window of samples, otherwise it is merged into the previous one.
std::vector<double> window_maxima(std::span<const double> x, std::size_t window);

// Centered median over [i - half, i + half], clipped at the edges. Even
// counts average the two middle values.
std::vector<double> sliding_median(std::span<const double> x, std::size_t half);

std::vector<double> squared_distances(const RowMatrix& rows, std::span<const double> query);

}  // namespace serial

namespace parallel {

std::vector<double> window_maxima(std::span<const double> x, std::size_t window);
std::vector<double> sliding_median(std::span<const double> x, std::size_t half);
std::vector<double> squared_distances(const RowMatrix& rows, std::span<const double> query);

}  // namespace parallel

int max_threads() noexcept;

}  // namespace vtd::kernels
