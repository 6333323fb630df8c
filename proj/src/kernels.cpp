#include "vtd/kernels.hpp"

#include <algorithm>
#include <string>

#include "vtd/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vtd::kernels {
namespace {

struct WindowPlan {
  std::size_t count = 0;
  std::size_t window = 0;
  std::size_t n = 0;

  std::size_t begin(std::size_t w) const { return w * window; }
  std::size_t end(std::size_t w) const { return w + 1 == count ? n : (w + 1) * window; }
};

WindowPlan plan_windows(std::size_t n, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::InvalidConfig, "window length must be at least one sample");
  WindowPlan p{n / window, window, n};
  const std::size_t rem = n % window;
  if (p.count == 0) {
    p.count = n == 0 ? 0 : 1;
  } else if (rem * 2 >= window && rem > 0) {
    ++p.count;
  }
  return p;
}

double window_max(std::span<const double> x, const WindowPlan& p, std::size_t w) {
  return *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(p.begin(w)),
                           x.begin() + static_cast<std::ptrdiff_t>(p.end(w)));
}

double median_at(std::span<const double> x, std::size_t i, std::size_t half,
                 std::vector<double>& buf) {
  const std::size_t lo = i >= half ? i - half : 0;
  const std::size_t hi = std::min(x.size() - 1, i + half);
  buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi + 1));
  const std::size_t m = buf.size() / 2;
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(m), buf.end());
  const double upper = buf[m];
  if (buf.size() % 2 == 1) return upper;
  const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(m));
  return (lower + upper) / 2.0;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    d += t * t;
  }
  return d;
}

void check_query(const RowMatrix& rows, std::span<const double> query) {
  if (query.size() != rows.cols) {
    throw Error(ErrorCode::LengthMismatch, "query has " + std::to_string(query.size()) +
                                               " features, rows have " + std::to_string(rows.cols));
  }
}

}  // namespace

namespace serial {

std::vector<double> window_maxima(std::span<const double> x, std::size_t window) {
  const WindowPlan p = plan_windows(x.size(), window);
  std::vector<double> out(p.count);
  for (std::size_t w = 0; w < p.count; ++w) out[w] = window_max(x, p, w);
  return out;
}

std::vector<double> sliding_median(std::span<const double> x, std::size_t half) {
  std::vector<double> out(x.size());
  std::vector<double> buf;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = median_at(x, i, half, buf);
  return out;
}

std::vector<double> squared_distances(const RowMatrix& rows, std::span<const double> query) {
  check_query(rows, query);
  std::vector<double> out(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) out[i] = squared_distance(rows.row(i), query);
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> window_maxima(std::span<const double> x, std::size_t window) {
  const WindowPlan p = plan_windows(x.size(), window);
  std::vector<double> out(p.count);
  const auto count = static_cast<std::ptrdiff_t>(p.count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t w = 0; w < count; ++w) {
    out[static_cast<std::size_t>(w)] = window_max(x, p, static_cast<std::size_t>(w));
  }
  return out;
}

std::vector<double> sliding_median(std::span<const double> x, std::size_t half) {
  std::vector<double> out(x.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = median_at(x, static_cast<std::size_t>(i), half, buf);
    }
  }
  return out;
}

std::vector<double> squared_distances(const RowMatrix& rows, std::span<const double> query) {
  check_query(rows, query);
  std::vector<double> out(rows.rows);
  const auto n = static_cast<std::ptrdiff_t>(rows.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = squared_distance(rows.row(static_cast<std::size_t>(i)), query);
  }
  return out;
}

}  // namespace parallel

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace vtd::kernels
