#include "bloch/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace bloch::fft {
namespace {

// FFTW planning is not thread-safe; execution with new-array is. Plans are
// unaligned because std::vector storage need not match FFTW alignment.
struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<std::vector<int>, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  // axis == -1 selects the full multidimensional transform.
  fftw_plan get(std::span<const int> shape, int axis, int sign) {
    std::vector<int> dims(shape.begin(), shape.end());
    auto key = std::make_tuple(dims, axis, sign);
    std::lock_guard lock(mutex);
    if (auto it = plans.find(key); it != plans.end()) return it->second;

    const std::size_t total =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    auto* scratch = fftw_alloc_complex(total);
    fftw_plan plan = nullptr;
    if (axis < 0) {
      plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch,
                           sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    } else {
      // Axis transform as a batch: outer blocks times inner contiguous strides.
      int n = dims[axis];
      int inner = 1;
      for (std::size_t a = axis + 1; a < dims.size(); ++a) inner *= dims[a];
      int outer = static_cast<int>(total / (static_cast<std::size_t>(n) * inner));
      fftw_iodim len{n, inner, inner};
      fftw_iodim loops[2] = {{outer, n * inner, n * inner}, {inner, 1, 1}};
      plan = fftw_plan_guru_dft(1, &len, 2, loops, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("fftw planning failed");
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void check_size(std::span<cplx> data, std::span<const int> shape) {
  std::size_t total = 1;
  for (int n : shape) {
    if (n <= 0) throw std::invalid_argument("fft: non-positive axis length");
    total *= static_cast<std::size_t>(n);
  }
  if (total != data.size()) throw std::invalid_argument("fft: data size does not match shape");
}

}  // namespace

void transform(std::span<cplx> data, std::span<const int> shape, Direction dir) {
  check_size(data, shape);
  fftw_plan plan = cache().get(shape, -1, dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

void transform_axis(std::span<cplx> data, std::span<const int> shape, int axis, Direction dir) {
  check_size(data, shape);
  if (axis < 0 || axis >= static_cast<int>(shape.size()))
    throw std::invalid_argument("fft: axis out of range");
  fftw_plan plan =
      cache().get(shape, axis, dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

std::vector<cplx> derivative(std::span<const cplx> values, std::span<const int> shape, int axis,
                             double period_cells) {
  std::vector<cplx> work(values.begin(), values.end());
  transform_axis(work, shape, axis, Direction::forward);
  const int n = shape[axis];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  const std::size_t block = inner * n;
  const double scale = 1.0 / n;
  for (std::size_t base = 0; base < work.size(); base += block) {
    for (int i = 0; i < n; ++i) {
      const int k = wavenumber(i, n);
      const cplx factor =
          (2 * i == n) ? cplx{0.0} : cplx{0.0, k / period_cells * scale};
      cplx* row = work.data() + base + static_cast<std::size_t>(i) * inner;
      for (std::size_t t = 0; t < inner; ++t) row[t] *= factor;
    }
  }
  transform_axis(work, shape, axis, Direction::backward);
  return work;
}

}  // namespace bloch::fft
