#include "tstg/fft.hpp"

#include <cstring>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "tstg/error.hpp"

namespace tstg {

namespace {

std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

Fft::Fft(std::vector<int> shape) : shape_(std::move(shape)), n_(1) {
  if (shape_.empty())
    throw ParameterError("Fft: empty shape");
  for (int s : shape_) {
    if (s < 1)
      throw ParameterError("Fft: non-positive extent");
    n_ *= static_cast<std::size_t>(s);
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto *buf = fftw_alloc_complex(n_);
  if (!buf)
    throw Error("Fft: allocation failed");
  buffer_ = buf;
  const int rank = static_cast<int>(shape_.size());
  fwd_ = fftw_plan_dft(rank, shape_.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft(rank, shape_.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!fwd_ || !bwd_)
    throw Error("Fft: planning failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buffer_);
}

void Fft::run(void *plan, std::vector<cplx> &data) {
  if (data.size() != n_)
    throw ParameterError("Fft: data length does not match the plan");
  std::memcpy(buffer_, data.data(), n_ * sizeof(cplx));
  fftw_execute(static_cast<fftw_plan>(plan));
  std::memcpy(data.data(), buffer_, n_ * sizeof(cplx));
}

void Fft::forward(std::vector<cplx> &data) { run(fwd_, data); }
void Fft::backward(std::vector<cplx> &data) { run(bwd_, data); }

std::vector<double> fft_wavenumbers(int n, double length) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / length;
  for (int j = 0; j < n; ++j)
    k[j] = base * (j < (n + 1) / 2 ? j : j - n);
  return k;
}

} // namespace tstg
