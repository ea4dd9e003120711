#pragma once

// Thin RAII wrapper over FFTW for complex-to-complex transforms on tensor
// grids. Plan creation is serialized internally; execution is thread-safe on
// distinct objects.

#include <vector>

#include "tstg/types.hpp"

namespace tstg {

class Fft {
public:
  // Row-major shape, last axis fastest.
  explicit Fft(std::vector<int> shape);
  ~Fft();
  Fft(const Fft &) = delete;
  Fft &operator=(const Fft &) = delete;

  std::size_t size() const noexcept { return n_; }

  // Unnormalized forward (exp(-i k x)) and backward (exp(+i k x)) transforms
  // in place.
  void forward(std::vector<cplx> &data);
  void backward(std::vector<cplx> &data);

private:
  void run(void *plan, std::vector<cplx> &data);

  std::vector<int> shape_;
  std::size_t n_;
  void *buffer_;
  void *fwd_;
  void *bwd_;
};

// Angular wavenumbers 2 pi j / L in FFT order for n points on a period L.
std::vector<double> fft_wavenumbers(int n, double length);

} // namespace tstg
