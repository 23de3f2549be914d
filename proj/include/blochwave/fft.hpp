#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace blochwave {

/// In-place complex-to-complex FFT for a fixed d-dimensional shape
/// (row-major). Plans are created once with FFTW_ESTIMATE (deterministic)
/// and reused; plan creation is serialized internally so Fft objects can be
/// built from several threads.
class Fft {
 public:
  explicit Fft(std::vector<int> shape);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  /// Unnormalized forward transform, exp(-i xi x) convention.
  void forward(std::complex<double>* data) const;
  /// Inverse transform scaled by 1/N.
  void inverse(std::complex<double>* data) const;

  long size() const { return total_; }
  const std::vector<int>& shape() const { return shape_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<int> shape_;
  long total_ = 0;
};

/// Wavenumbers 2*pi*j/length in FFT storage order (j = 0..n/2-1, -n/2..-1).
std::vector<double> fft_wavenumbers(int n, double length);

}  // namespace blochwave
