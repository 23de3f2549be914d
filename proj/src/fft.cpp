#include "blochwave/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "blochwave/errors.hpp"
#include "blochwave/kernels.hpp"

namespace blochwave {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft::Fft(std::vector<int> shape) : shape_(std::move(shape)) {
  total_ = 1;
  for (int n : shape_) {
    if (n < 1) throw Error("Fft: invalid shape");
    total_ *= n;
  }
  impl_ = std::make_unique<Impl>();
  std::vector<std::complex<double>> probe(total_);
  auto* buf = reinterpret_cast<fftw_complex*>(probe.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->fwd = fftw_plan_dft(static_cast<int>(shape_.size()), shape_.data(),
                             buf, buf, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->bwd = fftw_plan_dft(static_cast<int>(shape_.size()), shape_.data(),
                             buf, buf, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!impl_->fwd || !impl_->bwd) throw Error("Fft: plan creation failed");
}

Fft::~Fft() {
  if (impl_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
  }
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(impl_->fwd, buf, buf);
}

void Fft::inverse(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(impl_->bwd, buf, buf);
  kernels::cscale(data, 1.0 / static_cast<double>(total_), total_);
}

std::vector<double> fft_wavenumbers(int n, double length) {
  std::vector<double> xi(n);
  const double base = 2.0 * M_PI / length;
  for (int j = 0; j < n; ++j) {
    const int jj = (j < (n + 1) / 2) ? j : j - n;
    xi[j] = base * jj;
  }
  return xi;
}

}  // namespace blochwave
