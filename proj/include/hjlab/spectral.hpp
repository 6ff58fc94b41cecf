#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <vector>

#include "hjlab/field.hpp"
#include "hjlab/grid.hpp"

namespace hjlab {

/// Allocator returning 64-byte aligned storage so FFT plans can use SIMD kernels.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Normalized Fourier coefficients in transform order: entry at mode m is
/// (1/N) sum_j u_j exp(-2 pi i m . j / n), so the inverse needs no scaling.
using Spectrum = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

/// Transform plans and Fourier multipliers for one grid (period-1 convention:
/// d/dx_j <-> 2 pi i m_j, Laplacian <-> -4 pi^2 |m|^2, m in {-n/2,...,n/2-1}^d).
///
/// Read-only after construction and safe to share between threads. The
/// oversampling partner on the 2n grid is built on first use.
class SpectrumWorkspace {
 public:
  explicit SpectrumWorkspace(const GridSpec& grid);
  ~SpectrumWorkspace();
  SpectrumWorkspace(const SpectrumWorkspace&) = delete;
  SpectrumWorkspace& operator=(const SpectrumWorkspace&) = delete;

  const GridSpec& grid() const noexcept { return grid_; }

  /// Signed wavenumber of a transform index along one axis.
  int wavenumber(int index) const noexcept { return index < grid_.n() / 2 ? index : index - grid_.n(); }
  /// Signed wavenumber of a flat mode index along `axis`.
  int wavenumber(std::size_t flat, int axis) const noexcept;
  double laplacian_multiplier(std::size_t flat) const noexcept { return laplacian_[flat]; }
  /// Imaginary part of the gradient multiplier (the real part is zero).
  /// The Nyquist mode is mapped to 0 so derivatives of real fields stay real.
  double gradient_multiplier(std::size_t flat, int axis) const noexcept;

  Spectrum forward(std::span<const double> values) const;
  Spectrum forward_complex(const Spectrum& values) const;
  /// Real part of the inverse transform.
  std::vector<double> inverse(const Spectrum& coeffs) const;

  Spectrum derivative(const Spectrum& coeffs, int axis) const;
  Spectrum second_derivative(const Spectrum& coeffs, int i, int j) const;
  Spectrum laplacian(const Spectrum& coeffs) const;

  /// Workspace of the 2n grid used for oversampled nonlinear evaluation.
  const SpectrumWorkspace& fine() const;
  /// Zero-pads coefficients onto the 2n grid and returns the fine nodal values.
  std::vector<double> upsample(const Spectrum& coeffs) const;
  /// Transforms fine nodal values and truncates back to this grid's band.
  Spectrum downsample(std::span<const double> fine_values) const;

 private:
  struct Plans;
  GridSpec grid_;
  std::unique_ptr<Plans> plans_;
  std::vector<double> laplacian_;
  std::vector<std::size_t> strides_;
  mutable std::once_flag fine_once_;
  mutable std::unique_ptr<SpectrumWorkspace> fine_;
};

VectorField gradient(const ScalarField& u, const SpectrumWorkspace& ws);
ScalarField laplacian(const ScalarField& u, const SpectrumWorkspace& ws);
HessianField hessian(const ScalarField& u, const SpectrumWorkspace& ws);

/// Pointwise nonlinearity applied to a tuple of fields (one value per input at each node).
using PointwiseExpr = std::function<double(std::span<const double>)>;

/// Applies expr pointwise. oversample = 1 evaluates at the nodes; oversample = 2
/// zero-pads every input to the 2n grid, evaluates there and truncates back.
ScalarField nonlinear_eval(const PointwiseExpr& expr, std::span<const ScalarField> inputs,
                           int oversample, const SpectrumWorkspace& ws);

/// Sum of |c_m|^2 over the spectrum of u; equals ||u||_2^2 by Parseval.
double spectral_energy(const ScalarField& u, const SpectrumWorkspace& ws);

}  // namespace hjlab
