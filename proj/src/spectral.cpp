#include "hjlab/spectral.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

// The FFTW planner is not re-entrant; plan execution on fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

void require_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) {
    throw ConfigurationError("field grid (d=" + std::to_string(a.dim()) + ", n=" +
                             std::to_string(a.n()) + ") does not match workspace grid (d=" +
                             std::to_string(b.dim()) + ", n=" + std::to_string(b.n()) + ")");
  }
}

}  // namespace

struct SpectrumWorkspace::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

SpectrumWorkspace::SpectrumWorkspace(const GridSpec& grid)
    : grid_(grid), plans_(std::make_unique<Plans>()), laplacian_(grid.size()), strides_(3, 0) {
  const int d = grid_.dim();
  std::size_t stride = 1;
  for (int a = d - 1; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = stride;
    stride *= static_cast<std::size_t>(grid_.n());
  }

  std::array<int, 3> dims{grid_.n(), grid_.n(), grid_.n()};
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    Spectrum in(grid_.size()), out(grid_.size());
    plans_->forward = fftw_plan_dft(d, dims.data(), as_fftw(in.data()), as_fftw(out.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft(d, dims.data(), as_fftw(in.data()), as_fftw(out.data()),
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plans_->forward == nullptr || plans_->backward == nullptr) {
    throw ConfigurationError("FFT planning failed");
  }

  const double four_pi_sq = kTwoPi * kTwoPi;
  for (std::size_t f = 0; f < grid_.size(); ++f) {
    double m2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double m = wavenumber(f, a);
      m2 += m * m;
    }
    laplacian_[f] = -four_pi_sq * m2;
  }
}

SpectrumWorkspace::~SpectrumWorkspace() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

int SpectrumWorkspace::wavenumber(std::size_t flat, int axis) const noexcept {
  const auto idx = static_cast<int>((flat / strides_[static_cast<std::size_t>(axis)]) %
                                    static_cast<std::size_t>(grid_.n()));
  return wavenumber(idx);
}

double SpectrumWorkspace::gradient_multiplier(std::size_t flat, int axis) const noexcept {
  const int m = wavenumber(flat, axis);
  if (m == -grid_.n() / 2) return 0.0;
  return kTwoPi * m;
}

Spectrum SpectrumWorkspace::forward(std::span<const double> values) const {
  Spectrum in(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) in[i] = values[i];
  return forward_complex(in);
}

Spectrum SpectrumWorkspace::forward_complex(const Spectrum& values) const {
  if (values.size() != grid_.size()) throw ConfigurationError("transform input has the wrong size");
  Spectrum out(grid_.size());
  fftw_execute_dft(plans_->forward, as_fftw(values.data()), as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<double> SpectrumWorkspace::inverse(const Spectrum& coeffs) const {
  if (coeffs.size() != grid_.size()) throw ConfigurationError("transform input has the wrong size");
  Spectrum out(grid_.size());
  fftw_execute_dft(plans_->backward, as_fftw(coeffs.data()), as_fftw(out.data()));
  std::vector<double> v(grid_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = out[i].real();
  return v;
}

Spectrum SpectrumWorkspace::derivative(const Spectrum& coeffs, int axis) const {
  Spectrum out(coeffs.size());
  for (std::size_t f = 0; f < coeffs.size(); ++f) {
    out[f] = std::complex<double>(0.0, gradient_multiplier(f, axis)) * coeffs[f];
  }
  return out;
}

Spectrum SpectrumWorkspace::second_derivative(const Spectrum& coeffs, int i, int j) const {
  Spectrum out(coeffs.size());
  if (i == j) {
    for (std::size_t f = 0; f < coeffs.size(); ++f) {
      const double m = kTwoPi * wavenumber(f, i);
      out[f] = -m * m * coeffs[f];
    }
  } else {
    for (std::size_t f = 0; f < coeffs.size(); ++f) {
      out[f] = -gradient_multiplier(f, i) * gradient_multiplier(f, j) * coeffs[f];
    }
  }
  return out;
}

Spectrum SpectrumWorkspace::laplacian(const Spectrum& coeffs) const {
  Spectrum out(coeffs.size());
  for (std::size_t f = 0; f < coeffs.size(); ++f) out[f] = laplacian_[f] * coeffs[f];
  return out;
}

const SpectrumWorkspace& SpectrumWorkspace::fine() const {
  std::call_once(fine_once_, [this] { fine_ = std::make_unique<SpectrumWorkspace>(grid_.refined()); });
  return *fine_;
}

namespace {

// Visits the fine-grid slots that represent one coarse mode. The coarse
// Nyquist wavenumber -n/2 is split evenly between -n/2 and +n/2 on the 2n grid.
template <class Visit>
void for_each_fine_slot(const SpectrumWorkspace& coarse, std::size_t flat, Visit&& visit) {
  const int d = coarse.grid().dim();
  const int n = coarse.grid().n();
  const int nf = 2 * n;
  std::array<int, 3> first{0, 0, 0}, second{0, 0, 0};
  std::array<bool, 3> split{false, false, false};
  for (int a = 0; a < d; ++a) {
    const int m = coarse.wavenumber(flat, a);
    first[a] = m >= 0 ? m : nf + m;
    if (m == -n / 2) {
      split[a] = true;
      second[a] = n / 2;
    }
  }
  const GridSpec fg = coarse.grid().refined();
  const int combos = 1 << d;
  for (int mask = 0; mask < combos; ++mask) {
    std::array<int, 3> idx = first;
    double weight = 1.0;
    bool valid = true;
    for (int a = 0; a < d; ++a) {
      if (split[a]) {
        weight *= 0.5;
        if (mask & (1 << a)) idx[a] = second[a];
      } else if (mask & (1 << a)) {
        valid = false;
      }
    }
    if (valid) visit(fg.flat(idx), weight);
  }
}

}  // namespace

std::vector<double> SpectrumWorkspace::upsample(const Spectrum& coeffs) const {
  const auto& f = fine();
  Spectrum padded(f.grid().size(), std::complex<double>(0.0, 0.0));
  for (std::size_t c = 0; c < coeffs.size(); ++c) {
    if (coeffs[c] == std::complex<double>(0.0, 0.0)) continue;
    for_each_fine_slot(*this, c, [&](std::size_t slot, double w) { padded[slot] += w * coeffs[c]; });
  }
  return f.inverse(padded);
}

Spectrum SpectrumWorkspace::downsample(std::span<const double> fine_values) const {
  const auto& f = fine();
  const Spectrum fc = f.forward(fine_values);
  Spectrum out(grid_.size(), std::complex<double>(0.0, 0.0));
  for (std::size_t c = 0; c < out.size(); ++c) {
    for_each_fine_slot(*this, c, [&](std::size_t slot, double) { out[c] += fc[slot]; });
  }
  return out;
}

VectorField gradient(const ScalarField& u, const SpectrumWorkspace& ws) {
  require_grid(u.grid(), ws.grid());
  const Spectrum uh = ws.forward(u.values());
  std::vector<ScalarField> comps;
  comps.reserve(static_cast<std::size_t>(u.grid().dim()));
  for (int a = 0; a < u.grid().dim(); ++a) {
    comps.emplace_back(u.grid(), ws.inverse(ws.derivative(uh, a)));
  }
  return VectorField(std::move(comps));
}

ScalarField laplacian(const ScalarField& u, const SpectrumWorkspace& ws) {
  require_grid(u.grid(), ws.grid());
  const Spectrum uh = ws.forward(u.values());
  return ScalarField(u.grid(), ws.inverse(ws.laplacian(uh)));
}

HessianField hessian(const ScalarField& u, const SpectrumWorkspace& ws) {
  require_grid(u.grid(), ws.grid());
  const Spectrum uh = ws.forward(u.values());
  const int d = u.grid().dim();
  std::vector<ScalarField> entries;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      entries.emplace_back(u.grid(), ws.inverse(ws.second_derivative(uh, i, j)));
    }
  }
  return HessianField(std::move(entries));
}

ScalarField nonlinear_eval(const PointwiseExpr& expr, std::span<const ScalarField> inputs,
                           int oversample, const SpectrumWorkspace& ws) {
  if (inputs.empty()) throw ConfigurationError("nonlinear_eval needs at least one input");
  for (const auto& in : inputs) require_grid(in.grid(), ws.grid());
  if (oversample != 1 && oversample != 2) {
    throw ConfigurationError("oversampling factor must be 1 or 2, got " + std::to_string(oversample));
  }

  std::vector<double> args(inputs.size());
  if (oversample == 1) {
    std::vector<double> out(ws.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t k = 0; k < inputs.size(); ++k) args[k] = inputs[k][i];
      out[i] = expr(args);
      if (!std::isfinite(out[i])) {
        throw EvaluationError("nonlinear expression is not finite at node " + std::to_string(i), i);
      }
    }
    return ScalarField(ws.grid(), std::move(out));
  }

  std::vector<std::vector<double>> fine_inputs;
  fine_inputs.reserve(inputs.size());
  for (const auto& in : inputs) fine_inputs.push_back(ws.upsample(ws.forward(in.values())));
  const std::size_t nf = ws.fine().grid().size();
  std::vector<double> fine_out(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    for (std::size_t k = 0; k < inputs.size(); ++k) args[k] = fine_inputs[k][i];
    fine_out[i] = expr(args);
    if (!std::isfinite(fine_out[i])) {
      throw EvaluationError(
          "nonlinear expression is not finite at oversampled node " + std::to_string(i), i);
    }
  }
  return ScalarField(ws.grid(), ws.inverse(ws.downsample(fine_out)));
}

double spectral_energy(const ScalarField& u, const SpectrumWorkspace& ws) {
  require_grid(u.grid(), ws.grid());
  const Spectrum uh = ws.forward(u.values());
  double s = 0.0;
  for (const auto& c : uh) s += std::norm(c);
  return s;
}

}  // namespace hjlab
