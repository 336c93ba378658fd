#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ftf/circuit.hpp"

// Drive-envelope synthesis and spectral analysis.
//
// Envelope amplitudes are ordinary frequencies in GHz: the drive enters the
// Hamiltonian as H/h = [omega_I(t) cos(2 pi f_d t) - omega_Q(t) sin(2 pi f_d t)] n-hat.
// Quadrature (DRAG) components use the detuning in GHz; the conventional
// angular-frequency form Q = -(1/Delta) dI/dt becomes Q(t) = -dI/dt / (2 pi delta).

namespace ftf {

enum class ShapeKind { cosine, drag, fast_drag, sampled };

std::string to_string(ShapeKind kind);

struct PulseEnvelope {
  double t_g = 0;           ///< gate duration, ns
  double sample_rate = 10;  ///< samples per ns
  std::vector<double> i_samples, q_samples;  ///< GHz
  ShapeKind shape_kind = ShapeKind::cosine;

  // Analytic description, when available: I(t) = sum_n c[n-1]*(1 - cos(2 pi n t/t_g)),
  // Q per the quadrature rule with drag_delta (0 means Q = 0).
  std::vector<double> cosine_coeffs;  ///< GHz
  double drag_delta = 0;              ///< GHz detuning used for the quadrature term
  bool analytic = true;

  double value_i(double t) const;  ///< envelope at arbitrary t in [0, t_g]
  double value_q(double t) const;
  double peak() const;

  /// Largest cosine harmonic index present (1 for a plain cosine pulse).
  int harmonics() const { return analytic ? int(cosine_coeffs.size()) : 0; }
};

/// Stop-band specification for the Fourier-engineered pulse. Band edges are
/// frequencies relative to the drive carrier (detunings, GHz); the default
/// device bands are 5 MHz windows centered on f_00 - f_d, f_01 - f_d and
/// f_10 - f_d. Weights default to the squared conditional Rabi rates.
struct FastDragSpec {
  int n_components = 3;
  std::vector<std::pair<double, double>> bands;  ///< (f_low, f_high), GHz
  std::vector<double> weights;
  double target_angle = M_PI;  ///< rotation-angle normalization, radians

  void validate() const;
};

struct PulseSpectrum {
  std::vector<double> freq_ghz;       ///< absolute frequency grid
  std::vector<complexd> amplitude;    ///< FT of (I + iQ) shifted to the carrier
  /// Band power relative to the rotation-equivalent cosine pulse, dB.
  struct BandPower {
    double f_low, f_high;  ///< absolute GHz
    double power;          ///< integrated |amplitude|^2 over the band
    double rel_cosine_db;
  };
  std::vector<BandPower> band_report;
};

// -- Operations --------------------------------------------------------

/// Raised cosine: I(t) = (amplitude/2)(1 - cos(2 pi t/t_g)), Q = 0.
PulseEnvelope cosine_envelope(double t_g, double amplitude, double sample_rate = 10.0);

/// Attach the derivative quadrature Q(t) = -dI/dt / (2 pi delta).
/// Analytic for cosine-series envelopes, spectral (DFT) for sampled input.
PulseEnvelope drag_quadrature(const PulseEnvelope& envelope, double delta);

/// Closed-form Fourier transform of g_n(t) = 1 - cos(2 pi n t/t_g) on [0, t_g],
/// convention g-hat(f) = integral g_n(t) exp(-2 pi i f t) dt.
complexd gn_fourier(int n, double t_g, double f);

/// Solve the equality-constrained band-power minimization for the cosine-series
/// coefficients: minimize sum_i w_i * int_band_i |sum_n c_n g-hat_n(f)|^2 df
/// subject to sum_n c_n t_g = target_angle. Returns c (rad/ns units).
std::vector<double> solve_fast_drag(const FastDragSpec& spec, double t_g);

/// Assemble the Fourier-engineered envelope I = A sum_n c_n (1-cos(2 pi n t/t_g))
/// with the derivative quadrature at detuning delta (delta = 0 skips Q).
PulseEnvelope fast_drag_envelope(const FastDragSpec& spec, double t_g,
                                 double amplitude_scale, double sample_rate,
                                 double delta);

/// Spectrum of the carrier-shifted complex envelope on the given absolute
/// frequency grid, with integrated band powers for the requested stop-bands
/// (absolute frequencies) quoted against the rotation-equivalent cosine pulse.
PulseSpectrum pulse_spectrum(const PulseEnvelope& envelope, double carrier_ghz,
                             const std::vector<double>& grid_ghz,
                             const std::vector<std::pair<double, double>>& bands = {});

/// FT of the complex envelope I + iQ at detuning f from the carrier.
complexd envelope_fourier(const PulseEnvelope& envelope, double detuning_ghz);

/// Integral of |envelope_fourier|^2 over a detuning window.
double envelope_band_power(const PulseEnvelope& envelope, double f_low, double f_high);

/// Adaptive Gauss-Legendre quadrature (15-point panels, bisected until the
/// panel estimate is stable to abs_tol).
double adaptive_gauss_legendre(const std::function<double(double)>& f, double a,
                               double b, double abs_tol);

}  // namespace ftf
