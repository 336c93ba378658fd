#pragma once

#include <vector>

#include "ftf/circuit.hpp"

// Spectral observables derived from the composite eigen-energies: conditional
// coupler transitions, residual ZZ, coupling-strength sweeps and the emulated
// ZZ Ramsey-echo phase evolution.

namespace ftf {

/// Coupler 0->1 transition frequencies conditioned on the fluxonium state,
/// f_ij = E(|i1j>) - E(|i0j>), GHz.
struct ConditionalTransitions {
  double f_00, f_01, f_10, f_11;

  double operator()(int i, int j) const;
  /// Detunings of the three spurious transitions from f_11, GHz.
  std::vector<double> spurious_gaps() const;
};

struct ZzSweepResult {
  std::vector<double> g_12_mhz;  ///< ascending row axis
  std::vector<double> g_ic_mhz;  ///< ascending column axis
  MatrixXd chi_zz_khz;           ///< [i12, iic]
};

struct ZzRamseyResult {
  std::vector<double> tau_ns;
  std::vector<double> phase_rad;  ///< accumulated target-qubit phase per tau
  double slope_khz;               ///< least-squares phase-difference rate / 2pi
};

ConditionalTransitions conditional_transitions(const CompositeSystem& sys);

/// chi_ZZ/2pi = f(|101>) - f(|100>) - f(|001>) + f(|000>), in kHz.
double residual_zz(const CompositeSystem& sys);

/// Rebuilds the composite for every (g_12, g_ic) grid point with g_1c = g_2c
/// = g_ic (single-circuit diagonalizations are shared across the grid).
ZzSweepResult zz_sweep(const FluxoniumParams& f1, const FluxoniumParams& f2,
                       const TransmonParams& c, const TruncationSpec& trunc,
                       std::pair<double, double> g12_range_mhz,
                       std::pair<double, double> gic_range_mhz, int resolution_g12,
                       int resolution_gic);

/// Echo sequence of the ZZ measurement, evaluated from exact eigen-energies:
/// control fluxonium (F1) prepared in |control_state>, target (F2) in a
/// superposition, pi pulses on both at tau/2. The target phase is
/// +/- chi_zz * tau / 2 (angular) for control 0/1; the returned slope is the
/// least-squares rate of the phase difference between the two control
/// settings, converted to kHz.
ZzRamseyResult simulate_zz_ramsey(const CompositeSystem& sys,
                                  const std::vector<double>& taus_ns,
                                  int control_state);

}  // namespace ftf
