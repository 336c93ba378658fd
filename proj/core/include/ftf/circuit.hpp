#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Circuit Hamiltonians of the fluxonium-transmon-fluxonium system.
//
// Unit conventions used throughout the library:
//   - all energies are E/h in GHz,
//   - coupling strengths in parameter structs are g/2pi in MHz,
//   - time is in ns, so phases are 2*pi*f*t with f in GHz.

namespace ftf {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Single-circuit diagonalization failed to converge under basis doubling.
struct ConvergenceError : std::runtime_error {
  int level;  ///< index of the first eigenlevel above tolerance
  double shift_ghz;
  ConvergenceError(const std::string& what, int level_, double shift_)
      : std::runtime_error(what), level(level_), shift_ghz(shift_) {}
};

/// Dressed-state labeling was ambiguous near an avoided crossing.
struct LabelingError : std::runtime_error {
  int dressed_a, dressed_b;  ///< contested dressed indices
  LabelingError(const std::string& what, int a, int b)
      : std::runtime_error(what), dressed_a(a), dressed_b(b) {}
};

struct FluxoniumParams {
  double e_c;      ///< charging energy E_C/h, GHz
  double e_l;      ///< inductive energy E_L/h, GHz
  double e_j;      ///< Josephson energy E_J/h, GHz
  double phi_ext;  ///< external flux phase, radians

  void validate() const;
};

struct TransmonParams {
  double e_c;            ///< charging energy E_C/h, GHz
  double e_j_total;      ///< full SQUID Josephson energy E_J/h, GHz
  double flux_fraction;  ///< external flux in units of the flux quantum

  /// Effective Josephson energy at the flux bias point, GHz.
  double e_j_effective() const;
  void validate() const;
};

struct CouplingParams {
  double g_12;  ///< fluxonium-fluxonium charge coupling, g/2pi in MHz
  double g_1c;  ///< fluxonium-1 to coupler charge coupling, MHz
  double g_2c;  ///< fluxonium-2 to coupler charge coupling, MHz

  void validate() const;
};

struct TruncationSpec {
  int fluxonium_levels = 4;
  int transmon_levels = 3;
  /// Basis states used for each single-circuit pre-diagonalization
  /// (harmonic-oscillator states for a fluxonium, charge states for the
  /// transmon, where the charge basis spans 2*cutoff+1 states).
  int single_circuit_basis_size = 120;

  void validate() const;
};

/// Lowest levels of one circuit plus operator matrix elements in its
/// eigenbasis.
struct SingleCircuit {
  VectorXd energies;    ///< ascending, GHz
  MatrixXcd charge;     ///< n-hat in the eigenbasis
  MatrixXcd phase;      ///< phi-hat in the eigenbasis (empty for a transmon)
  double f01() const { return energies[1] - energies[0]; }
};

/// Bare product label |f1, c, f2>.
struct BareLabel {
  int f1 = 0;
  int c = 0;
  int f2 = 0;
  auto operator<=>(const BareLabel&) const = default;
};

std::string to_string(const BareLabel& label);

/// Diagonalized composite system with dressed-state labels and the charge
/// operators of all three circuits expressed in the dressed basis.
class CompositeSystem {
 public:
  VectorXd eigenvalues;  ///< ascending, GHz
  MatrixXcd eigenvectors;  ///< columns: dressed states in the bare product basis
  std::vector<BareLabel> labels;  ///< dressed index -> bare label
  MatrixXcd n_f1, n_c, n_f2;      ///< charge operators, dressed basis
  int f1_levels = 0, c_levels = 0, f2_levels = 0;
  std::vector<std::string> warnings;  ///< labeling tie-break notes

  int dim() const { return static_cast<int>(eigenvalues.size()); }

  /// Dressed index carrying the given bare label, if present.
  std::optional<int> index_of(const BareLabel& label) const;

  /// Same, but throws a descriptive error when the label is absent.
  int require(const BareLabel& label) const;

  /// Energy of the dressed state labeled |f1 c f2>, GHz.
  double energy(const BareLabel& label) const { return eigenvalues[require(label)]; }
};

/// Cached single-circuit diagonalizations; lets coupling sweeps rebuild the
/// composite without repeating the expensive pre-diagonalizations.
struct PrediagonalizedCircuits {
  SingleCircuit f1, c, f2;
  TruncationSpec trunc;
};

/// strict: ambiguous max-overlap assignments raise LabelingError (default).
/// lenient: contested dressed states are left unlabeled ({-1,-1,-1}); used for
/// truncation-convergence diagnostics where high-lying states may hybridize
/// beyond recognition.
enum class LabelPolicy { strict, lenient };

// -- Operations --------------------------------------------------------

/// Diagonalize a single fluxonium in the harmonic-oscillator basis of its
/// (E_C, E_L) oscillator; the cosine term is evaluated through the exact
/// spectral decomposition of the truncated phase operator.
///
/// Returns the lowest n_levels energies (GHz) plus charge and phase operator
/// matrix elements in the eigenbasis. Convergence is verified by doubling
/// basis_size; a kept level moving more than 1 kHz raises ConvergenceError.
SingleCircuit diagonalize_fluxonium(const FluxoniumParams& params, int basis_size,
                                    int n_levels);

/// Diagonalize the transmon coupler in the charge basis n in [-cutoff, cutoff].
/// junction_phase_offset shifts the cosine argument; 0 gives the conventional
/// -E_J cos(phi) well and pi the opposite sign convention (identical spectra,
/// gauge-related matrix elements).
SingleCircuit diagonalize_transmon(const TransmonParams& params, int charge_cutoff,
                                   int n_levels, double junction_phase_offset = 0.0);

PrediagonalizedCircuits prediagonalize(const FluxoniumParams& f1,
                                       const FluxoniumParams& f2,
                                       const TransmonParams& c,
                                       const TruncationSpec& trunc,
                                       double junction_phase_offset = 0.0);

/// Assemble and diagonalize the composite Hamiltonian in the product of
/// single-circuit eigenbases, then label dressed states by maximum overlap
/// with the bare product states.
CompositeSystem assemble_composite(const PrediagonalizedCircuits& parts,
                                   const CouplingParams& g,
                                   LabelPolicy policy = LabelPolicy::strict);

CompositeSystem build_composite(const FluxoniumParams& f1, const FluxoniumParams& f2,
                                const TransmonParams& c, const CouplingParams& g,
                                const TruncationSpec& trunc);

}  // namespace ftf
