#include "ftf/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ftf {
namespace {

constexpr double kLevelTolGhz = 1e-6;  // 1 kHz convergence gate

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

// Deterministic eigenvector gauge: make the largest-magnitude component of
// each column real and positive.
void fix_column_phases(MatrixXcd& v) {
  for (Eigen::Index col = 0; col < v.cols(); ++col) {
    Eigen::Index imax = 0;
    v.col(col).cwiseAbs().maxCoeff(&imax);
    const complexd pivot = v(imax, col);
    if (std::abs(pivot) > 0) v.col(col) *= std::conj(pivot) / std::abs(pivot);
  }
}

struct FluxoniumMatrices {
  VectorXd energies;
  MatrixXcd charge;
  MatrixXcd phase;
};

FluxoniumMatrices fluxonium_eigensystem(const FluxoniumParams& p, int basis_size,
                                        int n_levels) {
  const double phi_zpf = std::pow(2.0 * p.e_c / p.e_l, 0.25);
  const double n_zpf = 1.0 / (2.0 * phi_zpf);
  const double f_plasma = std::sqrt(8.0 * p.e_c * p.e_l);

  // phi-hat in the oscillator basis: tridiagonal real symmetric.
  MatrixXd phi = MatrixXd::Zero(basis_size, basis_size);
  for (int k = 0; k + 1 < basis_size; ++k) {
    phi(k, k + 1) = phi(k + 1, k) = phi_zpf * std::sqrt(double(k + 1));
  }

  // cos(phi-hat - phi_ext) through the spectral decomposition of phi-hat.
  Eigen::SelfAdjointEigenSolver<MatrixXd> phi_eig(phi);
  const VectorXd x = phi_eig.eigenvalues();
  const MatrixXd w = phi_eig.eigenvectors();
  VectorXd cosx(basis_size);
  for (int k = 0; k < basis_size; ++k) cosx[k] = std::cos(x[k] - p.phi_ext);
  MatrixXd h = w * cosx.asDiagonal() * w.transpose();
  h *= -p.e_j;
  for (int k = 0; k < basis_size; ++k) h(k, k) += f_plasma * (k + 0.5);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
  MatrixXcd v = eig.eigenvectors().leftCols(n_levels).cast<complexd>();
  fix_column_phases(v);

  MatrixXcd n_op = MatrixXcd::Zero(basis_size, basis_size);
  for (int k = 0; k + 1 < basis_size; ++k) {
    n_op(k + 1, k) = complexd(0.0, n_zpf * std::sqrt(double(k + 1)));
    n_op(k, k + 1) = complexd(0.0, -n_zpf * std::sqrt(double(k + 1)));
  }

  FluxoniumMatrices out;
  out.energies = eig.eigenvalues().head(n_levels);
  out.charge = v.adjoint() * n_op * v;
  out.phase = v.adjoint() * phi.cast<complexd>() * v;
  return out;
}

struct TransmonMatrices {
  VectorXd energies;
  MatrixXcd charge;
};

TransmonMatrices transmon_eigensystem(const TransmonParams& p, int cutoff, int n_levels,
                                      double junction_phase_offset) {
  const int dim = 2 * cutoff + 1;
  const double e_j = p.e_j_effective();

  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double n = k - cutoff;
    h(k, k) = 4.0 * p.e_c * n * n;
  }
  const complexd hop = -0.5 * e_j * std::exp(complexd(0.0, -junction_phase_offset));
  for (int k = 0; k + 1 < dim; ++k) {
    h(k + 1, k) += hop;
    h(k, k + 1) += std::conj(hop);
  }

  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  MatrixXcd v = eig.eigenvectors().leftCols(n_levels);
  fix_column_phases(v);

  MatrixXcd n_op = MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n_op(k, k) = k - cutoff;

  TransmonMatrices out;
  out.energies = eig.eigenvalues().head(n_levels);
  out.charge = v.adjoint() * n_op * v;
  return out;
}

void check_convergence(const VectorXd& base, const VectorXd& doubled,
                       const char* circuit) {
  for (int k = 1; k < base.size(); ++k) {
    const double shift =
        std::abs((base[k] - base[0]) - (doubled[k] - doubled[0]));
    if (shift > kLevelTolGhz) {
      std::ostringstream msg;
      msg << circuit << " level " << k << " moved by " << shift * 1e6
          << " kHz under basis doubling (tolerance 1 kHz); increase the basis size";
      throw ConvergenceError(msg.str(), k, shift);
    }
  }
}

MatrixXcd kron3(const MatrixXcd& a, const MatrixXcd& b, const MatrixXcd& c) {
  const int la = int(a.rows()), lb = int(b.rows()), lc = int(c.rows());
  MatrixXcd out(la * lb * lc, la * lb * lc);
  for (int i = 0; i < la; ++i)
    for (int ip = 0; ip < la; ++ip)
      for (int j = 0; j < lb; ++j)
        for (int jp = 0; jp < lb; ++jp)
          for (int k = 0; k < lc; ++k)
            for (int kp = 0; kp < lc; ++kp)
              out((i * lb + j) * lc + k, (ip * lb + jp) * lc + kp) =
                  a(i, ip) * b(j, jp) * c(k, kp);
  return out;
}

}  // namespace

void FluxoniumParams::validate() const {
  require_positive(e_c, "fluxonium e_c");
  require_positive(e_l, "fluxonium e_l");
  require_positive(e_j, "fluxonium e_j");
  if (!std::isfinite(phi_ext)) throw std::invalid_argument("phi_ext must be finite");
}

double TransmonParams::e_j_effective() const {
  return e_j_total * std::abs(std::cos(M_PI * flux_fraction));
}

void TransmonParams::validate() const {
  require_positive(e_c, "transmon e_c");
  require_positive(e_j_total, "transmon e_j_total");
  if (!std::isfinite(flux_fraction)) {
    throw std::invalid_argument("flux_fraction must be finite");
  }
  if (!(e_j_effective() > 0.0)) {
    throw std::invalid_argument(
        "effective Josephson energy vanishes at this flux bias");
  }
}

void CouplingParams::validate() const {
  if (!std::isfinite(g_12) || !std::isfinite(g_1c) || !std::isfinite(g_2c)) {
    throw std::invalid_argument("coupling strengths must be finite");
  }
}

void TruncationSpec::validate() const {
  if (fluxonium_levels < 2) throw std::invalid_argument("fluxonium_levels must be >= 2");
  if (transmon_levels < 2) throw std::invalid_argument("transmon_levels must be >= 2");
  const int kept = std::max(fluxonium_levels, transmon_levels);
  if (single_circuit_basis_size < 4 * kept) {
    throw std::invalid_argument(
        "single_circuit_basis_size must be at least 4x the kept level count");
  }
}

std::string to_string(const BareLabel& label) {
  std::ostringstream s;
  s << "|" << label.f1 << label.c << label.f2 << ">";
  return s.str();
}

std::optional<int> CompositeSystem::index_of(const BareLabel& label) const {
  for (int k = 0; k < dim(); ++k) {
    if (labels[k] == label) return k;
  }
  return std::nullopt;
}

int CompositeSystem::require(const BareLabel& label) const {
  if (auto idx = index_of(label)) return *idx;
  throw std::out_of_range("composite system has no state labeled " + to_string(label));
}

SingleCircuit diagonalize_fluxonium(const FluxoniumParams& params, int basis_size,
                                    int n_levels) {
  params.validate();
  if (n_levels < 1) throw std::invalid_argument("n_levels must be >= 1");
  if (basis_size < 4 * n_levels) {
    throw std::invalid_argument("fluxonium basis_size must be >= 4*n_levels");
  }
  FluxoniumMatrices base = fluxonium_eigensystem(params, basis_size, n_levels);
  FluxoniumMatrices doubled = fluxonium_eigensystem(params, 2 * basis_size, n_levels);
  check_convergence(base.energies, doubled.energies, "fluxonium");
  return SingleCircuit{base.energies, base.charge, base.phase};
}

SingleCircuit diagonalize_transmon(const TransmonParams& params, int charge_cutoff,
                                   int n_levels, double junction_phase_offset) {
  params.validate();
  if (n_levels < 1) throw std::invalid_argument("n_levels must be >= 1");
  if (charge_cutoff < 10) throw std::invalid_argument("charge_cutoff must be >= 10");
  TransmonMatrices base =
      transmon_eigensystem(params, charge_cutoff, n_levels, junction_phase_offset);
  TransmonMatrices doubled =
      transmon_eigensystem(params, 2 * charge_cutoff, n_levels, junction_phase_offset);
  check_convergence(base.energies, doubled.energies, "transmon");
  return SingleCircuit{base.energies, base.charge, MatrixXcd()};
}

PrediagonalizedCircuits prediagonalize(const FluxoniumParams& f1,
                                       const FluxoniumParams& f2,
                                       const TransmonParams& c,
                                       const TruncationSpec& trunc,
                                       double junction_phase_offset) {
  trunc.validate();
  PrediagonalizedCircuits parts;
  parts.trunc = trunc;
  parts.f1 = diagonalize_fluxonium(f1, trunc.single_circuit_basis_size,
                                   trunc.fluxonium_levels);
  parts.f2 = diagonalize_fluxonium(f2, trunc.single_circuit_basis_size,
                                   trunc.fluxonium_levels);
  const int cutoff = std::max(10, (trunc.single_circuit_basis_size - 1) / 2);
  parts.c = diagonalize_transmon(c, cutoff, trunc.transmon_levels,
                                 junction_phase_offset);
  return parts;
}

CompositeSystem assemble_composite(const PrediagonalizedCircuits& parts,
                                   const CouplingParams& g, LabelPolicy policy) {
  g.validate();
  const int l1 = int(parts.f1.energies.size());
  const int lc = int(parts.c.energies.size());
  const int l2 = int(parts.f2.energies.size());
  const int dim = l1 * lc * l2;

  const MatrixXcd i1 = MatrixXcd::Identity(l1, l1);
  const MatrixXcd ic = MatrixXcd::Identity(lc, lc);
  const MatrixXcd i2 = MatrixXcd::Identity(l2, l2);

  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < l1; ++i)
    for (int c = 0; c < lc; ++c)
      for (int j = 0; j < l2; ++j) {
        const int idx = (i * lc + c) * l2 + j;
        h(idx, idx) = parts.f1.energies[i] + parts.c.energies[c] + parts.f2.energies[j];
      }

  // Couplings enter as g/2pi; parameters are in MHz, energies in GHz.
  h += (g.g_12 * 1e-3) * kron3(parts.f1.charge, ic, parts.f2.charge);
  h += (g.g_1c * 1e-3) * kron3(parts.f1.charge, parts.c.charge, i2);
  h += (g.g_2c * 1e-3) * kron3(i1, parts.c.charge, parts.f2.charge);

  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h);
  MatrixXcd v = eig.eigenvectors();

  // Maximum-overlap labeling: greedy over all (dressed, bare) pairs sorted by
  // descending overlap, ties broken by dressed energy order.
  struct Cand {
    double overlap;
    int dressed, bare;
  };
  std::vector<Cand> cands;
  cands.reserve(size_t(dim) * dim);
  for (int d = 0; d < dim; ++d)
    for (int b = 0; b < dim; ++b) cands.push_back({std::norm(v(b, d)), d, b});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    return a.dressed < b.dressed;
  });

  CompositeSystem sys;
  sys.warnings.clear();
  std::vector<int> bare_of(dim, -1), dressed_of(dim, -1);
  for (const Cand& cand : cands) {
    if (bare_of[cand.dressed] != -1 || dressed_of[cand.bare] != -1) continue;
    bare_of[cand.dressed] = cand.bare;
    dressed_of[cand.bare] = cand.dressed;
  }

  // Ambiguity check: two dressed states whose best bare component is the same
  // label while neither overlap reaches 1/2 cannot be assigned meaningfully.
  std::vector<int> argmax_bare(dim), tie_partner(dim, -1);
  for (int d = 0; d < dim; ++d) {
    Eigen::Index bmax = 0;
    v.col(d).cwiseAbs().maxCoeff(&bmax);
    argmax_bare[d] = int(bmax);
  }
  std::vector<bool> contested(dim, false);
  for (int d = 0; d < dim; ++d) {
    for (int d2 = d + 1; d2 < dim; ++d2) {
      if (argmax_bare[d] != argmax_bare[d2]) continue;
      const double o1 = std::norm(v(argmax_bare[d], d));
      const double o2 = std::norm(v(argmax_bare[d2], d2));
      if (o1 < 0.5 && o2 < 0.5) {
        if (policy == LabelPolicy::strict) {
          std::ostringstream msg;
          msg << "ambiguous dressed-state labeling: states " << d << " and " << d2
              << " both claim bare index " << argmax_bare[d] << " with overlaps "
              << o1 << ", " << o2;
          throw LabelingError(msg.str(), d, d2);
        }
        contested[d] = contested[d2] = true;
      }
      if (std::abs(o1 - o2) < 1e-12) {
        std::ostringstream msg;
        msg << "labeling tie between dressed states " << d << " and " << d2
            << " for bare index " << argmax_bare[d] << "; assigned by energy order";
        sys.warnings.push_back(msg.str());
      }
    }
  }

  sys.eigenvalues = eig.eigenvalues();
  sys.f1_levels = l1;
  sys.c_levels = lc;
  sys.f2_levels = l2;
  sys.labels.resize(dim);
  for (int d = 0; d < dim; ++d) {
    const int b = bare_of[d];
    sys.labels[d] =
        contested[d] ? BareLabel{-1, -1, -1}
                     : BareLabel{b / (lc * l2), (b / l2) % lc, b % l2};
    // Gauge: labeled bare component real and positive.
    const complexd pivot = v(b, d);
    if (std::abs(pivot) > 0) v.col(d) *= std::conj(pivot) / std::abs(pivot);
  }
  sys.eigenvectors = v;

  const double unitarity =
      (v.adjoint() * v - MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (unitarity > 1e-10) {
    throw std::runtime_error("eigenvector matrix failed the unitarity gate");
  }

  sys.n_f1 = v.adjoint() * kron3(parts.f1.charge, ic, i2) * v;
  sys.n_c = v.adjoint() * kron3(i1, parts.c.charge, i2) * v;
  sys.n_f2 = v.adjoint() * kron3(i1, ic, parts.f2.charge) * v;
  return sys;
}

CompositeSystem build_composite(const FluxoniumParams& f1, const FluxoniumParams& f2,
                                const TransmonParams& c, const CouplingParams& g,
                                const TruncationSpec& trunc) {
  return assemble_composite(prediagonalize(f1, f2, c, trunc), g);
}

}  // namespace ftf
