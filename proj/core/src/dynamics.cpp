#include "ftf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ftf {
namespace {

double wrap_angle(double x) { return std::remainder(x, two_pi); }

// One complex exponential term of the scalar drive coefficient:
// f(t) = sum_m gamma_m exp(2 pi i nu_m t), with conjugate pairs included so
// the sum is real.
struct DriveTerm {
  complexd gamma;
  double nu;  // GHz, signed
};

void add_term(std::vector<DriveTerm>& terms, complexd gamma, double nu) {
  if (std::abs(gamma) < 1e-300) return;
  for (DriveTerm& t : terms) {
    if (std::abs(t.nu - nu) < 1e-12) {
      t.gamma += gamma;
      return;
    }
  }
  terms.push_back({gamma, nu});
}

// f(t) = amp * [I(t) cos(2 pi f_d t) - Q(t) sin(2 pi f_d t)] expanded into
// complex exponentials. I is the cosine series of the envelope, Q its
// derivative quadrature.
std::vector<DriveTerm> make_drive_terms(const PulseEnvelope& env, double amp,
                                        double f_d) {
  if (!env.analytic) {
    throw std::invalid_argument(
        "propagation requires an analytic (cosine-series) envelope");
  }
  std::vector<DriveTerm> terms;
  double dc = 0;
  for (double c : env.cosine_coeffs) dc += amp * c;
  // I_dc * cos: +-f_d
  add_term(terms, 0.5 * dc, f_d);
  add_term(terms, 0.5 * dc, -f_d);
  for (size_t n = 0; n < env.cosine_coeffs.size(); ++n) {
    const double a = amp * env.cosine_coeffs[n];
    const double nu_n = double(n + 1) / env.t_g;
    // -a cos(2 pi nu_n t) cos(2 pi f_d t)
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0}) add_term(terms, -0.25 * a, s1 * nu_n + s2 * f_d);
    if (env.drag_delta != 0.0) {
      // -Q sin(2 pi f_d t) with Q = -sum b_n sin(2 pi nu_n t),
      // b_n = a_n n / (delta t_g):
      // + b_n sin(nu_n) sin(f_d) = b_n/2 [cos(nu_n - f_d) - cos(nu_n + f_d)]
      const double b = a * double(n + 1) / (env.drag_delta * env.t_g);
      for (double s : {1.0, -1.0}) {
        add_term(terms, 0.25 * b, s * (nu_n - f_d));
        add_term(terms, -0.25 * b, s * (nu_n + f_d));
      }
    }
  }
  return terms;
}

// Exact step integrals of exp(2 pi i mu tau):
//   q0 = int_0^h e^{2 pi i mu tau} d tau
//   q1 = int_0^h (tau - h/2) e^{2 pi i mu tau} d tau
complexd q0_integral(double mu, double h) {
  const double theta = M_PI * mu * h;
  const double s = std::abs(theta) < 1e-8 ? 1.0 - theta * theta / 6.0
                                          : std::sin(theta) / theta;
  return h * std::exp(complexd(0, theta)) * s;
}

complexd q1_integral(double mu, double h) {
  const double a = two_pi * mu;
  const double w = 0.5 * h;
  const double x = a * w;
  double core;  // (sin x - x cos x)/a^2, stable for small x
  if (std::abs(x) < 1e-2) {
    core = w * w * w * a * (1.0 / 3.0 - x * x / 30.0 + x * x * x * x / 840.0);
  } else {
    core = (std::sin(x) - x * std::cos(x)) / (a * a);
  }
  return std::exp(complexd(0, a * w)) * complexd(0, 2.0) * core;
}

// Commutator-free 4th-order Magnus stepper in the interaction picture of the
// dressed energies. The drive moments over each step are integrated exactly,
// element by element, using the precomputed q0/q1 factors.
class MagnusStepper {
 public:
  MagnusStepper(const CompositeSystem& sys, const DriveConfig& drive) {
    drive.validate();
    dim_ = sys.dim();
    energies_ = sys.eigenvalues;
    t_g_ = drive.envelope.t_g;

    MatrixXcd n_op;
    if (drive.line == DriveLine::f2) {
      n_op = sys.n_f2 + drive.eta_c * sys.n_c + drive.eta_f1 * sys.n_f1;
    } else {
      n_op = sys.n_f1 + drive.eta_c * sys.n_c + drive.eta_f1 * sys.n_f2;
    }

    terms_ = make_drive_terms(drive.envelope, drive.amp_scale, drive.f_d);
    n_steps_ = std::max(1, int(std::ceil(t_g_ / drive.step_ns - 1e-9)));
    h_ = t_g_ / n_steps_;

    const bool rwa = drive.frame == Frame::rotating_wave;
    q0_.reserve(terms_.size());
    q1_.reserve(terms_.size());
    for (const DriveTerm& term : terms_) {
      MatrixXcd q0(dim_, dim_), q1(dim_, dim_);
      for (int k = 0; k < dim_; ++k) {
        for (int j = 0; j < dim_; ++j) {
          const double mu = term.nu + energies_[j] - energies_[k];
          if (rwa && std::abs(mu) > drive.rwa_cutoff_ghz) {
            q0(j, k) = q1(j, k) = 0.0;
          } else {
            q0(j, k) = n_op(j, k) * q0_integral(mu, h_);
            q1(j, k) = n_op(j, k) * q1_integral(mu, h_);
          }
        }
      }
      q0_.push_back(std::move(q0));
      q1_.push_back(std::move(q1));
    }
    w0_.resize(dim_, dim_);
    w1_.resize(dim_, dim_);
    c_gen_.resize(dim_, dim_);

  }

  int dim() const { return dim_; }
  double gate_time() const { return t_g_; }

  /// Advance the interaction-picture block through [0, t_g]. `record_pairs`
  /// lists (row, column-index-within-block) population probes appended to
  /// `record` at every step.
  void run(MatrixXcd& block, PopulationRecord* record,
           const std::vector<std::pair<int, int>>& record_pairs) {
    const auto snapshot = [&](double t) {
      if (!record) return;
      record->t_ns.push_back(t);
      for (size_t p = 0; p < record_pairs.size(); ++p) {
        record->p_coupler[p].push_back(
            std::norm(block(record_pairs[p].first, record_pairs[p].second)));
      }
    };
    snapshot(0.0);

    MatrixXcd taylor_tmp(block.rows(), block.cols());
    MatrixXcd taylor_term(block.rows(), block.cols());
    Eigen::VectorXcd phases(dim_);
    const complexd a_coef = complexd(0, -M_PI);          // -2 pi i * 1/2
    const complexd b_coef = complexd(0, two_pi * 2.0 / h_);  // -2 pi i * (-2/h)

    for (int step = 0; step < n_steps_; ++step) {
      const double t0 = h_ * step;
      w0_.setZero();
      w1_.setZero();
      for (size_t m = 0; m < terms_.size(); ++m) {
        const complexd s =
            terms_[m].gamma * std::polar(1.0, two_pi * terms_[m].nu * t0);
        w0_.noalias() += s * q0_[m];
        w1_.noalias() += s * q1_[m];
      }
      // The interaction-picture phase scaling D = diag(e^{2 pi i E_j t0}) is
      // applied to the state block instead of the generator matrices:
      // exp(D C D^dag) = D exp(C) D^dag.
      for (int j = 0; j < dim_; ++j) {
        phases[j] = std::polar(1.0, two_pi * energies_[j] * t0);
      }
      block.array().colwise() *= phases.conjugate().array();
      c_gen_ = a_coef * w0_ + b_coef * w1_;
      apply_exp(c_gen_, block, taylor_tmp, taylor_term);
      c_gen_ = a_coef * w0_ - b_coef * w1_;
      apply_exp(c_gen_, block, taylor_tmp, taylor_term);
      block.array().colwise() *= phases.array();
      snapshot(t0 + h_);
    }
  }

  /// Interaction picture -> dressed lab frame at t_g.
  void to_lab_frame(MatrixXcd& block) const {
    for (int j = 0; j < dim_; ++j) {
      block.row(j) *= std::polar(1.0, -two_pi * energies_[j] * t_g_);
    }
  }

 private:
  // y <- exp(c) y via scaled Taylor application; c is anti-Hermitian and
  // small at any sane step, so a short fixed-length series reaches roundoff.
  static void apply_exp(const MatrixXcd& c, MatrixXcd& y, MatrixXcd& tmp,
                        MatrixXcd& term) {
    const double norm = c.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.25 && squarings < 16) {
      scale *= 0.5;
      ++squarings;
    }
    const double b = norm * scale;
    const int n_terms = b < 1e-4 ? 4 : b < 4e-3 ? 5 : b < 2e-2 ? 7 : b < 0.1 ? 9 : 12;
    for (int r = 0; r < (1 << squarings); ++r) {
      term = y;
      for (int k = 1; k <= n_terms; ++k) {
        tmp.noalias() = c * term;
        term = (scale / double(k)) * tmp;
        y += term;
      }
    }
  }

  int dim_ = 0;
  int n_steps_ = 0;
  double h_ = 0, t_g_ = 0;
  VectorXd energies_;
  std::vector<DriveTerm> terms_;
  std::vector<MatrixXcd> q0_, q1_;
  MatrixXcd w0_, w1_, c_gen_;
};

std::array<int, 4> computational_indices(const CompositeSystem& sys) {
  return {sys.require({0, 0, 0}), sys.require({0, 0, 1}), sys.require({1, 0, 0}),
          sys.require({1, 0, 1})};
}

std::array<int, 4> coupler_excited_indices(const CompositeSystem& sys) {
  return {sys.require({0, 1, 0}), sys.require({0, 1, 1}), sys.require({1, 1, 0}),
          sys.require({1, 1, 1})};
}

double drive_element(const CompositeSystem& sys, double eta_c, double eta_f1, int i,
                     int j) {
  const int upper = sys.require({i, 1, j});
  const int lower = sys.require({i, 0, j});
  return std::abs(sys.n_f2(upper, lower) + eta_c * sys.n_c(upper, lower) +
                  eta_f1 * sys.n_f1(upper, lower));
}

// max_theta2 |x + e^{i theta2} y| = |x| + |y|, so the two-angle search
// reduces to one angle.
double phase_objective(const Eigen::Matrix4cd& u4, double theta1) {
  const complexd d0 = u4(0, 0), v1 = u4(1, 1), v2 = u4(2, 2), v3 = -u4(3, 3);
  const complexd rot = std::exp(complexd(0, theta1));
  return std::abs(d0 + rot * v2) + std::abs(v1 + rot * v3);
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  int iters = 90) {
  const double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Minimal Nelder-Mead on two scaled parameters.
struct NmResult {
  Eigen::Vector2d x;
  double f;
  int evals;
  bool converged;
};

NmResult nelder_mead_2d(const std::function<double(const Eigen::Vector2d&)>& f,
                        const Eigen::Vector2d& x0, const Eigen::Vector2d& scale,
                        double f_tol, int max_evals) {
  std::array<Eigen::Vector2d, 3> xs = {x0, x0 + Eigen::Vector2d(scale[0], 0),
                                       x0 + Eigen::Vector2d(0, scale[1])};
  std::array<double, 3> fs;
  int evals = 0;
  for (int k = 0; k < 3; ++k) fs[k] = (++evals, f(xs[k]));

  bool converged = false;
  while (evals < max_evals) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int lo = order[0], mid = order[1], hi = order[2];
    if (std::abs(fs[hi] - fs[lo]) < f_tol) {
      converged = true;
      break;
    }
    const Eigen::Vector2d centroid = 0.5 * (xs[lo] + xs[mid]);
    const Eigen::Vector2d refl = centroid + (centroid - xs[hi]);
    const double f_refl = (++evals, f(refl));
    if (f_refl < fs[lo]) {
      const Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - xs[hi]);
      const double f_exp = (++evals, f(exp_pt));
      if (f_exp < f_refl) {
        xs[hi] = exp_pt;
        fs[hi] = f_exp;
      } else {
        xs[hi] = refl;
        fs[hi] = f_refl;
      }
    } else if (f_refl < fs[mid]) {
      xs[hi] = refl;
      fs[hi] = f_refl;
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (xs[hi] - centroid);
      const double f_contr = (++evals, f(contr));
      if (f_contr < fs[hi]) {
        xs[hi] = contr;
        fs[hi] = f_contr;
      } else {
        for (int k : {mid, hi}) {
          xs[k] = xs[lo] + 0.5 * (xs[k] - xs[lo]);
          fs[k] = (++evals, f(xs[k]));
        }
      }
    }
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  return {xs[order[0]], fs[order[0]], evals, converged};
}

}  // namespace

void DriveConfig::validate() const {
  if (!(f_d > 0)) throw std::invalid_argument("drive frequency must be positive");
  if (eta_c < 0 || eta_f1 < 0) throw std::invalid_argument("crosstalk etas must be >= 0");
  if (!(envelope.t_g > 0)) throw std::invalid_argument("envelope duration must be positive");
  if (!(step_ns > 0)) throw std::invalid_argument("integrator step must be positive");
}

void NoiseModel::validate() const {
  for (const auto& row : coupler_t1_us) {
    for (double t1 : row) {
      if (!(t1 > 0)) throw std::invalid_argument("coupler T1 values must be positive");
    }
  }
}

double PopulationRecord::integral_ns(int input_index) const {
  const auto& p = p_coupler[input_index];
  if (p.size() != t_ns.size() || p.size() < 2) return 0.0;
  double acc = 0;
  for (size_t k = 0; k + 1 < p.size(); ++k) {
    acc += 0.5 * (p[k] + p[k + 1]) * (t_ns[k + 1] - t_ns[k]);
  }
  return acc;
}

MatrixXcd propagate(const CompositeSystem& sys, const DriveConfig& drive) {
  MagnusStepper stepper(sys, drive);
  MatrixXcd u = MatrixXcd::Identity(sys.dim(), sys.dim());
  stepper.run(u, nullptr, {});
  stepper.to_lab_frame(u);
  return u;
}

MatrixXcd propagate_columns(const CompositeSystem& sys, const DriveConfig& drive,
                            const std::vector<int>& cols, PopulationRecord* record) {
  MagnusStepper stepper(sys, drive);
  MatrixXcd block = MatrixXcd::Zero(sys.dim(), Eigen::Index(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) block(cols[c], Eigen::Index(c)) = 1.0;

  std::vector<std::pair<int, int>> probes;
  if (record) {
    if (cols.size() != 4) {
      throw std::invalid_argument(
          "population recording expects the four computational columns");
    }
    const auto excited = coupler_excited_indices(sys);
    for (int k = 0; k < 4; ++k) probes.emplace_back(excited[k], k);
  }
  stepper.run(block, record, probes);
  stepper.to_lab_frame(block);
  return block;
}

Eigen::Matrix4cd truncate_to_computational(const MatrixXcd& u_full,
                                           const CompositeSystem& sys) {
  const auto idx = computational_indices(sys);
  Eigen::Matrix4cd u4;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) u4(r, c) = u_full(idx[r], idx[c]);
  return u4;
}

double conditional_phase(const Eigen::Matrix4cd& u4) {
  for (int k = 0; k < 4; ++k) {
    if (std::abs(u4(k, k)) <= 0.9) {
      throw std::runtime_error(
          "conditional_phase: computational block is not diagonal-dominant "
          "(|u" + std::to_string(k) + std::to_string(k) + "| = " +
          std::to_string(std::abs(u4(k, k))) + " <= 0.9)");
    }
  }
  return wrap_angle(std::arg(u4(0, 0)) - std::arg(u4(1, 1)) - std::arg(u4(2, 2)) +
                    std::arg(u4(3, 3)));
}

double process_fidelity(const Eigen::Matrix4cd& u4, bool optimize_single_qubit_phases) {
  if (!optimize_single_qubit_phases) {
    const complexd tr = u4(0, 0) + u4(1, 1) + u4(2, 2) - u4(3, 3);
    return std::norm(tr) / 16.0;
  }
  const auto objective = [&](double theta) { return phase_objective(u4, theta); };
  double best = 0;
  const int segments = 8;
  for (int s = 0; s < segments; ++s) {
    const double a = -M_PI + two_pi * s / segments;
    const double theta = golden_max(objective, a, a + two_pi / segments);
    best = std::max(best, objective(theta));
  }
  return best * best / 16.0;
}

T1Factors t1_corrected_fidelity(double process_fidelity, const NoiseModel& noise,
                                const PopulationRecord& populations) {
  noise.validate();
  T1Factors out;
  out.f_p_total = process_fidelity;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const int input = 2 * i + j;
      const double integral_us = populations.integral_ns(input) * 1e-3;
      const double factor = 0.5 * (1.0 + std::exp(-integral_us / noise.t1(i, j)));
      out.f_p_ij[input] = factor;
      out.f_p_total *= factor;
    }
  }
  out.avg_gate_fidelity = (4.0 * out.f_p_total + 1.0) / 5.0;
  return out;
}

FastDragSpec make_device_fast_drag_spec(const CompositeSystem& sys, double eta_c,
                                        double eta_f1, double f_d,
                                        double band_width_ghz) {
  const ConditionalTransitions f = conditional_transitions(sys);
  FastDragSpec spec;
  spec.n_components = 3;
  const double half = 0.5 * band_width_ghz;
  for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}}) {
    const double center = f(i, j) - f_d;
    spec.bands.emplace_back(center - half, center + half);
    const double m = drive_element(sys, eta_c, eta_f1, i, j);
    spec.weights.push_back(m * m);
  }
  spec.validate();
  return spec;
}

PulseEnvelope build_gate_envelope(const CompositeSystem& sys, ShapeKind kind,
                                  double t_g, double eta_c, double eta_f1,
                                  double sample_rate) {
  const ConditionalTransitions f = conditional_transitions(sys);
  // Quadrature detuning that places the spectral null on the f_10 transition
  // for a drive at f_11 (the nearest spurious line sits below the carrier).
  const double null_delta = f.f_11 - f.f_10;
  switch (kind) {
    case ShapeKind::cosine:
      return cosine_envelope(t_g, 1.0, sample_rate);
    case ShapeKind::drag:
      return drag_quadrature(cosine_envelope(t_g, 1.0, sample_rate), null_delta);
    case ShapeKind::fast_drag: {
      const FastDragSpec spec = make_device_fast_drag_spec(sys, eta_c, eta_f1, f.f_11);
      return fast_drag_envelope(spec, t_g, 1.0, sample_rate, null_delta);
    }
    case ShapeKind::sampled:
      break;
  }
  throw std::invalid_argument("unsupported gate envelope kind");
}

double two_pi_amplitude_seed(const CompositeSystem& sys, const PulseEnvelope& env,
                             double eta_c, double eta_f1) {
  const double m = drive_element(sys, eta_c, eta_f1, 1, 1);
  double area = 0;  // unit amp_scale in-phase area
  for (double c : env.cosine_coeffs) area += c * env.t_g;
  if (!(m > 0) || !(area > 0)) {
    throw std::runtime_error("cannot seed the 2 pi amplitude: zero drive element");
  }
  // Resonant rotation angle pi * m * integral(I dt) = 2 pi.
  return 2.0 / (m * area);
}

GateReport simulate_gate(const CompositeSystem& sys, const DriveConfig& drive,
                         const NoiseModel* noise) {
  const auto idx = computational_indices(sys);
  PopulationRecord record;
  const MatrixXcd block = propagate_columns(
      sys, drive, std::vector<int>(idx.begin(), idx.end()), &record);

  GateReport report;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) report.u_computational(r, c) = block(idx[r], c);

  for (int c = 0; c < 4; ++c) {
    double in_subspace = 0;
    for (int r = 0; r < 4; ++r) in_subspace += std::norm(block(idx[r], c));
    report.leakage[c] = 1.0 - in_subspace;
    report.coupler_population_integral_ns[c] = record.integral_ns(c);
  }

  report.process_fidelity = process_fidelity(report.u_computational, true);
  report.process_fidelity_fixed_phase =
      process_fidelity(report.u_computational, false);
  try {
    report.conditional_phase = conditional_phase(report.u_computational);
    report.conditional_phase_valid = true;
  } catch (const std::runtime_error&) {
    report.conditional_phase = std::numeric_limits<double>::quiet_NaN();
    report.conditional_phase_valid = false;
  }

  if (noise) {
    const T1Factors t1 = t1_corrected_fidelity(report.process_fidelity, *noise, record);
    report.t1_factors = t1.f_p_ij;
    report.process_fidelity_total = t1.f_p_total;
    report.avg_gate_fidelity = t1.avg_gate_fidelity;
  } else {
    report.process_fidelity_total = report.process_fidelity;
    report.avg_gate_fidelity = (4.0 * report.process_fidelity + 1.0) / 5.0;
  }

  report.f_d = drive.f_d;
  report.amp_scale = drive.amp_scale;
  report.t_g = drive.envelope.t_g;
  report.pulse_kind = to_string(drive.envelope.shape_kind);
  return report;
}

OptimizeResult optimize_drive(const CompositeSystem& sys, DriveConfig drive,
                              const NoiseModel* noise, const OptimizeOptions& opts) {
  DriveConfig probe = drive;
  probe.step_ns = opts.coarse_step_ns;

  const double f_seed = drive.f_d;
  const double a_seed = drive.amp_scale;
  const double f_scale = 0.003, a_scale = 0.04 * a_seed;

  const auto objective = [&](const Eigen::Vector2d& x) {
    probe.f_d = f_seed + x[0] * f_scale;
    probe.amp_scale = a_seed + x[1] * a_scale;
    if (!(probe.f_d > 0) || !(probe.amp_scale > 0)) return 1.0;
    const GateReport rep = simulate_gate(sys, probe, noise);
    return 1.0 - rep.avg_gate_fidelity;
  };

  const NmResult nm = nelder_mead_2d(objective, Eigen::Vector2d::Zero(),
                                     Eigen::Vector2d::Ones(), opts.f_tol,
                                     opts.max_evaluations);
  OptimizeResult out;
  out.f_d = f_seed + nm.x[0] * f_scale;
  out.amp_scale = a_seed + nm.x[1] * a_scale;
  out.f_g = 1.0 - nm.f;
  out.evaluations = nm.evals;
  out.converged = nm.converged;
  return out;
}

std::vector<SweepPoint> fidelity_sweep(const CompositeSystem& sys,
                                       const NoiseModel& noise, ShapeKind kind,
                                       const std::vector<double>& t_g_list,
                                       const std::vector<double>& eta_c_list,
                                       double eta_f1, const SweepOptions& opts) {
  const ConditionalTransitions f = conditional_transitions(sys);
  std::vector<SweepPoint> rows;
  for (double t_g : t_g_list) {
    for (double eta_c : eta_c_list) {
      SweepPoint row;
      row.t_g = t_g;
      row.eta_c = eta_c;
      row.pulse_kind = to_string(kind);
      try {
        DriveConfig drive;
        drive.envelope = build_gate_envelope(sys, kind, t_g, eta_c, eta_f1);
        drive.f_d = f.f_11;
        drive.eta_c = eta_c;
        drive.eta_f1 = eta_f1;
        drive.amp_scale = two_pi_amplitude_seed(sys, drive.envelope, eta_c, eta_f1);

        const OptimizeResult opt = optimize_drive(sys, drive, &noise, opts.optimize);
        drive.f_d = opt.f_d;
        drive.amp_scale = opt.amp_scale;
        drive.step_ns = opts.final_step_ns;
        const GateReport rep = simulate_gate(sys, drive, &noise);

        row.ok = true;
        row.f_g = rep.avg_gate_fidelity;
        row.f_p = rep.process_fidelity;
        row.leakage = *std::max_element(rep.leakage.begin(), rep.leakage.end());
        row.f_d = opt.f_d;
        row.amp_scale = opt.amp_scale;
      } catch (const std::exception& err) {
        row.ok = false;
        row.error = err.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ftf
