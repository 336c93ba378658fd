#include "ftf/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace ftf {
namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// integral_0^T exp(2 pi i nu t) dt
complexd window_exp_integral(double nu, double t_total) {
  const double theta = M_PI * nu * t_total;
  return t_total * std::exp(complexd(0.0, theta)) * sinc(theta);
}

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGlWeight[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gl15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0;
  for (int k = 0; k < 15; ++k) sum += kGlWeight[k] * f(mid + half * kGlNode[k]);
  return half * sum;
}

double adaptive_gl_impl(const std::function<double(double)>& f, double a, double b,
                        double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid), right = gl15(f, mid, b);
  if (std::abs(left + right - whole) <= tol || depth >= 30) return left + right;
  return adaptive_gl_impl(f, a, mid, left, 0.5 * tol, depth + 1) +
         adaptive_gl_impl(f, mid, b, right, 0.5 * tol, depth + 1);
}

std::vector<double> sample_times(double t_g, double sample_rate) {
  const int n = int(std::lround(t_g * sample_rate)) + 1;
  std::vector<double> t(std::max(n, 2));
  const double dt = t_g / double(t.size() - 1);
  for (size_t k = 0; k < t.size(); ++k) t[k] = dt * double(k);
  t.back() = t_g;
  return t;
}

double interp_samples(const std::vector<double>& y, double t, double t_g) {
  if (y.empty()) return 0.0;
  if (t <= 0.0) return y.front();
  if (t >= t_g) return y.back();
  const double dt = t_g / double(y.size() - 1);
  const double s = t / dt;
  const long i = std::clamp(long(s), 0L, long(y.size()) - 2);
  const double u = s - double(i);
  // Catmull-Rom with clamped end slopes.
  const double y0 = i > 0 ? y[i - 1] : y[i];
  const double y1 = y[i], y2 = y[i + 1];
  const double y3 = size_t(i + 2) < y.size() ? y[i + 2] : y[i + 1];
  const double a = 2 * y1, b = y2 - y0;
  const double c = 2 * y0 - 5 * y1 + 4 * y2 - y3;
  const double d = -y0 + 3 * y1 - 3 * y2 + y3;
  return 0.5 * (a + b * u + c * u * u + d * u * u * u);
}

}  // namespace

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::cosine: return "cosine";
    case ShapeKind::drag: return "drag";
    case ShapeKind::fast_drag: return "fast_drag";
    case ShapeKind::sampled: return "sampled";
  }
  return "unknown";
}

double PulseEnvelope::value_i(double t) const {
  if (!analytic) return interp_samples(i_samples, t, t_g);
  if (t < 0.0 || t > t_g) return 0.0;
  double v = 0;
  for (size_t n = 0; n < cosine_coeffs.size(); ++n) {
    v += cosine_coeffs[n] * (1.0 - std::cos(two_pi * double(n + 1) * t / t_g));
  }
  return v;
}

double PulseEnvelope::value_q(double t) const {
  if (!analytic) return interp_samples(q_samples, t, t_g);
  if (drag_delta == 0.0 || t < 0.0 || t > t_g) return 0.0;
  double v = 0;
  for (size_t n = 0; n < cosine_coeffs.size(); ++n) {
    const double k = double(n + 1);
    v -= cosine_coeffs[n] * k / (drag_delta * t_g) * std::sin(two_pi * k * t / t_g);
  }
  return v;
}

double PulseEnvelope::peak() const {
  double p = 0;
  for (size_t k = 0; k < i_samples.size(); ++k) {
    p = std::max(p, std::hypot(i_samples[k], q_samples[k]));
  }
  return p;
}

static void resample(PulseEnvelope& env) {
  const auto times = sample_times(env.t_g, env.sample_rate);
  env.i_samples.resize(times.size());
  env.q_samples.resize(times.size());
  for (size_t k = 0; k < times.size(); ++k) {
    env.i_samples[k] = env.value_i(times[k]);
    env.q_samples[k] = env.value_q(times[k]);
  }
}

PulseEnvelope cosine_envelope(double t_g, double amplitude, double sample_rate) {
  if (!(t_g > 0.0)) throw std::invalid_argument("t_g must be positive");
  PulseEnvelope env;
  env.t_g = t_g;
  env.sample_rate = sample_rate;
  env.shape_kind = ShapeKind::cosine;
  env.cosine_coeffs = {0.5 * amplitude};
  resample(env);
  return env;
}

PulseEnvelope drag_quadrature(const PulseEnvelope& envelope, double delta) {
  if (delta == 0.0) {
    throw std::invalid_argument("drag_quadrature requires a nonzero detuning");
  }
  PulseEnvelope env = envelope;
  env.drag_delta = delta;
  if (env.analytic) {
    if (env.shape_kind == ShapeKind::cosine) env.shape_kind = ShapeKind::drag;
    resample(env);
    return env;
  }
  // Spectral derivative of the periodic extension (endpoints are zero).
  const size_t m = env.i_samples.size() - 1;
  std::vector<complexd> spec(m, 0.0);
  for (size_t j = 0; j < m; ++j) {
    for (size_t k = 0; k < m; ++k) {
      spec[j] += env.i_samples[k] *
                 std::exp(complexd(0.0, -two_pi * double(j) * double(k) / double(m)));
    }
  }
  for (size_t k = 0; k <= m; ++k) {
    complexd d = 0.0;
    for (size_t j = 0; j < m; ++j) {
      double fj = double(j) <= double(m) / 2 ? double(j) : double(j) - double(m);
      if (2 * j == m) fj = 0.0;  // drop the Nyquist derivative
      fj /= env.t_g;
      d += complexd(0.0, two_pi * fj) * spec[j] *
           std::exp(complexd(0.0, two_pi * double(j) * double(k % m) / double(m))) /
           double(m);
    }
    env.q_samples[k] = -d.real() / (two_pi * delta);
  }
  return env;
}

complexd gn_fourier(int n, double t_g, double f) {
  if (n < 1) throw std::invalid_argument("gn_fourier requires n >= 1");
  if (!(t_g > 0.0)) throw std::invalid_argument("t_g must be positive");
  const double fn = double(n) / t_g;
  return window_exp_integral(-f, t_g) - 0.5 * window_exp_integral(fn - f, t_g) -
         0.5 * window_exp_integral(-fn - f, t_g);
}

void FastDragSpec::validate() const {
  if (n_components < 1) throw std::invalid_argument("n_components must be >= 1");
  if (bands.size() != weights.size()) {
    throw std::invalid_argument("bands and weights must have matching lengths");
  }
  double wsum = 0;
  for (double w : weights) {
    if (w < 0 || !std::isfinite(w)) throw std::invalid_argument("weights must be >= 0");
    wsum += w;
  }
  if (!bands.empty() && wsum == 0) {
    throw std::invalid_argument("at least one weight must be positive");
  }
  auto sorted = bands;
  std::sort(sorted.begin(), sorted.end());
  for (size_t k = 0; k < sorted.size(); ++k) {
    if (!(sorted[k].first < sorted[k].second)) {
      throw std::invalid_argument("band edges must satisfy f_low < f_high");
    }
    if (k > 0 && sorted[k].first < sorted[k - 1].second) {
      throw std::invalid_argument("stop-bands must not overlap");
    }
  }
}

double adaptive_gauss_legendre(const std::function<double(double)>& f, double a,
                               double b, double abs_tol) {
  if (!(b > a)) return 0.0;
  return adaptive_gl_impl(f, a, b, gl15(f, a, b), abs_tol, 0);
}

std::vector<double> solve_fast_drag(const FastDragSpec& spec, double t_g) {
  spec.validate();
  if (!(t_g > 0.0)) throw std::invalid_argument("t_g must be positive");
  const int n = spec.n_components;

  MatrixXd a = MatrixXd::Zero(n, n);
  const double tol = 1e-12 * t_g * t_g;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (size_t b = 0; b < spec.bands.size(); ++b) {
        if (spec.weights[b] == 0) continue;
        const auto integrand = [&](double f) {
          return (gn_fourier(i + 1, t_g, f) * std::conj(gn_fourier(j + 1, t_g, f)))
              .real();
        };
        acc += spec.weights[b] * adaptive_gauss_legendre(integrand, spec.bands[b].first,
                                                         spec.bands[b].second, tol);
      }
      a(i, j) = acc;
    }
  }

  // KKT system for min c^T A c subject to t_g * sum(c) = target_angle.
  MatrixXd kkt = MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = a + a.transpose();
  for (int i = 0; i < n; ++i) {
    kkt(i, n) = -t_g;
    kkt(n, i) = t_g;
  }
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs[n] = spec.target_angle;

  Eigen::FullPivLU<MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    throw std::runtime_error("FAST-DRAG system is singular for this band/weight set");
  }
  const VectorXd sol = lu.solve(rhs);
  std::vector<double> c(sol.data(), sol.data() + n);

  const double residual =
      std::abs(std::accumulate(c.begin(), c.end(), 0.0) * t_g - spec.target_angle);
  if (residual > 1e-10) {
    throw std::runtime_error("FAST-DRAG constraint residual exceeds 1e-10");
  }
  return c;
}

PulseEnvelope fast_drag_envelope(const FastDragSpec& spec, double t_g,
                                 double amplitude_scale, double sample_rate,
                                 double delta) {
  const std::vector<double> c = solve_fast_drag(spec, t_g);
  PulseEnvelope env;
  env.t_g = t_g;
  env.sample_rate = sample_rate;
  env.shape_kind = ShapeKind::fast_drag;
  env.cosine_coeffs.resize(c.size());
  for (size_t k = 0; k < c.size(); ++k) env.cosine_coeffs[k] = amplitude_scale * c[k];
  env.drag_delta = delta;  // 0 leaves the quadrature off
  resample(env);
  return env;
}

complexd envelope_fourier(const PulseEnvelope& env, double detuning_ghz) {
  if (env.analytic) {
    complexd s = 0.0;
    for (size_t n = 0; n < env.cosine_coeffs.size(); ++n) {
      s += env.cosine_coeffs[n] * gn_fourier(int(n + 1), env.t_g, detuning_ghz);
      if (env.drag_delta != 0.0) {
        const double k = double(n + 1);
        const double fn = k / env.t_g;
        const complexd sin_ft =
            (window_exp_integral(fn - detuning_ghz, env.t_g) -
             window_exp_integral(-fn - detuning_ghz, env.t_g)) /
            complexd(0.0, 2.0);
        s += complexd(0.0, 1.0) *
             (-env.cosine_coeffs[n] * k / (env.drag_delta * env.t_g)) * sin_ft;
      }
    }
    return s;
  }
  // Trapezoid quadrature over the stored samples.
  const size_t m = env.i_samples.size();
  const double dt = env.t_g / double(m - 1);
  complexd s = 0.0;
  for (size_t k = 0; k < m; ++k) {
    const double w = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
    const complexd z(env.i_samples[k], env.q_samples[k]);
    s += w * z * std::exp(complexd(0.0, -two_pi * detuning_ghz * dt * double(k)));
  }
  return s * dt;
}

double envelope_band_power(const PulseEnvelope& env, double f_low, double f_high) {
  double coeff_scale = 0;
  for (double c : env.cosine_coeffs) coeff_scale += 2.0 * std::abs(c);
  const double scale = std::max({env.peak() * env.t_g, coeff_scale * env.t_g, 1e-30});
  return adaptive_gauss_legendre(
      [&](double f) { return std::norm(envelope_fourier(env, f)); }, f_low, f_high,
      1e-13 * scale * scale * std::max(f_high - f_low, 1e-3));
}

PulseSpectrum pulse_spectrum(const PulseEnvelope& env, double carrier_ghz,
                             const std::vector<double>& grid_ghz,
                             const std::vector<std::pair<double, double>>& bands) {
  if (grid_ghz.size() < 2) throw std::invalid_argument("spectrum grid too small");
  PulseSpectrum out;
  out.freq_ghz = grid_ghz;
  out.amplitude.resize(grid_ghz.size());
  for (size_t k = 0; k < grid_ghz.size(); ++k) {
    out.amplitude[k] = envelope_fourier(env, grid_ghz[k] - carrier_ghz);
  }

  if (bands.empty()) return out;
  const double grid_lo = *std::min_element(grid_ghz.begin(), grid_ghz.end());
  const double grid_hi = *std::max_element(grid_ghz.begin(), grid_ghz.end());

  // Rotation-equivalent cosine reference: same time integral of the in-phase
  // component, quadrature off.
  double area = 0;
  if (env.analytic) {
    for (double c : env.cosine_coeffs) area += c * env.t_g;
  } else {
    const double dt = env.t_g / double(env.i_samples.size() - 1);
    for (size_t k = 0; k < env.i_samples.size(); ++k) {
      const double w = (k == 0 || k + 1 == env.i_samples.size()) ? 0.5 : 1.0;
      area += w * env.i_samples[k] * dt;
    }
  }
  const PulseEnvelope ref = cosine_envelope(env.t_g, 2.0 * area / env.t_g);

  for (const auto& [lo, hi] : bands) {
    if (lo < grid_lo || hi > grid_hi) {
      throw std::invalid_argument("spectrum grid does not cover a requested band");
    }
    PulseSpectrum::BandPower bp;
    bp.f_low = lo;
    bp.f_high = hi;
    bp.power = envelope_band_power(env, lo - carrier_ghz, hi - carrier_ghz);
    const double ref_power =
        envelope_band_power(ref, lo - carrier_ghz, hi - carrier_ghz);
    bp.rel_cosine_db =
        10.0 * std::log10(std::max(bp.power, 1e-300) / std::max(ref_power, 1e-300));
    out.band_report.push_back(bp);
  }
  return out;
}

}  // namespace ftf
