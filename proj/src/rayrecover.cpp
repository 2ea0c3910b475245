#include "helmrec/rayrecover.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "lstsq.hpp"

namespace helmrec::rayrecover {

RecoverParams RecoverParams::defaults(WaveNumber kappa, int depth) {
  RecoverParams p;
  p.tau = M_PI / (2 * kappa.value());
  p.depth = depth;
  for (int k = 0; k < 5; ++k) p.ladder.push_back(20.0 / kappa.value() * std::pow(2.0, k));
  return p;
}

void RecoverParams::validate(WaveNumber kappa, double s_min) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, "rayrecover", "params", msg); };
  if (!(tau > 0)) fail("tau must be positive");
  if (std::abs(std::sin(kappa.value() * tau)) < kSinMargin)
    fail("|sin(kappa*tau)| = " + std::to_string(std::abs(std::sin(kappa.value() * tau))) + " is below the margin 0.1");
  if (depth < 1) fail("depth must be >= 1");
  if (extrapolation_order < 0) fail("extrapolation order must be >= 0");
  if (int(ladder.size()) < extrapolation_order + 2)
    fail("ladder needs at least p+2 = " + std::to_string(extrapolation_order + 2) + " radii");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (!(ladder[k] > 0) || !std::isfinite(ladder[k])) fail("ladder radii must be positive and finite");
    if (k > 0 && !(ladder[k] > ladder[k - 1])) fail("ladder radii must be strictly increasing");
  }
  if (!(ladder.front() > s_min)) fail("smallest ladder radius must lie beyond the obstacle ball along the ray");
  precision_for_digits(precision_digits);
}

Complex two_point_estimate(double J_at_x, double J_at_y, double s, double tau, WaveNumber kappa) {
  const double k = kappa.value();
  const double sn = std::sin(k * tau);
  if (std::abs(sn) < kSinMargin)
    throw Error(ErrorKind::Numerical, "rayrecover", "two_point_estimate", "near-singular system: |sin(kappa*tau)| < 0.1");
  return (-std::polar(1.0, -k * (s + tau)) * J_at_x + std::polar(1.0, -k * s) * J_at_y) / sn;
}

Extrapolated extrapolate_estimates(std::span<const std::pair<double, Complex>> estimates, int p) {
  if (p < 0) throw Error(ErrorKind::Validation, "rayrecover", "extrapolate", "order must be >= 0");
  const int rows = int(estimates.size());
  if (rows < p + 2)
    throw Error(ErrorKind::Validation, "rayrecover", "extrapolate", "need at least p+2 estimates");
  const int cols = p + 1;
  std::vector<double> a(std::size_t(rows) * cols), br(rows), bi(rows);
  for (int i = 0; i < rows; ++i) {
    const double inv = 1.0 / estimates[i].first;
    double t = 1;
    for (int j = 0; j < cols; ++j) {
      a[std::size_t(i) * cols + j] = t;
      t *= inv;
    }
    br[i] = estimates[i].second.real();
    bi[i] = estimates[i].second.imag();
  }
  const auto fr = detail::lstsq<double>(a, br, rows, cols, 1e-13);
  const auto fi = detail::lstsq<double>(a, bi, rows, cols, 1e-13);
  if (fr.rank_deficient || fi.rank_deficient)
    throw Error(ErrorKind::Numerical, "rayrecover", "extrapolate", "rank-deficient fit: radii nearly coincide");
  return {Complex(fr.x[0], fi.x[0]), std::hypot(fr.residual_norm, fi.residual_norm)};
}

std::pair<Vec3, Direction> shift_frame(const Ray& ray) { return {ray.origin, ray.direction}; }

namespace {

template <class T> T to(const Real50& v) { return static_cast<T>(v); }
template <> Real50 to<Real50>(const Real50& v) { return v; }

template <class T> struct Cplx {
  T re, im;
};

template <class T> Cplx<T> mul(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cplx<T> expi(const T& ph) {
  using std::cos;
  using std::sin;
  return {cos(ph), sin(ph)};
}

template <class T>
RayRecovery recover_impl(const awseries::RaySampler& sampler, const RecoverParams& params, Precision prec) {
  using std::abs;
  using std::cos;
  using std::log10;
  using std::sin;
  using std::sqrt;
  const WaveNumber kappa = sampler.kappa();
  const T k = T(kappa.value());
  const T tau = T(params.tau);
  const T sin_kt = sin(k * tau);
  const int K = int(params.ladder.size());
  const int N = params.depth;

  // I at x (radius s_k) and y (radius s_k + τ), sampled once.
  std::vector<T> sx(K), sy(K), ix(K), iy(K);
  for (int i = 0; i < K; ++i) {
    const Real50 s50 = Real50(params.ladder[i]);
    const Real50 y50 = s50 + Real50(params.tau);
    sx[i] = to<T>(s50);
    sy[i] = to<T>(y50);
    if constexpr (std::is_same_v<T, double>) {
      ix[i] = sx[i] * sampler.im_psi_double(s50);
      iy[i] = sy[i] * sampler.im_psi_double(y50);
    } else {
      ix[i] = sx[i] * sampler.im_psi(s50);
      iy[i] = sy[i] * sampler.im_psi(y50);
    }
  }

  // I_n(s) = Σ_{j<n} Im(e^{iκs} f_j) / s^{j}  (0-based j)
  std::vector<Cplx<T>> f;
  auto partial_I = [&](const T& s) {
    const Cplx<T> e = expi<T>(k * s);
    T sum = 0, inv = 1;
    for (const auto& fj : f) {
      sum += mul(e, fj).im * inv;
      inv /= s;
    }
    return sum;
  };

  RayRecovery out;
  out.precision = prec;
  out.validated_min = params.ladder.front();
  const double budget = significant_digits(prec);
  const double log_sk = std::log10(std::max(10.0, kappa.value() * params.ladder.back()));

  for (int n = 0; n < N; ++n) {
    DepthReport rep;
    rep.index = n + 1;
    rep.cancellation_digits = n * log_sk;
    if (rep.cancellation_digits + 6.0 > budget)
      throw Error(ErrorKind::Numerical, "rayrecover", "depth " + std::to_string(n + 1),
                  "precision exhausted: recursion needs ~" + std::to_string(rep.cancellation_digits + 6.0) +
                      " digits, working precision has " + std::to_string(budget));

    // Two-point estimates at each ladder radius.
    std::vector<Cplx<T>> est(K);
    for (int i = 0; i < K; ++i) {
      T pw = 1;
      for (int t = 0; t < n; ++t) pw *= sx[i];
      const T jx = pw * (ix[i] - partial_I(sx[i]));
      pw = 1;
      for (int t = 0; t < n; ++t) pw *= sy[i];
      const T jy = pw * (iy[i] - partial_I(sy[i]));
      const Cplx<T> ex = expi<T>(-k * sy[i]);
      const Cplx<T> ey = expi<T>(-k * sx[i]);
      est[i] = {(-ex.re * jx + ey.re * jy) / sin_kt, (-ex.im * jx + ey.im * jy) / sin_kt};
    }

    // E(s) = f + Σ_m [g_m a_m(s) + conj(g_m) b_m(s)]
    const int P = std::max(0, std::min(N - 1 - n + params.extrapolation_order, K - 2));
    rep.correction_terms = P;
    const int cols = 2 * (P + 1);
    const int rows = 2 * K;
    std::vector<T> a(std::size_t(rows) * cols, T(0)), b(rows);
    const Cplx<T> ekt = expi<T>(k * tau), emkt = expi<T>(-k * tau);
    for (int i = 0; i < K; ++i) {
      T* re_row = &a[std::size_t(2 * i) * cols];
      T* im_row = &a[std::size_t(2 * i + 1) * cols];
      re_row[0] = 1;
      im_row[1] = 1;
      b[2 * i] = est[i].re;
      b[2 * i + 1] = est[i].im;
      const Cplx<T> osc = expi<T>(-2 * k * sx[i] - k * tau);
      T ps = 1, py = 1;
      for (int m = 1; m <= P; ++m) {
        ps /= sx[i];
        py /= sy[i];
        // a_m = (e^{iκτ} py − e^{−iκτ} ps) / (2i sinκτ); b_m = osc (ps − py) / (2i sinκτ)
        const Cplx<T> num_a{ekt.re * py - emkt.re * ps, ekt.im * py - emkt.im * ps};
        const Cplx<T> num_b{osc.re * (ps - py), osc.im * (ps - py)};
        const T d = 2 * sin_kt;
        const Cplx<T> am{num_a.im / d, -num_a.re / d};  // divide by 2i·sin
        const Cplx<T> bm{num_b.im / d, -num_b.re / d};
        // g a + ḡ b = gr (a + b) + gi · i (a − b)
        const Cplx<T> c_re{am.re + bm.re, am.im + bm.im};
        const Cplx<T> c_im{-(am.im - bm.im), am.re - bm.re};
        re_row[2 * m] = c_re.re;
        im_row[2 * m] = c_re.im;
        re_row[2 * m + 1] = c_im.re;
        im_row[2 * m + 1] = c_im.im;
      }
    }
    const T rank_tol = prec == Precision::Double ? T(1e-14) : T(1e-45);
    const auto fit = detail::lstsq<T>(a, b, rows, cols, rank_tol);
    if (fit.rank_deficient)
      throw Error(ErrorKind::Numerical, "rayrecover", "depth " + std::to_string(n + 1),
                  "rank-deficient extrapolation fit (ladder radii too close)");
    rep.fit_residual = fit.rhs_norm > 0 ? static_cast<double>(fit.residual_norm / fit.rhs_norm) : 0.0;
    rep.condition = static_cast<double>(fit.condition);
    f.push_back({fit.x[0], fit.x[1]});
    if (n == N - 1 && P >= 1) out.next_coeff_estimate = Complex(static_cast<double>(fit.x[2]), static_cast<double>(fit.x[3]));
    out.report.push_back(rep);
  }

  out.recovered.kappa = kappa;
  out.recovered.origin = sampler.ray().origin;
  out.recovered.theta = sampler.ray().direction;
  for (const auto& c : f) out.recovered.coeffs.emplace_back(static_cast<double>(c.re), static_cast<double>(c.im));
  return out;
}

}  // namespace

RayRecovery recover_coeffs(const awseries::RaySampler& sampler, const RecoverParams& params) {
  params.validate(sampler.kappa(), sampler.s_min());
  const Precision prec = precision_for_digits(params.precision_digits);
  if (prec == Precision::Double) return recover_impl<double>(sampler, params, prec);
  return recover_impl<Real50>(sampler, params, prec);
}

void recover_coeffs_on_interval(const awseries::RaySampler&, const RecoverParams&, double s_begin, double s_end) {
  throw Error(ErrorKind::Validation, "rayrecover", "interval",
              "recovery from the interval [" + std::to_string(s_begin) + ", " + std::to_string(s_end) +
                  "] needs analytic continuation of Im psi; only full-ray sampling is supported");
}

Reconstruction reconstruct_on_ray(const RayRecovery& rec, double s) {
  Reconstruction r;
  r.value = awseries::eval_full(rec.recovered, s);
  r.error_estimate = std::abs(rec.next_coeff_estimate) / std::pow(s, double(rec.recovered.depth() + 1));
  r.out_of_range = s < rec.validated_min;
  return r;
}

}  // namespace helmrec::rayrecover
