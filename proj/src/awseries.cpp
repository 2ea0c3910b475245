#include "helmrec/awseries.hpp"

#include <cmath>

#include "lstsq.hpp"

namespace helmrec::awseries {

using Real100 = boost::multiprecision::cpp_bin_float_100;

void AWExpansion::validate() const {
  if (coeffs.empty())
    throw Error(ErrorKind::Validation, "awseries", "expansion", "expansion needs at least one coefficient");
  if (std::abs(theta.vec().norm() - 1.0) > 1e-12)
    throw Error(ErrorKind::Validation, "awseries", "expansion", "theta must be a unit vector");
  for (const auto& c : coeffs)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::Validation, "awseries", "expansion", "coefficients must be finite");
}

Complex eval_partial(const AWExpansion& aw, double s, std::size_t n) {
  if (n == 0 || n > aw.depth())
    throw Error(ErrorKind::Validation, "awseries", "eval_partial",
                "term count " + std::to_string(n) + " outside 1.." + std::to_string(aw.depth()));
  if (!(s > 0)) throw Error(ErrorKind::Domain, "awseries", "eval_partial", "radius must be positive");
  // Horner in 1/s.
  Complex sum{0.0, 0.0};
  for (std::size_t j = n; j-- > 0;) sum = sum / s + aw.coeffs[j];
  return std::polar(1.0, aw.kappa.value() * s) / s * sum;
}

std::vector<Complex> exact_coeffs_multipole(int l, WaveNumber kappa, Complex angular_value) {
  if (l < 0) throw Error(ErrorKind::Validation, "awseries", "exact_coeffs_multipole", "negative degree");
  const double k = kappa.value();
  Complex lead = angular_value;
  for (int j = 0; j <= l; ++j) lead *= Complex(0, -1);
  std::vector<Complex> out;
  out.reserve(l + 1);
  Complex ihalf_pow{1.0, 0.0};
  for (int m = 0; m <= l; ++m) {
    double ratio = 1;  // (l+m)!/(m!(l−m)!)
    for (int t = l - m + 1; t <= l + m; ++t) ratio *= t;
    for (int t = 2; t <= m; ++t) ratio /= t;
    out.push_back(lead * ihalf_pow * ratio / std::pow(k, m + 1));
    ihalf_pow *= Complex(0, 0.5);
  }
  return out;
}

OracleFit oracle_coeffs_point_source(const Vec3& y0, const Vec3& q, const Direction& theta, WaveNumber kappa,
                                     int n, double s0, double ratio) {
  if (n < 1 || n > 12)
    throw Error(ErrorKind::Validation, "awseries", "oracle", "oracle depth must be in 1..12");
  if (!(ratio > 1)) throw Error(ErrorKind::Validation, "awseries", "oracle", "ladder ratio must exceed 1");
  const double offset = distance(y0, q);
  if (s0 <= 0) s0 = std::max(20.0 / kappa.value(), 4.0 * offset);
  if (!(s0 > 2.0 * offset))
    throw Error(ErrorKind::Validation, "awseries", "oracle", "ladder start must exceed twice the source offset");

  // Fit more terms than requested so truncation does not pollute f_n.
  const int terms = n + 10;
  const int rows = 3 * terms;
  const Real100 k = kappa.value();
  const Real100 pi = boost::math::constants::pi<Real100>();
  // Renormalise θ in 100 digits; the double unit vector is off by an ulp,
  // which at the far end of the ladder shows up as a phase drift.
  const Real100 tx = theta.vec().x, ty = theta.vec().y, tz = theta.vec().z;
  const Real100 tn = sqrt(tx * tx + ty * ty + tz * tz);
  const Real100 thx = tx / tn, thy = ty / tn, thz = tz / tn;
  const Vec3 qy = q - y0;
  const Real100 rel_x = qy.x, rel_y = qy.y, rel_z = qy.z;

  std::vector<Real100> a(std::size_t(rows) * terms), b_re(rows), b_im(rows);
  Real100 t = 1;
  for (int i = 0; i < rows; ++i) {
    const Real100 s = Real100(s0) / t;
    const Real100 dx = rel_x + s * thx, dy = rel_y + s * thy, dz = rel_z + s * thz;
    const Real100 d = sqrt(dx * dx + dy * dy + dz * dz);
    // g(s) = s e^{−iκs} e^{iκd} / (4πd)
    const Real100 mag = s / (4 * pi * d);
    const Real100 phase = k * (d - s);
    b_re[i] = mag * cos(phase);
    b_im[i] = mag * sin(phase);
    Real100 tp = 1;
    for (int j = 0; j < terms; ++j) {
      a[std::size_t(i) * terms + j] = tp;
      tp *= t;
    }
    t /= Real100(ratio);
  }
  const auto fit_re = detail::lstsq<Real100>(a, b_re, rows, terms, Real100(1e-80));
  const auto fit_im = detail::lstsq<Real100>(a, b_im, rows, terms, Real100(1e-80));
  if (fit_re.rank_deficient || fit_im.rank_deficient)
    throw Error(ErrorKind::Numerical, "awseries", "oracle", "rank-deficient oracle fit");

  OracleFit out;
  const Real100 res = sqrt(fit_re.residual_norm * fit_re.residual_norm + fit_im.residual_norm * fit_im.residual_norm);
  const Real100 nrm = sqrt(fit_re.rhs_norm * fit_re.rhs_norm + fit_im.rhs_norm * fit_im.rhs_norm);
  out.relative_residual = static_cast<double>(res / nrm);
  if (out.relative_residual > 1e-25)
    throw Error(ErrorKind::Numerical, "awseries", "oracle",
                "oracle fit residual " + fmt_sci(out.relative_residual) + " exceeds 1e-25");
  Real100 spow = 1;
  for (int j = 0; j < n; ++j) {
    out.coeffs.emplace_back(static_cast<double>(fit_re.x[j] * spow), static_cast<double>(fit_im.x[j] * spow));
    spow *= Real100(s0);
  }
  return out;
}

AWExpansion shift_along_ray(const AWExpansion& aw, double c) {
  // e^{iκs}/s^j with s = s' + c equals e^{iκc} e^{iκs'} s'^{−j} Σ_k C(−j,k) (c/s')^k.
  AWExpansion out = aw;
  out.origin = aw.origin + aw.theta.vec() * c;
  const std::size_t n = aw.depth();
  const Complex phase = std::polar(1.0, aw.kappa.value() * c);
  for (std::size_t m = 1; m <= n; ++m) {
    Complex sum{0.0, 0.0};
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t k = m - j;
      double binom = 1;  // C(−j, k) = (−1)^k C(j+k−1, k)
      for (std::size_t t = 1; t <= k; ++t) binom *= -double(j + t - 1) / double(t);
      sum += aw.coeffs[j - 1] * binom * std::pow(c, double(k));
    }
    out.coeffs[m - 1] = phase * sum;
  }
  return out;
}

// ---------------------------------------------------------------------------

double ray_exit_radius(const Ray& ray, double r) {
  const double b = dot(ray.origin, ray.direction.vec());
  const double disc = b * b - dot(ray.origin, ray.origin) + r * r;
  if (disc <= 0) return 0.0;
  return std::max(0.0, -b + std::sqrt(disc));
}

SceneRaySampler::SceneRaySampler(std::shared_ptr<const fields::Scene> scene, const Ray& ray)
    : RaySampler(ray, scene->kappa, ray_exit_radius(ray, scene->obstacle_radius)), scene_(std::move(scene)) {}

Real50 SceneRaySampler::im_psi(const Real50& s) const {
  if (!(s > s_min()))
    throw Error(ErrorKind::Validation, "awseries", "sampler", "sample radius inside the obstacle ball");
  return fields::eval_scene_on_ray50(*scene_, ray(), s).imag();
}

TableRaySampler::TableRaySampler(const Ray& ray, WaveNumber kappa, std::map<Real50, Real50> samples, double s_min)
    : RaySampler(ray, kappa, s_min), samples_(std::move(samples)) {}

Real50 TableRaySampler::im_psi(const Real50& s) const {
  auto it = samples_.lower_bound(s);
  const Real50 tol = abs(s) * Real50(1e-12);
  if (it != samples_.end() && abs(it->first - s) <= tol) return it->second;
  if (it != samples_.begin()) {
    --it;
    if (abs(it->first - s) <= tol) return it->second;
  }
  throw Error(ErrorKind::Validation, "awseries", "sampler",
              "no offline sample at s = " + s.str(17));
}

}  // namespace helmrec::awseries
