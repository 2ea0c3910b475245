#include "helmrec/fields.hpp"

#include <cmath>

namespace helmrec::fields {

namespace {

template <class T> ComplexT<T> expi(const T& phase) {
  using std::cos;
  using std::sin;
  return ComplexT<T>(cos(phase), sin(phase));
}

void guard(double r, WaveNumber kappa, const char* stage) {
  if (!(r > kSingularityGuard * kappa.wavelength()))
    throw Error(ErrorKind::Domain, "fields", stage, "evaluation point coincides with a source singularity");
}

template <class T> T factorial_ratio(int l, int m) {
  // (l+m)! / (m! (l-m)!)
  T r = 1;
  for (int k = l - m + 1; k <= l + m; ++k) r *= k;
  for (int k = 2; k <= m; ++k) r /= k;
  return r;
}

}  // namespace

Complex green_outgoing(const Vec3& x, WaveNumber kappa) {
  const double r = x.norm();
  guard(r, kappa, "green_outgoing");
  return -std::polar(1.0, kappa.value() * r) / (4 * M_PI * r);
}

std::array<Complex, 3> green_outgoing_gradient(const Vec3& x, WaveNumber kappa) {
  const double r = x.norm();
  guard(r, kappa, "green_outgoing_gradient");
  const double k = kappa.value();
  // d/dr [−e^{ikr}/(4πr)] = −e^{ikr}(ikr − 1)/(4πr²)
  const Complex radial = -std::polar(1.0, k * r) * Complex(-1.0, k * r) / (4 * M_PI * r * r);
  return {radial * (x.x / r), radial * (x.y / r), radial * (x.z / r)};
}

Complex r0_plus(const Vec3& x, const Vec3& y, WaveNumber kappa) {
  const double r = distance(x, y);
  guard(r, kappa, "r0_plus");
  return std::polar(1.0, kappa.value() * r) / (4 * M_PI * r);
}

template <class T> ComplexT<T> spherical_hankel1(int l, const T& z) {
  if (l < 0) throw Error(ErrorKind::Validation, "fields", "spherical_hankel1", "negative degree");
  using C = ComplexT<T>;
  // Σ_{m=0}^{l} (i/2)^m (l+m)!/(m!(l−m)!) z^{−m}, summed from the top term down.
  C sum(T(0), T(0));
  const C i_half(T(0), T(1) / 2);
  for (int m = l; m >= 0; --m) {
    C term = C(factorial_ratio<T>(l, m), T(0));
    for (int j = 0; j < m; ++j) term = term * i_half / C(z, T(0));
    sum = sum + term;
  }
  C phase(T(1), T(0));
  const C minus_i(T(0), T(-1));
  for (int j = 0; j <= l; ++j) phase = phase * minus_i;
  return phase * expi<T>(z) / C(z, T(0)) * sum;
}

template <class T> ComplexT<T> spherical_harmonic(int l, int m, const std::array<T, 3>& dir) {
  using std::sqrt;
  using C = ComplexT<T>;
  if (l < 0 || std::abs(m) > l)
    throw Error(ErrorKind::Validation, "fields", "spherical_harmonic", "requires l >= 0 and |m| <= l");
  if (m < 0) {
    const C y = spherical_harmonic<T>(l, -m, dir);
    const T sign = (m % 2 == 0) ? T(1) : T(-1);
    return C(sign * y.real(), -sign * y.imag());
  }
  const T r = sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  const T ct = dir[2] / r;
  const T rho = sqrt(dir[0] * dir[0] + dir[1] * dir[1]);
  const T st = rho / r;

  // Associated Legendre P_l^m(cosθ) with Condon–Shortley phase.
  T pmm = 1;
  for (int k = 1; k <= m; ++k) pmm *= -T(2 * k - 1) * st;
  T plm = pmm;
  if (l > m) {
    T pm1 = ct * T(2 * m + 1) * pmm;
    T pm2 = pmm;
    plm = pm1;
    for (int ll = m + 2; ll <= l; ++ll) {
      plm = (ct * T(2 * ll - 1) * pm1 - T(ll + m - 1) * pm2) / T(ll - m);
      pm2 = pm1;
      pm1 = plm;
    }
  }
  T norm = T(2 * l + 1) / (4 * pi_v<T>());
  for (int k = l - m + 1; k <= l + m; ++k) norm /= k;
  norm = sqrt(norm);

  C eimphi(T(1), T(0));
  if (m > 0 && rho > 0) {
    const C e1(dir[0] / rho, dir[1] / rho);
    for (int k = 0; k < m; ++k) eimphi = eimphi * e1;
  }
  return C(norm * plm, T(0)) * eimphi;
}

Complex spherical_harmonic(int l, int m, const Vec3& dir) {
  return spherical_harmonic<double>(l, m, std::array<double, 3>{dir.x, dir.y, dir.z});
}

template Complex spherical_hankel1<double>(int, const double&);
template Complex50 spherical_hankel1<Real50>(int, const Real50&);
template Complex spherical_harmonic<double>(int, int, const std::array<double, 3>&);
template Complex50 spherical_harmonic<Real50>(int, int, const std::array<Real50, 3>&);

Complex multipole_field(int l, int m, const Vec3& center, WaveNumber kappa, const Vec3& x) {
  if (l < 0 || std::abs(m) > l)
    throw Error(ErrorKind::Validation, "fields", "multipole_field", "requires l >= 0 and |m| <= l");
  const Vec3 rho = x - center;
  const double r = rho.norm();
  guard(r, kappa, "multipole_field");
  return spherical_hankel1<double>(l, kappa.value() * r) * spherical_harmonic(l, m, rho);
}

// ---------------------------------------------------------------------------

Vec3 PotentialGrid::voxel_center(int i, int j, int k) const {
  return {corner.x + (i + 0.5) * size.x / n, corner.y + (j + 0.5) * size.y / n,
          corner.z + (k + 0.5) * size.z / n};
}

Vec3 PotentialGrid::voxel_center(std::size_t flat) const {
  const int k = int(flat % n);
  const int j = int((flat / n) % n);
  const int i = int(flat / (std::size_t(n) * n));
  return voxel_center(i, j, k);
}

void PotentialGrid::validate() const {
  if (n <= 0) throw Error(ErrorKind::Validation, "fields", "potential", "resolution n must be positive");
  if (!(size.x > 0 && size.y > 0 && size.z > 0))
    throw Error(ErrorKind::Validation, "fields", "potential", "box edge lengths must be positive");
  if (values.size() != voxel_count())
    throw Error(ErrorKind::Validation, "fields", "potential",
                "expected " + std::to_string(voxel_count()) + " voxel values, got " + std::to_string(values.size()));
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::Validation, "fields", "potential", "potential values must be finite");
}

void Scene::validate() const {
  if (!(obstacle_radius > 0))
    throw Error(ErrorKind::Validation, "fields", "scene", "obstacle_radius must be positive");
  for (const auto& src : sources) {
    if (const auto* p = std::get_if<PointSource>(&src)) {
      if (!(p->position.norm() < obstacle_radius))
        throw Error(ErrorKind::Validation, "fields", "scene", "point source outside the obstacle ball");
    } else {
      const auto& mp = std::get<MultipoleSource>(src);
      if (mp.l < 0 || std::abs(mp.m) > mp.l)
        throw Error(ErrorKind::Validation, "fields", "scene", "multipole requires l >= 0 and |m| <= l");
      if (!(mp.center.norm() < obstacle_radius))
        throw Error(ErrorKind::Validation, "fields", "scene", "multipole center outside the obstacle ball");
    }
  }
  if (potential) {
    potential->validate();
    for (int c = 0; c < 8; ++c) {
      const Vec3 corner = potential->corner + Vec3{(c & 1) ? potential->size.x : 0.0,
                                                   (c & 2) ? potential->size.y : 0.0,
                                                   (c & 4) ? potential->size.z : 0.0};
      if (!(corner.norm() < obstacle_radius))
        throw Error(ErrorKind::Validation, "fields", "scene", "potential box not strictly inside the obstacle ball");
    }
  }
}

namespace {

void require_scattering(const Scene& scene) {
  if (scene.potential && !scene.scattering)
    throw Error(ErrorKind::Validation, "fields", "eval_scene",
                "scene has a potential but no scattering solution attached");
}

}  // namespace

Complex eval_scene(const Scene& scene, const Vec3& x) {
  require_scattering(scene);
  Complex total{0.0, 0.0};
  std::size_t point_index = 0;
  for (const auto& src : scene.sources) {
    if (const auto* p = std::get_if<PointSource>(&src)) {
      total += p->amplitude * r0_plus(x, p->position, scene.kappa);
      if (scene.scattering) total += p->amplitude * scene.scattering->scattered(x, point_index);
      ++point_index;
    } else {
      const auto& mp = std::get<MultipoleSource>(src);
      total += mp.amplitude * multipole_field(mp.l, mp.m, mp.center, scene.kappa, x);
    }
  }
  return total;
}

Complex50 eval_scene_on_ray50(const Scene& scene, const Ray& ray, const Real50& s) {
  require_scattering(scene);
  using C = Complex50;
  const Vec3& o = ray.origin;
  const Vec3& d = ray.direction.vec();
  // Unit length in 50 digits, so s is an exact arc length along the ray.
  const Real50 dn = sqrt(Real50(d.x) * d.x + Real50(d.y) * d.y + Real50(d.z) * d.z);
  const std::array<Real50, 3> x{Real50(o.x) + s * d.x / dn, Real50(o.y) + s * d.y / dn, Real50(o.z) + s * d.z / dn};
  const Real50 k = scene.kappa.value();
  const double guard_r = kSingularityGuard * scene.kappa.wavelength();

  C total(0, 0);
  std::size_t point_index = 0;
  for (const auto& src : scene.sources) {
    if (const auto* p = std::get_if<PointSource>(&src)) {
      const Real50 dx = x[0] - p->position.x, dy = x[1] - p->position.y, dz = x[2] - p->position.z;
      const Real50 r = sqrt(dx * dx + dy * dy + dz * dz);
      if (!(r > guard_r))
        throw Error(ErrorKind::Domain, "fields", "eval_scene", "evaluation point coincides with a source singularity");
      const C amp(p->amplitude.real(), p->amplitude.imag());
      total += amp * expi<Real50>(k * r) / C(4 * pi_v<Real50>() * r, 0);
      if (scene.scattering) total += amp * scene.scattering->scattered50(x, point_index);
      ++point_index;
    } else {
      const auto& mp = std::get<MultipoleSource>(src);
      const std::array<Real50, 3> rho{x[0] - mp.center.x, x[1] - mp.center.y, x[2] - mp.center.z};
      const Real50 r = sqrt(rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2]);
      if (!(r > guard_r))
        throw Error(ErrorKind::Domain, "fields", "eval_scene", "evaluation point coincides with a source singularity");
      const C amp(mp.amplitude.real(), mp.amplitude.imag());
      total += amp * spherical_hankel1<Real50>(mp.l, k * r) * spherical_harmonic<Real50>(mp.l, mp.m, rho);
    }
  }
  return total;
}

double im_diagnostic(const Scene& scene, const Vec3& x) {
  if (!(x.norm() > 0))
    throw Error(ErrorKind::Domain, "fields", "im_diagnostic", "I(x) undefined at the origin");
  return x.norm() * eval_scene(scene, x).imag();
}

}  // namespace helmrec::fields
