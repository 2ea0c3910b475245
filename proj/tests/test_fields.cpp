#include <cmath>
#include <complex>

#include "doctest.h"
#include "helmrec/fields.hpp"

using namespace helmrec;
using namespace helmrec::fields;

namespace {

Vec3 axis(int d, double h) { return {d == 0 ? h : 0.0, d == 1 ? h : 0.0, d == 2 ? h : 0.0}; }

double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

// Upward recurrence h_{l+1} = (2l+1)/z h_l − h_{l−1}, seeded from the l = 0, 1
// closed forms. Stable for h⁽¹⁾ and independent of the Rayleigh sum.
Complex hankel_by_recurrence(int l, double z) {
  const Complex i(0, 1);
  Complex h0 = -i * std::exp(i * z) / z;
  Complex h1 = -std::exp(i * z) * (z + i) / (z * z);
  if (l == 0) return h0;
  for (int n = 1; n < l; ++n) {
    const Complex h2 = double(2 * n + 1) / z * h1 - h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// Seven-point Laplacian plus κ²ψ.
template <class F> Complex helmholtz_residual(F&& psi, const Vec3& x, double kappa, double h) {
  Complex lap = -6.0 * psi(x);
  for (int d = 0; d < 3; ++d) {
    const Vec3 e = axis(d, h);
    lap += psi(x + e) + psi(x - e);
  }
  return lap / (h * h) + kappa * kappa * psi(x);
}

}  // namespace

TEST_CASE("green function examples") {
  const Complex g = green_outgoing({1, 0, 0}, WaveNumber(M_PI));
  CHECK(std::abs(g - Complex(1.0 / (4 * M_PI), 0)) < 1e-15);

  // |x| = one wavelength: purely real.
  const Complex h = green_outgoing({0, 2, 0}, WaveNumber(M_PI));
  CHECK(std::abs(h.imag()) < 1e-16);
  CHECK(h.real() == doctest::Approx(-1.0 / (8 * M_PI)));

  const Complex want = -std::exp(Complex(0, 2)) / (8 * M_PI);
  CHECK(rel_err(green_outgoing({0, 2, 0}, WaveNumber(1)), want) < 1e-14);

  CHECK_THROWS_AS(green_outgoing({0, 0, 0}, WaveNumber(1)), Error);
}

TEST_CASE("r0_plus is -G+ of the difference and symmetric") {
  const WaveNumber k(2 * M_PI);
  CHECK(std::abs(r0_plus({1, 0, 0}, {0, 0, 0}, k) - Complex(1.0 / (4 * M_PI), 0)) < 1e-15);
  const Vec3 x{0.3, -1.2, 2.0}, y{-0.4, 0.1, 0.25};
  CHECK(std::abs(r0_plus(x, y, k) - r0_plus(y, x, k)) < 1e-16);
  CHECK(std::abs(r0_plus(x, y, k) + green_outgoing(x - y, k)) < 1e-16);
}

TEST_CASE("green gradient matches central differences") {
  const WaveNumber k(1.7);
  const Vec3 x{0.8, -0.5, 1.1};
  const auto g = green_outgoing_gradient(x, k);
  const double h = 1e-5;
  for (int d = 0; d < 3; ++d) {
    const Vec3 e = axis(d, h);
    const Complex fd = (green_outgoing(x + e, k) - green_outgoing(x - e, k)) / (2 * h);
    CHECK(std::abs(fd - g[d]) < 1e-9);
  }
}

TEST_CASE("spherical hankel against frozen reference values") {
  // Independent reference: sqrt(pi/2z) (J_{l+1/2} + i Y_{l+1/2}) at 40 digits.
  struct Ref {
    int l;
    Complex v;
  };
  const Ref refs[] = {{0, {-0.19178485493262769378, -0.056732437092645252893}},
                      {1, {-0.095089408079170791649, 0.1804383675140986432}},
                      {2, {0.13473121008512521879, 0.16499545760110443881}},
                      {3, {0.22982061816429601044, -0.015442909912994204387}},
                      {6, {0.047966899859420796676, -0.51840757137012987222}}};
  for (const auto& r : refs) CHECK(rel_err(spherical_hankel1<double>(r.l, 5.0), r.v) < 1e-14);

  CHECK(rel_err(spherical_hankel1<double>(1, 1.0), -std::exp(Complex(0, 1)) * Complex(1, 1)) < 1e-15);
}

TEST_CASE("spherical hankel agrees with the upward recurrence") {
  for (double z : {0.7, 3.0, 12.5, 40.0})
    for (int l = 0; l <= 8; ++l) {
      CAPTURE(z);
      CAPTURE(l);
      CHECK(rel_err(spherical_hankel1<double>(l, z), hankel_by_recurrence(l, z)) < 1e-11);
    }
}

TEST_CASE("spherical hankel in 50 digits agrees with double") {
  const Complex50 h = spherical_hankel1<Real50>(4, Real50(7.25));
  const Complex d = spherical_hankel1<double>(4, 7.25);
  CHECK(std::abs(double(h.real()) - d.real()) < 1e-14);
  CHECK(std::abs(double(h.imag()) - d.imag()) < 1e-14);
}

TEST_CASE("spherical harmonics against frozen reference values") {
  const Vec3 dir{1, 2, 3};
  struct Ref {
    int l, m;
    Complex v;
  };
  const Ref refs[] = {{2, 1, {-0.165546086581366963, -0.33109217316273392601}},
                      {3, -2, {-0.17558814063086985062, -0.23411752084115980083}},
                      {1, 0, {0.39175354239811348814, 0.0}},
                      {4, 3, {0.21074060479411033103, 0.038316473598929151097}}};
  for (const auto& r : refs) {
    CAPTURE(r.l);
    CAPTURE(r.m);
    CHECK(std::abs(spherical_harmonic(r.l, r.m, dir) - r.v) < 1e-14);
  }
  CHECK_THROWS_AS(spherical_harmonic(2, 3, dir), Error);
}

TEST_CASE("spherical harmonics are orthonormal on a quadrature grid") {
  // Gauss-free check: midpoint rule in (cos θ, φ) with many nodes.
  const int nt = 600, np = 64;
  for (auto [l1, m1, l2, m2] : {std::array{2, 1, 2, 1}, std::array{3, -2, 1, 0}, std::array{2, 0, 4, 0}}) {
    Complex sum{0, 0};
    for (int a = 0; a < nt; ++a) {
      const double ct = -1 + (a + 0.5) * 2.0 / nt, st = std::sqrt(1 - ct * ct);
      for (int b = 0; b < np; ++b) {
        const double ph = (b + 0.5) * 2 * M_PI / np;
        const Vec3 d{st * std::cos(ph), st * std::sin(ph), ct};
        sum += std::conj(spherical_harmonic(l1, m1, d)) * spherical_harmonic(l2, m2, d);
      }
    }
    sum *= (2.0 / nt) * (2 * M_PI / np);
    const double want = (l1 == l2 && m1 == m2) ? 1.0 : 0.0;
    CHECK(std::abs(sum - want) < 1e-4);
  }
}

TEST_CASE("l = 0 multipole is -i sqrt(4pi)/kappa times the point source field") {
  const WaveNumber k(1.3);
  const Vec3 c{0.1, 0.2, -0.3};
  for (const Vec3& x : {Vec3{2, 0, 0}, Vec3{-1, 4, 2}, Vec3{0.5, 0.5, 7}}) {
    const Complex want = Complex(0, -1) * std::sqrt(4 * M_PI) / k.value() * r0_plus(x, c, k);
    CHECK(rel_err(multipole_field(0, 0, c, k, x), want) < 1e-13);
  }
}

TEST_CASE("fields satisfy the Helmholtz equation to second order") {
  const double kappa = 1.5;
  const WaveNumber k(kappa);
  const Vec3 x{1.2, -0.7, 0.9};
  auto point = [&](const Vec3& p) { return r0_plus(p, {0.1, 0.0, -0.2}, k); };
  auto mp = [&](const Vec3& p) { return multipole_field(2, 1, {0, 0, 0}, k, p); };
  for (int which = 0; which < 2; ++which) {
    auto res = [&](double h) {
      return std::abs(which == 0 ? helmholtz_residual(point, x, kappa, h) : helmholtz_residual(mp, x, kappa, h));
    };
    const double r1 = res(0.02), r2 = res(0.01);
    CAPTURE(which);
    CHECK(r2 < 1e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("Sommerfeld residual decays like 1/|x|") {
  const WaveNumber k(2.0);
  const Vec3 y0{0.3, -0.2, 0.1};
  const Vec3 dir = Vec3{1, 1, 2}.normalized();
  auto som = [&](double r) {
    const Vec3 x = dir * r;
    const auto g = green_outgoing_gradient(x - y0, k);
    const Complex dr = -(g[0] * dir.x + g[1] * dir.y + g[2] * dir.z);
    return r * std::abs(dr - Complex(0, k.value()) * r0_plus(x, y0, k));
  };
  for (double r : {50.0, 100.0, 200.0}) CHECK(som(r) / som(2 * r) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("scene evaluation superposes sources") {
  Scene sc;
  sc.kappa = WaveNumber(1.1);
  sc.obstacle_radius = 1;
  sc.sources.push_back(PointSource{{0.2, 0, 0}, {2.0, -1.0}});
  sc.sources.push_back(MultipoleSource{1, -1, {0, 0.1, 0}, {0.0, 0.5}});
  sc.validate();
  const Vec3 x{3, -2, 1};
  const Complex want = Complex(2.0, -1.0) * r0_plus(x, {0.2, 0, 0}, sc.kappa) +
                       Complex(0.0, 0.5) * multipole_field(1, -1, {0, 0.1, 0}, sc.kappa, x);
  CHECK(std::abs(eval_scene(sc, x) - want) < 1e-15);
  CHECK(im_diagnostic(sc, x) == doctest::Approx(x.norm() * want.imag()).epsilon(1e-13));

  const Ray ray{{0.5, 0.5, 0}, Direction({0, 0, 1})};
  const Complex50 v = eval_scene_on_ray50(sc, ray, Real50(12));
  const Complex d = eval_scene(sc, ray.at(12));
  CHECK(std::abs(Complex(double(v.real()), double(v.imag())) - d) < 1e-14);
}

TEST_CASE("scene validation") {
  Scene sc;
  sc.kappa = WaveNumber(1);
  sc.sources.push_back(PointSource{{1.5, 0, 0}});
  CHECK_THROWS_AS(sc.validate(), Error);
  sc.sources = {MultipoleSource{2, 3, {0, 0, 0}}};
  CHECK_THROWS_AS(sc.validate(), Error);
  sc.sources = {PointSource{{0, 0, 0}}};
  sc.validate();
  try {
    eval_scene(sc, {0, 0, 1e-12});
    FAIL("expected a singularity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  sc.potential = PotentialGrid{{-0.3, -0.3, -0.3}, {0.6, 0.6, 0.6}, 2, std::vector<Complex>(8, 1.0)};
  sc.validate();
  CHECK_THROWS_AS(eval_scene(sc, {2, 0, 0}), Error);
  CHECK_THROWS_AS(WaveNumber(-1), Error);
}
