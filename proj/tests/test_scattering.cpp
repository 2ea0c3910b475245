#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "helmrec/scattering.hpp"

using namespace helmrec;
using namespace helmrec::scattering;

namespace {

const WaveNumber k2(2.0);

// Voxelised ball of radius `rad` in [−1,1]³, constant value eps.
fields::PotentialGrid ball(int n, Complex eps, double rad = 1.0) {
  fields::PotentialGrid g{{-1, -1, -1}, {2, 2, 2}, n, {}};
  g.values.assign(g.voxel_count(), 0.0);
  for (std::size_t f = 0; f < g.voxel_count(); ++f)
    if (g.voxel_center(f).norm() < rad) g.values[f] = eps;
  return g;
}

fields::PotentialGrid random_complex(int n, unsigned seed, double scale = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  fields::PotentialGrid g{{-0.8, -0.8, -0.8}, {1.6, 1.6, 1.6}, n, {}};
  for (std::size_t f = 0; f < g.voxel_count(); ++f) g.values.emplace_back(1.5 * scale * u(rng), 0.8 * scale * u(rng));
  return g;
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

// Simpson's rule on [0, a].
template <class F> Complex simpson(F f, double a, int n = 2000) {
  const double h = a / n;
  Complex s = f(0.0) + f(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("self-cell mean against radial quadrature") {
  for (double vol : {1e-3, 0.008, 0.1}) {
    const double a = std::cbrt(3 * vol / (4 * M_PI));
    const Complex oracle =
        simpson([&](double r) { return -r * Complex(std::cos(2 * r), std::sin(2 * r)); }, a) / vol;
    CHECK(rel(self_cell_mean(k2, vol), oracle) < 1e-10);
  }
}

TEST_CASE("ball transform against radial quadrature") {
  for (double xi : {0.0, 1e-4, 0.7, 3.0, 9.5}) {
    const Complex oracle = simpson(
        [&](double r) { return Complex(4 * M_PI * r * r * (xi * r < 1e-12 ? 1.0 : std::sin(xi * r) / (xi * r))); }, 1.3);
    CHECK(std::abs(ball_fourier(1.3, xi) - oracle.real()) < 1e-9 * ball_fourier(1.3, 0));
  }
}

TEST_CASE("voxel transform against sub-cell midpoint sums") {
  fields::PotentialGrid g{{0.1, -0.3, 0.2}, {0.4, 0.5, 0.3}, 1, {Complex(1.2, -0.4)}};
  const Vec3 xi{3.0, -2.0, 5.0};
  Complex oracle{0, 0};
  const int m = 60;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) {
        const Vec3 z = g.corner + Vec3{(i + 0.5) * g.size.x / m, (j + 0.5) * g.size.y / m, (l + 0.5) * g.size.z / m};
        oracle += std::exp(Complex(0, -dot(xi, z)));
      }
  oracle *= g.values[0] * g.voxel_volume() / double(m * m * m);
  CHECK(rel(potential_fourier(g, xi), oracle) < 1e-3);
}

TEST_CASE("LS solution agrees with the Neumann series for a weak potential") {
  const auto g = ball(6, 0.05);
  const LSSolver s(g, k2);
  REQUIRE(s.born_norm() < 0.1);
  const Vec3 y{0.2, -2.4, 0.7};
  const Column c = s.green_column(y);

  // u = Σ_k (G D)^k r₀ with the same diagonal.
  const auto& z = s.centers();
  const std::size_t n = z.size();
  const Complex self = self_cell_mean(k2, g.voxel_volume());
  std::vector<Complex> term(n), u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = term[i] = fields::r0_plus(z[i], y, k2);
  for (int it = 0; it < 40; ++it) {
    std::vector<Complex> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        next[i] += (i == j ? self : fields::green_outgoing(z[i] - z[j], k2)) * s.strengths()[j] * term[j];
    term = next;
    for (std::size_t i = 0; i < n; ++i) u[i] += term[i];
  }
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c.u[i] - u[i]) < 1e-12 * std::abs(u[i]));
}

TEST_CASE("zero potential and argument checks") {
  const LSSolver zero(ball(6, 0.0), k2);
  CHECK(zero.unknowns() == 0);
  CHECK(zero.r_v_sc({0, 0, 3}, {1, 0, -2}) == Complex(0, 0));
  CHECK(zero.r_v({0, 0, 3}, {1, 0, -2}) == fields::r0_plus({0, 0, 3}, {1, 0, -2}, k2));

  SolverOptions small;
  small.max_unknowns = 10;
  CHECK_THROWS_AS(LSSolver(ball(6, 0.1), k2, small), Error);

  fields::Scene sc;
  CHECK_THROWS_AS(attach_potential(sc), Error);
}

TEST_CASE("reciprocity of the LS Green function") {
  const auto v = random_complex(6, 11, 4.0);
  const LSSolver s(v, k2);
  std::vector<PointPair> pairs;
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 6; ++i) {
    const Vec3 a{nd(rng), nd(rng), nd(rng)}, b{nd(rng), nd(rng), nd(rng)};
    pairs.push_back({a.normalized() * 2.5, b.normalized() * 3.1});
  }
  auto r = [&](const Vec3& x, const Vec3& y) { return s.r_v(x, y); };
  CHECK(reciprocity_report(r, pairs) < 1e-8);

  SolverOptions skew;
  skew.asymmetry = 0.5;
  const LSSolver t(v, k2, skew);
  auto rt = [&](const Vec3& x, const Vec3& y) { return t.r_v(x, y); };
  CHECK(reciprocity_report(rt, pairs) > 1e-3);
}

TEST_CASE("far field of the Green function equals the plane-wave scattered field") {
  const LSSolver s(random_complex(6, 5), k2);
  const std::vector<double> radii{50, 100, 200, 400, 800, 1600};
  for (const Vec3 dv : {Vec3{0.2, 0.5, -0.8}, Vec3{-1, 0, 0}}) {
    const Direction d(dv);
    const Vec3 y{0.3, -2.5, 0.4};
    const Column col = s.green_column(y);
    const Complex ff = farfield_from_green([&](const Vec3& x) { return s.scattered(col, x); }, d, k2, radii, 3);
    const Complex psi = s.scattered(s.plane_wave_column(Direction(-d.vec())), y);
    CHECK(rel(ff, psi) < 1e-6);
  }
}

TEST_CASE("scattering amplitude by radial extrapolation") {
  const LSSolver s(random_complex(6, 5), k2);
  const std::vector<double> radii{50, 100, 200, 400, 800, 1600};
  const Column pw = s.plane_wave_column(Direction(Vec3{0, 0, 1}));
  for (const Vec3 dv : {Vec3{0, 0, 1}, Vec3{0.3, -0.2, -0.9}}) {
    const Complex a = scattering_amplitude([&](const Vec3& x) { return s.scattered(pw, x); }, Direction(dv), k2, radii, 3);
    CHECK(rel(a, s.farfield(pw, Direction(dv))) < 1e-6);
  }
}

TEST_CASE("Born limit: second-order discrepancy") {
  const std::vector<Vec3> xs{{0, 0, 3}, {2.5, 1, 0}, {-1, -2, 2}};
  const Vec3 y{0.4, 2.2, -1.1};
  auto gap = [&](double eps) {
    const LSSolver s(ball(8, eps), k2);
    const Column full = s.green_column(y), born = s.born_green_column(y);
    double d = 0;
    for (const auto& x : xs) d = std::max(d, std::abs(s.scattered(full, x) - s.scattered(born, x)));
    return d;
  };
  const double g1 = gap(0.2), g2 = gap(0.1), g3 = gap(0.05), g4 = gap(0.025);
  CHECK(g1 / g2 > 3);
  CHECK(g1 / g2 < 5);
  CHECK(g2 / g3 > 3);
  CHECK(g2 / g3 < 5);
  // gap/ε² stable within a factor 2 over ε = 0.1, 0.05, 0.025
  const double n2 = g2 / 0.01, n3 = g3 / 0.0025, n4 = g4 / 0.000625;
  CHECK(std::max({n2, n3, n4}) < 2 * std::min({n2, n3, n4}));
}

TEST_CASE("absorbing potentials solve; zero potential is reciprocal") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  fields::PotentialGrid g{{-0.8, -0.8, -0.8}, {1.6, 1.6, 1.6}, 6, {}};
  for (std::size_t f = 0; f < g.voxel_count(); ++f) g.values.emplace_back(-20 + 40 * u(rng), -10 * u(rng));
  const LSSolver s(g, k2);
  CHECK(s.rcond() > 1e-6);

  const LSSolver zero(ball(4, 0.0), k2);
  auto r = [&](const Vec3& x, const Vec3& y) { return zero.r_v(x, y); };
  CHECK(reciprocity_report(r, {{{0, 0, 3}, {1, -2, 0.5}}, {{2, 2, 2}, {-3, 0, 0}}}) < 1e-15);
}

TEST_CASE("Born amplitude matches the potential transform") {
  const Direction th(Vec3{0, 0, 1});
  auto worst = [&](double eps) {
    const auto g = ball(8, eps);
    const LSSolver s(g, k2);
    const Column pw = s.plane_wave_column(th);
    double w = 0;
    for (const auto& tp : planeops::fibonacci_directions(30)) {
      const Complex born = -potential_fourier(g, (tp - th.vec()) * k2.value()) / (4 * M_PI);
      w = std::max(w, std::abs(s.farfield(pw, Direction(tp)) - born) / (eps * ball_fourier(1, 0)));
    }
    return w;
  };
  const double e1 = worst(0.1), e2 = worst(0.05);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 > 1.6);
  CHECK(e1 / e2 < 2.4);

  // Shape of the voxelised ball against the continuous one.
  const auto g = ball(10, 1.0);
  for (double q : {0.0, 1.0, 2.5})
    CHECK(std::abs(potential_fourier(g, {0, 0, q}) - ball_fourier(1, q)) < 0.1 * ball_fourier(1, 0));
}

TEST_CASE("attached potential in scenes") {
  auto sc = std::make_shared<fields::Scene>();
  sc->kappa = k2;
  sc->obstacle_radius = 1.8;
  sc->sources.push_back(fields::PointSource{{0.1, 0.2, 0.3}, {1, 0}});
  sc->sources.push_back(fields::MultipoleSource{1, 0, {0, 0, 0}, {0.5, 0}});
  sc->sources.push_back(fields::PointSource{{-0.3, 0.0, 0.1}, {0, 2}});
  sc->potential = ball(6, Complex(0.3, 0.05));
  CHECK_THROWS_AS(fields::eval_scene(*sc, {0, 0, 4}), Error);
  const auto solver = attach_potential(*sc);

  const Vec3 x{1.0, -2.0, 3.5};
  const Complex expect = fields::r0_plus(x, {0.1, 0.2, 0.3}, k2) + solver->r_v_sc(x, {0.1, 0.2, 0.3}) +
                         0.5 * fields::multipole_field(1, 0, {0, 0, 0}, k2, x) +
                         Complex(0, 2) * solver->r_v(x, {-0.3, 0.0, 0.1});
  CHECK(rel(fields::eval_scene(*sc, x), expect) < 1e-12);

  const Ray ray{{0, 0, 0}, Direction(Vec3{1, -2, 3.5})};
  const Complex50 v50 = fields::eval_scene_on_ray50(*sc, ray, Real50(x.norm()));
  CHECK(rel(Complex(double(v50.real()), double(v50.imag())), expect) < 1e-12);
}

TEST_CASE("cone membership") {
  const ConeSet plus{{0, 0, -1}, 1}, minus{{0, 0, -1}, -1};
  CHECK(plus.contains({0, 0, -1}));
  CHECK(!plus.contains({0, 0.1, 0.99}));
  CHECK(plus.contains({1, 0, 0}));
  CHECK(minus.contains({1, 0, 0}));
  CHECK(minus.contains({0, 0.6, 0.8}));
}

namespace {

PipelineParams small_params(const planeops::PlaneFrame& fr) {
  auto p = PipelineParams::defaults(fr, k2);
  p.patch_radius = 6;
  return p;
}

}  // namespace

TEST_CASE("pipeline: zero potential gives zero") {
  const auto fr = planeops::PlaneFrame::from_normal({0, 0, 2}, {0, 0, -1});
  SolverPlaneData data(std::make_shared<const LSSolver>(ball(8, 0.0), k2), 1.8);
  const auto r = theorem3_pipeline(data, small_params(fr));
  double vmax = 0;
  for (const auto& v : r.v) vmax = std::max(vmax, std::abs(v));
  CHECK(vmax <= 1e-8);
  for (const auto& a : r.amplitudes) CHECK(std::abs(a.value) <= 1e-8);
}

TEST_CASE("pipeline: weak ball, oblique plane") {
  const auto g = ball(8, 0.05);
  const Vec3 nrm = Vec3{0.3, -0.2, -1}.normalized();
  const auto fr = planeops::PlaneFrame::from_normal(nrm * -2.0, nrm);
  SolverPlaneData data(std::make_shared<const LSSolver>(g, k2), 1.8);
  const auto r = theorem3_pipeline(data, small_params(fr));

  const ConeSet plus{fr.nu, 1}, minus{fr.nu, -1};
  for (const auto& a : r.amplitudes) {
    CHECK(plus.contains(a.theta));
    CHECK(minus.contains(a.theta_prime));
  }
  REQUIRE(r.stages.size() == 4);
  CHECK(r.stages[0].stage == "ray-recovery");
  CHECK(r.stages[2].error_estimate < 1e-2);
  CHECK(!r.born_warning);
  CHECK(bandlimited_error(r, g) < 0.15);
}

TEST_CASE("pipeline parameter checks") {
  const auto fr = planeops::PlaneFrame::from_normal({0, 0, 2}, {0, 0, -1});
  SolverPlaneData data(std::make_shared<const LSSolver>(ball(4, 0.0), k2), 1.8);
  auto p = small_params(fr);
  p.equatorial_directions = 7;
  CHECK_THROWS_AS(theorem3_pipeline(data, p), Error);
  p = small_params(fr);
  p.band = 1.5;
  CHECK_THROWS_AS(theorem3_pipeline(data, p), Error);
  p = small_params(planeops::PlaneFrame::from_normal({0, 0, 1}, {0, 0, -1}));
  CHECK_THROWS_AS(theorem3_pipeline(data, p), Error);
}
