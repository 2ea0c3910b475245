#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "helmrec/planeops.hpp"

using namespace helmrec;
using namespace helmrec::planeops;

namespace {

std::shared_ptr<fields::Scene> two_sources(double kappa) {
  auto sc = std::make_shared<fields::Scene>();
  sc->kappa = WaveNumber(kappa);
  sc->sources.push_back(fields::PointSource{{0.3, 0.1, -0.2}, {1, 0}});
  sc->sources.push_back(fields::PointSource{{-0.2, -0.4, 0.3}, {0.5, -0.8}});
  return sc;
}

// Plane z = 2 with V_X = {z > 2}; an 11×11 patch centred laterally at (cu, 0).
PlaneGrid lateral_grid(double cu) { return {PlaneFrame::from_normal({cu, 0, 2}, {0, 0, -1}), 2.0, 0.4, {}}; }

double max_rel_error(const PlaneRecovery& r, const fields::Scene& sc) {
  double worst = 0;
  const int n = r.grid.nodes_per_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = std::size_t(i) * n + j;
      if (r.flagged[k]) continue;
      const Complex t = fields::eval_scene(sc, r.grid.node(i, j));
      worst = std::max(worst, std::abs(r.grid.values[k] - t) / std::abs(t));
    }
  return worst;
}

}  // namespace

TEST_CASE("plane frames") {
  for (const Vec3& nrm : {Vec3{0, 0, -1}, Vec3{1, 2, 3}, Vec3{0.0, -1.0, 1e-3}}) {
    const auto f = PlaneFrame::from_normal(nrm * -5.0, nrm);
    CHECK(std::abs(dot(f.e1, f.e2)) < 1e-14);
    CHECK(std::abs(dot(f.e1, f.nu)) < 1e-14);
    CHECK(std::abs(f.e1.norm() - 1) < 1e-14);
    CHECK(std::abs(f.e2.norm() - 1) < 1e-14);
    f.validate(1.0);
    CHECK(distance(f.mirror(f.mirror({0.3, -2, 7})), {0.3, -2, 7}) < 1e-13);
  }
  // Plane cutting the ball, and ball on the wrong side.
  CHECK_THROWS_AS(PlaneFrame::from_normal({0, 0, 0.5}, {0, 0, -1}).validate(1.0), Error);
  CHECK_THROWS_AS(PlaneFrame::from_normal({0, 0, 2}, {0, 0, 1}).validate(1.0), Error);
}

TEST_CASE("grid geometry and validation") {
  PlaneGrid g = lateral_grid(14);
  CHECK(g.nodes_per_side() == 11);
  CHECK(g.node_count() == 121);
  CHECK(distance(g.node(0, 0), Vec3{14, 0, 2} - (g.frame.e1 + g.frame.e2) * 2.0) < 1e-14);
  CHECK(distance(g.node(10, 10), Vec3{14, 0, 2} + (g.frame.e1 + g.frame.e2) * 2.0) < 1e-13);
  CHECK(std::abs(g.frame.height(g.node(3, 7))) < 1e-15);
  g.validate();
  CHECK_THROWS_AS(g.validate_for_continuation(WaveNumber(1.0)), Error);  // aperture below 10λ
  PlaneGrid bad = g;
  bad.spacing = 0.3;
  CHECK_THROWS_AS(bad.validate(), Error);
  PlaneGrid coarse{g.frame, 100.0, 2.0, {}};
  CHECK_THROWS_AS(coarse.validate_for_continuation(WaveNumber(1.0)), Error);  // h > λ/4
}

TEST_CASE("null spheres of the free Green function") {
  const auto dirs = fibonacci_directions(200);
  CHECK(sphere_null_probe(WaveNumber(1.0), 1, dirs) <= 1e-14);
  CHECK(sphere_null_probe(WaveNumber(2.0), 3, dirs) <= 1e-14);
  const double r = 2.5 * M_PI / 1.5;
  CHECK(std::abs(sphere_null_probe(WaveNumber(1.5), 2.5, dirs) - 1 / (4 * M_PI * r)) <= 1e-12 / (4 * M_PI * r));
}

TEST_CASE("image Green function") {
  const auto f = PlaneFrame::from_normal({0, 0, 2}, {0, 0, -1});
  const WaveNumber k(1.3);
  const Vec3 y{0.4, -0.2, 3.1}, x{-1.0, 0.7, 4.5};
  CHECK(image_green(x, {0.4, -0.2, 2.0}, k, f) == Complex(0, 0));
  CHECK(std::abs(image_green({3, 1, 2}, y, k, f)) < 1e-17);
  CHECK(std::abs(image_green(x, y, k, f) - image_green(y, x, k, f)) < 1e-16);
  CHECK_THROWS_AS(image_green(y, y, k, f), Error);
}

TEST_CASE("continuation kernel matches finite differences to second order") {
  const auto f = PlaneFrame::from_normal({0, 0, 2}, {0.1, 0, -1});
  const WaveNumber k(2.0);
  const Vec3 x{0.5, 0.3, 5}, y = f.point(0.7, -1.2);
  const Complex kern = continuation_kernel(x, y, k, f);
  auto fd_err = [&](double h) {
    const Complex d = (fields::green_outgoing(x - (y + f.nu * h), k) - fields::green_outgoing(x - (y - f.nu * h), k)) / (2 * h);
    return std::abs(2.0 * d - kern);
  };
  CHECK(fd_err(1e-2) < 1e-4 * std::abs(kern));
  CHECK(fd_err(2e-2) / fd_err(1e-2) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("Rayleigh and image kernels coincide on the plane") {
  const auto f = PlaneFrame::from_normal({1, -1, 3}, {-0.2, 0.3, -1});
  const WaveNumber k(1.7);
  const Vec3 x = f.point(0.3, 0.4) - f.nu * 4.0;
  for (double u : {-5.0, 0.0, 2.5})
    for (double v : {-3.0, 1.0, 7.0}) {
      const Complex a = continuation_kernel(x, f.point(u, v), k, f);
      const Complex b = image_kernel(x, f.point(u, v), k, f);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("half-space continuation of a point source") {
  // λ = 1, spacing λ/6, source behind the plane z = 2.
  fields::Scene sc;
  sc.kappa = WaveNumber(2 * M_PI);
  sc.sources.push_back(fields::PointSource{{0.2, 0.1, -0.3}});
  const Vec3 probes[] = {{0, 0, 4}, {1, -0.5, 5}, {3, 0, 4}, {-2, 2, 6}};
  std::vector<double> worst;
  for (double aperture : {10.0, 20.0, 40.0}) {
    const PlaneGrid g = sample_plane(sc, {PlaneFrame::from_normal({0, 0, 2}, {0, 0, -1}), aperture, 1.0 / 6, {}});
    double w = 0;
    for (const Vec3& x : probes) {
      const auto c = halfspace_continue(g, sc.kappa, x);
      const Complex t = fields::eval_scene(sc, x);
      w = std::max(w, std::abs(c.value - t) / std::abs(t));
      // Image-kernel quadrature agrees with the Rayleigh one.
      const auto ci = halfspace_continue(g, sc.kappa, x, 1e-2, Kernel::Image);
      CHECK(std::abs(ci.value - c.value) <= 1e-12 * std::abs(c.value));
    }
    worst.push_back(w);
  }
  CHECK(worst[2] <= 1e-2);
  CHECK(worst[1] < worst[0]);
  CHECK(worst[2] < worst[1]);
}

TEST_CASE("plane-to-plane continuation") {
  fields::Scene sc;
  sc.kappa = WaveNumber(2 * M_PI);
  sc.sources.push_back(fields::PointSource{{-0.3, 0.2, 0.1}, {0.0, 2.0}});
  const PlaneGrid g = sample_plane(sc, {PlaneFrame::from_normal({0, 0, 1.5}, {0, 0, -1}), 20.0, 1.0 / 6, {}});
  double worst = 0, worst_estimate = 0;
  for (double u = -2; u <= 2; u += 1)
    for (double v = -2; v <= 2; v += 1) {
      const Vec3 x{u, v, 4};
      const auto c = halfspace_continue(g, sc.kappa, x);
      const Complex t = fields::eval_scene(sc, x);
      worst = std::max(worst, std::abs(c.value - t) / std::abs(t));
      worst_estimate = std::max(worst_estimate, c.truncation_estimate / std::abs(t));
      CHECK(!c.aperture_warning);
    }
  CHECK(worst <= 1e-2);
  CHECK(worst <= 2 * worst_estimate);
}

TEST_CASE("continuation argument checks") {
  fields::Scene sc;
  sc.kappa = WaveNumber(2 * M_PI);
  PlaneGrid g{PlaneFrame::from_normal({0, 0, 2}, {0, 0, -1}), 10.0, 0.25, {}};
  CHECK_THROWS_AS(halfspace_continue(g, sc.kappa, {0, 0, 5}), Error);  // no values
  g.values.assign(g.node_count(), Complex(0, 0));
  CHECK(halfspace_continue(g, sc.kappa, {0, 0, 5}).value == Complex(0, 0));
  CHECK_THROWS_AS(halfspace_continue(g, sc.kappa, {0, 0, 2.5}), Error);  // under one wavelength
  CHECK_THROWS_AS(halfspace_continue(g, sc.kappa, {0, 0, 0}), Error);    // wrong side
}

TEST_CASE("plane recovery from Im psi") {
  auto sc = two_sources(1.0);
  const auto params = rayrecover::RecoverParams::defaults(sc->kappa, 4);
  const auto r = recover_plane(ScenePlaneSampler(sc), lateral_grid(14), params);
  CHECK(std::count(r.flagged.begin(), r.flagged.end(), 1) == 0);
  CHECK(r.rays_recovered <= 121);
  CHECK(max_rel_error(r, *sc) <= 1e-3);

  SUBCASE("single source") {
    auto one = std::make_shared<fields::Scene>();
    one->kappa = WaveNumber(1.0);
    one->sources.push_back(fields::PointSource{{0.1, -0.3, 0.2}});
    CHECK(max_rel_error(recover_plane(ScenePlaneSampler(one), lateral_grid(14), params), *one) <= 1e-3);
  }
  SUBCASE("zero field") {
    auto empty = std::make_shared<fields::Scene>();
    empty->kappa = WaveNumber(1.0);
    const auto z = recover_plane(ScenePlaneSampler(empty), lateral_grid(14), params);
    for (const auto& v : z.grid.values) CHECK(v == Complex(0, 0));
  }
  SUBCASE("real scaling") {
    auto scaled = std::make_shared<fields::Scene>(*sc);
    for (auto& s : scaled->sources) std::get<fields::PointSource>(s).amplitude *= -2.5;
    const auto rs = recover_plane(ScenePlaneSampler(scaled), lateral_grid(14), params);
    for (std::size_t k = 0; k < rs.grid.values.size(); ++k)
      CHECK(std::abs(rs.grid.values[k] + 2.5 * r.grid.values[k]) <= 1e-12 * std::abs(r.grid.values[k]));
  }
}

TEST_CASE("nodes inside the convergence disk are flagged") {
  auto sc = two_sources(1.0);
  const auto r = recover_plane(ScenePlaneSampler(sc), lateral_grid(4), rayrecover::RecoverParams::defaults(sc->kappa, 2));
  const int n = r.grid.nodes_per_side();
  int flagged = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool inside = distance(r.grid.node(i, j), r.ray_origin) < 1.5 * 3.0;
      CHECK(bool(r.flagged[std::size_t(i) * n + j]) == inside);
      flagged += inside;
    }
  CHECK(flagged > 0);
  CHECK(distance(r.ray_origin, {0, 0, 2}) < 1e-14);
}

TEST_CASE("distinct fields on the plane have distinct imaginary parts") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(-0.5, 0.5), amp(-1, 1);
  const PlaneGrid g = lateral_grid(0);
  for (int trial = 0; trial < 20; ++trial) {
    fields::Scene a, b;
    a.kappa = b.kappa = WaveNumber(0.5 + 2 * std::abs(amp(rng)));
    for (int s = 0; s < 2; ++s) {
      a.sources.push_back(fields::PointSource{{pos(rng), pos(rng), pos(rng)}, {amp(rng), amp(rng)}});
      b.sources.push_back(fields::PointSource{{pos(rng), pos(rng), pos(rng)}, {amp(rng), amp(rng)}});
    }
    const auto ga = sample_plane(a, g), gb = sample_plane(b, g);
    double dpsi = 0, dim = 0;
    for (std::size_t k = 0; k < ga.values.size(); ++k) {
      dpsi = std::max(dpsi, std::abs(ga.values[k] - gb.values[k]));
      dim = std::max(dim, std::abs(ga.values[k].imag() - gb.values[k].imag()));
    }
    CAPTURE(trial);
    if (dpsi > 1e-6) CHECK(dim > 1e-12);
  }
}
