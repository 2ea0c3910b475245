#include "helmrec/planeops.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace helmrec::planeops {

namespace {

Complex dot_nu(const std::array<Complex, 3>& g, const Vec3& nu) { return g[0] * nu.x + g[1] * nu.y + g[2] * nu.z; }

}  // namespace

PlaneFrame PlaneFrame::from_normal(const Vec3& base, const Vec3& normal) {
  const Vec3 nu = Direction(normal).vec();
  // Helper axis: the coordinate axis least aligned with ν.
  Vec3 helper{1, 0, 0};
  if (std::abs(nu.y) <= std::abs(nu.x) && std::abs(nu.y) <= std::abs(nu.z)) helper = {0, 1, 0};
  else if (std::abs(nu.z) <= std::abs(nu.x)) helper = {0, 0, 1};
  const Vec3 e1 = cross(helper, nu).normalized();
  return {base, e1, cross(nu, e1), nu};
}

void PlaneFrame::validate(double obstacle_radius) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, "planeops", "frame", msg); };
  for (const Vec3* v : {&e1, &e2, &nu})
    if (std::abs(v->norm() - 1) > 1e-12) fail("frame axes must be unit vectors");
  if (std::abs(dot(e1, e2)) > 1e-12 || std::abs(dot(e1, nu)) > 1e-12 || std::abs(dot(e2, nu)) > 1e-12)
    fail("frame axes must be orthogonal");
  if (!(height({0, 0, 0}) > obstacle_radius))
    fail("obstacle ball must lie strictly on the far side of the plane (outside the closed half-space V_X)");
}

int PlaneGrid::nodes_per_side() const { return int(std::llround(2 * half_extent / spacing)) + 1; }

void PlaneGrid::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, "planeops", "grid", msg); };
  if (!(spacing > 0) || !(half_extent > 0) || !std::isfinite(spacing) || !std::isfinite(half_extent))
    fail("spacing and half-extent must be positive");
  if (std::abs(2 * half_extent / spacing - (nodes_per_side() - 1)) > 1e-9)
    fail("2*half_extent must be a whole number of spacings");
  if (nodes_per_side() > 20001) fail("grid too large");
  if (!values.empty() && values.size() != node_count()) fail("value count does not match the grid");
}

void PlaneGrid::validate_for_continuation(WaveNumber kappa) const {
  validate();
  const double lambda = kappa.wavelength();
  if (spacing > lambda / 4 * (1 + 1e-12))
    throw Error(ErrorKind::Validation, "planeops", "grid",
                "spacing " + fmt_sci(spacing) + " exceeds the Nyquist margin lambda/4 = " + fmt_sci(lambda / 4));
  if (half_extent < 10 * lambda * (1 - 1e-12))
    throw Error(ErrorKind::Validation, "planeops", "grid",
                "aperture " + fmt_sci(half_extent) + " is below 10 wavelengths");
}

std::unique_ptr<awseries::RaySampler> ScenePlaneSampler::ray_sampler(const Ray& ray) const {
  return std::make_unique<awseries::SceneRaySampler>(scene_, ray);
}

PlaneRecovery recover_plane(const PlaneSampler& sampler, PlaneGrid grid, const rayrecover::RecoverParams& params,
                            double guard) {
  grid.frame.validate(sampler.obstacle_radius());
  grid.validate();
  if (!(guard >= 1)) throw Error(ErrorKind::Validation, "planeops", "recover_plane", "guard must be >= 1");

  const PlaneFrame& fr = grid.frame;
  const double dist = fr.height({0, 0, 0});
  const Vec3 p = fr.nu * dot(fr.base, fr.nu);
  const double limit = guard * (dist + sampler.obstacle_radius());

  PlaneRecovery out;
  out.ray_origin = p;
  const int n = grid.nodes_per_side();
  grid.values.assign(grid.node_count(), Complex(0, 0));
  out.flagged.assign(grid.node_count(), 0);

  // One recovery per ray direction, shared by all nodes on it.
  std::map<std::array<long long, 3>, std::shared_ptr<const rayrecover::RayRecovery>> cache;
  std::mutex cache_mutex;
  auto recovery_for = [&](const Vec3& dir) {
    const std::array<long long, 3> key{std::llround(dir.x * 1e10), std::llround(dir.y * 1e10),
                                       std::llround(dir.z * 1e10)};
    {
      std::lock_guard<std::mutex> lock(cache_mutex);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const auto ray_sampler = sampler.ray_sampler(Ray{p, Direction(dir)});
    auto rec = std::make_shared<const rayrecover::RayRecovery>(rayrecover::recover_coeffs(*ray_sampler, params));
    std::lock_guard<std::mutex> lock(cache_mutex);
    return cache.emplace(key, std::move(rec)).first->second;
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t idx = std::size_t(i) * n + j;
      const Vec3 d = grid.node(i, j) - p;
      const double rho = d.norm();
      if (rho < limit) {
        out.flagged[idx] = 1;
        continue;
      }
      try {
        const auto rec = recovery_for(d / rho);
        grid.values[idx] = rayrecover::reconstruct_on_ray(*rec, rho).value;
        for (const auto& r : rec->report) out.max_cancellation_digits = std::max(out.max_cancellation_digits, r.cancellation_digits);
      } catch (const Error& e) {
        throw Error(e.kind(), "planeops", "node (" + std::to_string(i) + "," + std::to_string(j) + ")", e.what());
      }
    }
  out.rays_recovered = cache.size();
  out.grid = std::move(grid);
  return out;
}

PlaneGrid sample_plane(const fields::Scene& scene, PlaneGrid grid) {
  grid.frame.validate(scene.obstacle_radius);
  grid.validate();
  const int n = grid.nodes_per_side();
  grid.values.resize(grid.node_count());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.values[std::size_t(i) * n + j] = fields::eval_scene(scene, grid.node(i, j));
  return grid;
}

Complex continuation_kernel(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame) {
  // ∂/∂ν_y of G⁺(x − y) is −∇G⁺(x − y)·ν.
  return -2.0 * dot_nu(fields::green_outgoing_gradient(x - y, kappa), frame.nu);
}

Complex image_green(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame) {
  const Vec3 ys = frame.mirror(y);
  if (distance(x, y) == 0 || distance(x, ys) == 0)
    throw Error(ErrorKind::Domain, "planeops", "image_green", "x coincides with y or its mirror image");
  if (distance(y, ys) == 0) return {0.0, 0.0};
  return fields::green_outgoing(x - y, kappa) - fields::green_outgoing(x - ys, kappa);
}

Complex image_kernel(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame) {
  // ∂/∂ν_y moves y along ν and its mirror along −ν.
  const Vec3 ys = frame.mirror(y);
  return -dot_nu(fields::green_outgoing_gradient(x - y, kappa), frame.nu) -
         dot_nu(fields::green_outgoing_gradient(x - ys, kappa), frame.nu);
}

Continuation halfspace_continue(const PlaneGrid& grid, WaveNumber kappa, const Vec3& x, double tolerance,
                                Kernel kernel) {
  grid.validate_for_continuation(kappa);
  if (grid.values.size() != grid.node_count())
    throw Error(ErrorKind::Validation, "planeops", "halfspace_continue", "grid has no values");
  if (!(grid.frame.height(x) <= -kappa.wavelength()))
    throw Error(ErrorKind::Validation, "planeops", "halfspace_continue",
                "evaluation point must lie in V_X at least one wavelength from the plane");

  const int n = grid.nodes_per_side();
  const double h2 = grid.spacing * grid.spacing;
  Complex sum{0, 0}, ring{0, 0};
  for (int i = 0; i < n; ++i) {
    const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (int j = 0; j < n; ++j) {
      const Complex psi = grid.values[std::size_t(i) * n + j];
      if (psi == Complex(0, 0)) continue;
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      const Vec3 y = grid.node(i, j);
      const Complex k = kernel == Kernel::Rayleigh ? continuation_kernel(x, y, kappa, grid.frame)
                                                   : image_kernel(x, y, kappa, grid.frame);
      const Complex term = wi * wj * h2 * k * psi;
      sum += term;
      if (wi * wj < 1) ring += term;
    }
  }
  Continuation c;
  c.value = sum;
  c.truncation_estimate = std::abs(ring);
  c.aperture_warning = c.truncation_estimate > tolerance * std::abs(sum);
  return c;
}

double sphere_null_probe(WaveNumber kappa, double radius_factor, const std::vector<Vec3>& directions) {
  const double r = radius_factor * M_PI / kappa.value();
  double worst = 0;
  for (const auto& d : directions)
    worst = std::max(worst, std::abs(fields::green_outgoing(d.normalized() * r, kappa).imag()));
  return worst;
}

std::vector<Vec3> fibonacci_directions(int count) {
  std::vector<Vec3> out;
  out.reserve(count);
  const double golden = M_PI * (3 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1 - (i + 0.5) * 2.0 / count;
    const double rho = std::sqrt(1 - z * z);
    out.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
  }
  return out;
}

}  // namespace helmrec::planeops
