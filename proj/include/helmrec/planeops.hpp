#pragma once

// Fields on a plane X: reconstruction of ψ|X from Im ψ|X along in-plane rays,
// and continuation of ψ|X into the half-space V_X by the Rayleigh-type
// integral ψ(x) = ∫_X K(x,y) ψ(y) dy.

#include <cstdint>
#include <memory>
#include <vector>

#include "helmrec/awseries.hpp"
#include "helmrec/core.hpp"
#include "helmrec/fields.hpp"
#include "helmrec/rayrecover.hpp"

namespace helmrec::planeops {

/// V_X = { x : (x − base)·ν < 0 }; the obstacle ball lies on the other side.
struct PlaneFrame {
  Vec3 base;
  Vec3 e1, e2;
  Vec3 nu;

  /// Completes e1, e2 from a normal (deterministic choice of e1).
  static PlaneFrame from_normal(const Vec3& base, const Vec3& normal);

  Vec3 point(double u, double v) const { return base + e1 * u + e2 * v; }
  /// Signed distance along ν; negative inside V_X.
  double height(const Vec3& x) const { return dot(x - base, nu); }
  Vec3 mirror(const Vec3& x) const { return x - nu * (2 * height(x)); }

  /// Orthonormality to 1e-12 and disjointness from the ball of radius r about
  /// the coordinate origin (which must lie outside V̄_X).
  void validate(double obstacle_radius) const;
};

/// Square (2·half_extent)² patch of X sampled on a uniform grid centred at the
/// frame base. Node (i, j) sits at u = −half_extent + i·h, v = −half_extent + j·h.
struct PlaneGrid {
  PlaneFrame frame;
  double half_extent = 0;
  double spacing = 0;
  std::vector<Complex> values;  // index i*n + j, empty until filled

  int nodes_per_side() const;
  std::size_t node_count() const { return std::size_t(nodes_per_side()) * nodes_per_side(); }
  double u(int i) const { return -half_extent + i * spacing; }
  Vec3 node(int i, int j) const { return frame.point(u(i), u(j)); }
  void validate() const;
  /// Nyquist margin h ≤ λ/4 and aperture ≥ 10λ, needed for continuation.
  void validate_for_continuation(WaveNumber kappa) const;
};

/// Im ψ restricted to X, handed out one in-plane ray at a time.
class PlaneSampler {
public:
  virtual ~PlaneSampler() = default;
  virtual WaveNumber kappa() const = 0;
  virtual double obstacle_radius() const = 0;
  virtual std::unique_ptr<awseries::RaySampler> ray_sampler(const Ray& in_plane_ray) const = 0;
};

class ScenePlaneSampler final : public PlaneSampler {
public:
  explicit ScenePlaneSampler(std::shared_ptr<const fields::Scene> scene) : scene_(std::move(scene)) {}
  WaveNumber kappa() const override { return scene_->kappa; }
  double obstacle_radius() const override { return scene_->obstacle_radius; }
  std::unique_ptr<awseries::RaySampler> ray_sampler(const Ray& ray) const override;

private:
  std::shared_ptr<const fields::Scene> scene_;
};

struct PlaneRecovery {
  PlaneGrid grid;
  /// Nonzero where the node is too close to the ray origin p for the series
  /// to converge; the value there is left at zero.
  std::vector<std::uint8_t> flagged;
  Vec3 ray_origin;
  std::size_t rays_recovered = 0;
  double max_cancellation_digits = 0;
};

/// Node x is reconstructed on the in-plane ray from p (projection of the
/// obstacle centre onto X) through x. Nodes with |x − p| < guard·(dist + r)
/// are flagged. Nodes on a common ray share one recovery.
PlaneRecovery recover_plane(const PlaneSampler& sampler, PlaneGrid grid, const rayrecover::RecoverParams& params,
                            double guard = 1.5);

/// Fills grid values by direct evaluation of a scene.
PlaneGrid sample_plane(const fields::Scene& scene, PlaneGrid grid);

/// K(x, y) = 2 ∂G⁺(x − y)/∂ν_y, ν the outward normal of V_X.
Complex continuation_kernel(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame);

/// G⁺_X(x, y) = G⁺(x − y) − G⁺(x − y*), y* the mirror of y across X.
Complex image_green(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame);

/// ∂G⁺_X(x, y)/∂ν_y, with the mirror point moving with y. Equals K on X.
Complex image_kernel(const Vec3& x, const Vec3& y, WaveNumber kappa, const PlaneFrame& frame);

struct Continuation {
  Complex value;
  /// Magnitude of the contribution of the outermost ring of nodes.
  double truncation_estimate = 0;
  bool aperture_warning = false;
};

enum class Kernel { Rayleigh, Image };

/// Trapezoid quadrature of ∫_X K(x,y) ψ(y) dy over the grid. Requires
/// x in V_X at least one wavelength from X. The warning is raised when the
/// truncation estimate exceeds tolerance·|value|.
Continuation halfspace_continue(const PlaneGrid& grid, WaveNumber kappa, const Vec3& x, double tolerance = 1e-2,
                                Kernel kernel = Kernel::Rayleigh);

/// max |Im G⁺(r d, κ)| over the given directions, r = radius_factor·π/κ.
/// radius_factor = n gives the null spheres; n + ½ is the off-resonant control.
double sphere_null_probe(WaveNumber kappa, double radius_factor, const std::vector<Vec3>& directions);

/// Deterministic, roughly uniform directions (Fibonacci sphere).
std::vector<Vec3> fibonacci_directions(int count);

}  // namespace helmrec::planeops
