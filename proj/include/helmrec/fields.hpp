#pragma once

// Ground-truth radiation solutions of -Δψ = κ²ψ: free outgoing Green
// functions, outgoing multipoles and superposition scenes.

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "helmrec/core.hpp"

namespace helmrec::fields {

/// Evaluation closer than this fraction of a wavelength to a source is an error.
inline constexpr double kSingularityGuard = 1e-9;

/// G⁺(x,κ) = −e^{iκ|x|}/(4π|x|).
Complex green_outgoing(const Vec3& x, WaveNumber kappa);

/// ∇_x G⁺(x,κ) in closed form.
std::array<Complex, 3> green_outgoing_gradient(const Vec3& x, WaveNumber kappa);

/// R₀⁺(x,y,κ) = e^{iκ|x−y|}/(4π|x−y|) = −G⁺(x−y,κ).
Complex r0_plus(const Vec3& x, const Vec3& y, WaveNumber kappa);

/// Spherical Hankel function of the first kind from the closed Rayleigh sum.
template <class T> ComplexT<T> spherical_hankel1(int l, const T& z);

/// Orthonormal complex spherical harmonic (Condon–Shortley phase) of the
/// direction of `dir` (need not be normalised, must be nonzero).
template <class T> ComplexT<T> spherical_harmonic(int l, int m, const std::array<T, 3>& dir);
Complex spherical_harmonic(int l, int m, const Vec3& dir);

/// h_l⁽¹⁾(κ|ρ|) Y_l^m(ρ/|ρ|), ρ = x − center.
Complex multipole_field(int l, int m, const Vec3& center, WaveNumber kappa, const Vec3& x);

// ---------------------------------------------------------------------------

struct PointSource {
  Vec3 position;
  Complex amplitude{1.0, 0.0};
};

struct MultipoleSource {
  int l = 0;
  int m = 0;
  Vec3 center;
  Complex amplitude{1.0, 0.0};
};

using Source = std::variant<PointSource, MultipoleSource>;

/// Piecewise-constant potential on an n×n×n voxelisation of an axis-aligned box.
struct PotentialGrid {
  Vec3 corner;
  Vec3 size;
  int n = 0;
  std::vector<Complex> values;  // index (i*n + j)*n + k  for x_i, y_j, z_k

  Vec3 voxel_center(int i, int j, int k) const;
  Vec3 voxel_center(std::size_t flat) const;
  double voxel_volume() const { return size.x * size.y * size.z / (double(n) * n * n); }
  std::size_t voxel_count() const { return std::size_t(n) * n * n; }
  void validate() const;
};

/// Scattered part R⁺_{v,sc}(x, y) of the potential's Green function for a
/// given source point y; implemented by the scattering module.
class ScatteredResponse {
public:
  virtual ~ScatteredResponse() = default;
  virtual Complex scattered(const Vec3& x, std::size_t point_source_index) const = 0;
  virtual Complex50 scattered50(const std::array<Real50, 3>& x, std::size_t point_source_index) const = 0;
};

struct Scene {
  WaveNumber kappa;
  double obstacle_radius = 1.0;
  std::vector<Source> sources;
  std::optional<PotentialGrid> potential;
  /// Set by scattering::attach_potential when `potential` is present.
  std::shared_ptr<const ScatteredResponse> scattering;

  /// Throws Validation when a source or the potential box is not strictly
  /// inside the obstacle ball or a multipole index is invalid.
  void validate() const;
};

/// Superposition of all sources (plus scattered parts for point sources when a
/// potential is attached).
Complex eval_scene(const Scene& scene, const Vec3& x);

/// Same field evaluated in 50-digit arithmetic at x = origin + s·dir.
Complex50 eval_scene_on_ray50(const Scene& scene, const Ray& ray, const Real50& s);

/// I(x) = |x| Im ψ(x).
double im_diagnostic(const Scene& scene, const Vec3& x);

}  // namespace helmrec::fields
