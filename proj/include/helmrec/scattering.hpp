#pragma once

// Fixed-energy scattering by a piecewise-constant potential v on a voxel grid:
//
//   R⁺_v(x,y) = −G⁺(x−y) + ∫ G⁺(x−z) v(z) R⁺_v(z,y) dz
//   ψ⁺(x,θ)   = e^{iκθ·x} + ∫ G⁺(x−z) v(z) ψ⁺(z,θ) dz
//
// solved by collocation at voxel centres, far-field quantities, and a
// Born-level reconstruction of v from Im R⁺_{v,sc} on a plane.
//
// Far-field conventions (checked numerically against each other):
//   ψ⁺_sc(x,θ)  ≈ (e^{iκ|x|}/|x|) A(θ, x/|x|)
//   R⁺_{v,sc}(x,y) ≈ (e^{iκ|x|}/(4π|x|)) ψ⁺_sc(y, −x/|x|)
//   Born:  A(θ,θ') ≈ −v̂(κ(θ'−θ))/(4π),  v̂(ξ) = ∫ e^{−iξ·z} v(z) dz

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "helmrec/core.hpp"
#include "helmrec/fields.hpp"
#include "helmrec/planeops.hpp"
#include "helmrec/rayrecover.hpp"

namespace helmrec::scattering {

/// Mean of G⁺ over a ball of volume `vol`, used for the diagonal entries.
Complex self_cell_mean(WaveNumber kappa, double vol);

struct SolverOptions {
  /// Test fixture: scales the strict upper triangle of the collocation matrix
  /// by (1 + asymmetry), breaking the symmetry of the discrete kernel.
  double asymmetry = 0.0;
  /// Upper bound on the number of unknowns (nonzero voxels).
  std::size_t max_unknowns = 8000;
};

/// One right-hand side: u at the active voxels and w = v·vol·u, so that the
/// scattered field is Σ_j G⁺(x − z_j) w_j.
struct Column {
  std::vector<Complex> u;
  std::vector<Complex> weights;
};

/// Factorises I − G·diag(v·vol) once and serves many right-hand sides.
/// Immutable after construction.
class LSSolver {
public:
  LSSolver(const fields::PotentialGrid& potential, WaveNumber kappa, SolverOptions options = {});
  ~LSSolver();
  LSSolver(const LSSolver&) = delete;
  LSSolver& operator=(const LSSolver&) = delete;

  WaveNumber kappa() const noexcept { return kappa_; }
  std::size_t unknowns() const noexcept { return centers_.size(); }
  const std::vector<Vec3>& centers() const noexcept { return centers_; }
  /// v·vol at the active voxels.
  const std::vector<Complex>& strengths() const noexcept { return strengths_; }
  /// Reciprocal condition estimate of the factorised matrix.
  double rcond() const noexcept { return rcond_; }
  /// Power-iteration estimate of ‖G·diag(v·vol)‖₂; Born is trusted below 0.1.
  double born_norm() const;

  /// Point source at y (y need not be exterior; it must avoid voxel centres).
  Column green_column(const Vec3& y) const;
  /// Incident plane wave e^{iκθ·x}.
  Column plane_wave_column(const Direction& theta) const;
  /// First Born term for a point source: u = R₀⁺(·, y), w = v·vol·u.
  Column born_green_column(const Vec3& y) const;

  /// Σ_j G⁺(x − z_j) w_j.
  Complex scattered(const Column& c, const Vec3& x) const;
  Complex50 scattered50(const Column& c, const std::array<Real50, 3>& x) const;
  /// Exact far-field coefficient of scattered(c, ·) in direction d:
  /// −(1/4π) Σ_j e^{−iκd·z_j} w_j.
  Complex farfield(const Column& c, const Direction& d) const;

  /// R⁺_v(x, y) and R⁺_{v,sc}(x, y) for exterior x.
  Complex r_v(const Vec3& x, const Vec3& y) const;
  Complex r_v_sc(const Vec3& x, const Vec3& y) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  WaveNumber kappa_;
  std::vector<Vec3> centers_;
  std::vector<Complex> strengths_;
  double rcond_ = 0;
};

/// Builds a solver for scene.potential and attaches the scattered response of
/// every point source, so eval_scene includes R⁺_{v,sc}.
std::shared_ptr<const LSSolver> attach_potential(fields::Scene& scene, SolverOptions options = {});

using Evaluator = std::function<Complex(const Vec3&)>;

/// ψ⁺_sc(y, −d) from 4π|x| e^{−iκ|x|} R⁺_{v,sc}(|x|d, y) on the ladder,
/// extrapolated in 1/|x| with order p.
Complex farfield_from_green(const Evaluator& r_sc_of_x, const Direction& d, WaveNumber kappa,
                            const std::vector<double>& radii, int order = 2);

/// A(θ, θ') from |x| e^{−iκ|x|} ψ⁺_sc(|x|θ') on the ladder, extrapolated in 1/|x|.
Complex scattering_amplitude(const Evaluator& psi_sc, const Direction& theta_prime, WaveNumber kappa,
                             const std::vector<double>& radii, int order = 2);

/// Θ^± = { θ : ±θ·ν ≥ 0 }.
struct ConeSet {
  Vec3 nu;
  int sign = 1;
  bool contains(const Vec3& theta) const { return sign * dot(theta, nu) >= 0; }
};

/// Fourier transform of a piecewise-constant grid potential, exact per voxel.
Complex potential_fourier(const fields::PotentialGrid& grid, const Vec3& xi);

/// (4π/3) a³ · 3(sin q − q cos q)/q³ with q = |ξ| a: transform of a ball indicator.
double ball_fourier(double radius, double xi_norm);

struct PointPair {
  Vec3 x, y;
};

/// max |R(x,y) − R(y,x)| / max(|R(x,y)|, floor) over the pairs.
double reciprocity_report(const std::function<Complex(const Vec3&, const Vec3&)>& r, const std::vector<PointPair>& pairs,
                          double floor = 1e-300);

// ---------------------------------------------------------------------------
// Born-level reconstruction of v from Im R⁺_{v,sc} on a plane.

/// Im R⁺_{v,sc}(·, x') on X, one column at a time.
class GreenPlaneData {
public:
  virtual ~GreenPlaneData() = default;
  virtual WaveNumber kappa() const = 0;
  virtual double obstacle_radius() const = 0;
  virtual std::unique_ptr<planeops::PlaneSampler> column(const Vec3& x_prime) const = 0;
};

/// Data synthesised from an LSSolver.
class SolverPlaneData final : public GreenPlaneData {
public:
  SolverPlaneData(std::shared_ptr<const LSSolver> solver, double obstacle_radius)
      : solver_(std::move(solver)), obstacle_radius_(obstacle_radius) {}
  WaveNumber kappa() const override { return solver_->kappa(); }
  double obstacle_radius() const override { return obstacle_radius_; }
  std::unique_ptr<planeops::PlaneSampler> column(const Vec3& x_prime) const override;

private:
  std::shared_ptr<const LSSolver> solver_;
  double obstacle_radius_;
};

struct PipelineParams {
  planeops::PlaneFrame frame;
  double patch_radius = 10;       // x' nodes within this distance of p
  double patch_spacing = 0;       // 0: λ/4
  int equatorial_directions = 24; // in-plane incidence directions (even)
  int hemisphere_directions = 120;
  int multipole_degree = 8;
  double multipole_rcond = 1e-10;
  rayrecover::RecoverParams ray;  // depth is forced to 1
  double band = 0.9;              // Fourier ball radius as a fraction of 2κ
  double inversion_spacing = 0.3;
  double tikhonov = 1e-2;         // relative to the largest singular value
  bool real_potential = true;

  static PipelineParams defaults(const planeops::PlaneFrame& frame, WaveNumber kappa);
  void validate(WaveNumber kappa, double obstacle_radius) const;
};

struct StageReport {
  std::string stage;
  double error_estimate = 0;
  std::string detail;
};

struct AmplitudeSample {
  Vec3 theta, theta_prime;
  Complex value;
};

struct PipelineResult {
  std::vector<AmplitudeSample> amplitudes;  // θ ∈ Θ^+, θ' ∈ Θ^−
  std::vector<Vec3> voxel_centers;          // inversion grid, inside the obstacle ball
  double voxel_spacing = 0;
  std::vector<Complex> v;                   // estimate at voxel_centers
  double band_radius = 0;                   // |ξ| cutoff
  std::vector<StageReport> stages;
  double born_norm = -1;                    // set when the data come from a solver
  bool born_warning = false;

  /// Transform of the estimate (piecewise constant on the inversion voxels).
  Complex fourier(const Vec3& xi) const;
};

PipelineResult theorem3_pipeline(const GreenPlaneData& data, const PipelineParams& params);

/// Relative L² distance between the band-limited estimate and the band-limited
/// transform of the true grid potential, by quadrature on a polar ξ grid.
double bandlimited_error(const PipelineResult& result, const fields::PotentialGrid& truth, int radial = 24,
                         int angular = 200);

}  // namespace helmrec::scattering
