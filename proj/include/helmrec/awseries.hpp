#pragma once

// Atkinson–Wilcox expansions along a single ray:
//
//   ψ(q + sθ) = (e^{iκs}/s) Σ_{j≥1} f_j / s^{j−1}
//
// where f_j are the values of the coefficient functions at the ray's fixed θ
// in the frame centred at q.

#include <map>
#include <memory>
#include <vector>

#include "helmrec/core.hpp"
#include "helmrec/fields.hpp"

namespace helmrec::awseries {

struct AWExpansion {
  WaveNumber kappa;
  Vec3 origin;
  Direction theta;
  std::vector<Complex> coeffs;

  std::size_t depth() const { return coeffs.size(); }
  void validate() const;
};

/// (e^{iκs}/s) Σ_{j=1}^{n} f_j / s^{j−1}.
Complex eval_partial(const AWExpansion& aw, double s, std::size_t n);
inline Complex eval_full(const AWExpansion& aw, double s) { return eval_partial(aw, s, aw.depth()); }

/// Exact l+1 coefficients of h_l⁽¹⁾(κs)·angular_value about the multipole centre.
std::vector<Complex> exact_coeffs_multipole(int l, WaveNumber kappa, Complex angular_value);

struct OracleFit {
  std::vector<Complex> coeffs;
  double relative_residual = 0;
};

/// Brute-force oracle: fits s·e^{−iκs}·ψ(q+sθ) of the point source
/// e^{iκ|x−y0|}/(4π|x−y0|) by a polynomial in 1/s in 100-digit arithmetic on
/// the ladder s_k = s0·ratio^k. Independent of the recovery code path.
OracleFit oracle_coeffs_point_source(const Vec3& y0, const Vec3& q, const Direction& theta, WaveNumber kappa,
                                     int n, double s0 = 0.0, double ratio = 1.3);

/// Re-expands an expansion about q into the frame q' = q + c·θ on the same
/// line (exact, triangular in the coefficient index).
AWExpansion shift_along_ray(const AWExpansion& aw, double c);

// ---------------------------------------------------------------------------

/// Source of Im ψ samples along a ray, delivered in 50 digits.
class RaySampler {
public:
  RaySampler(Ray ray, WaveNumber kappa, double s_min) : ray_(std::move(ray)), kappa_(kappa), s_min_(s_min) {}
  virtual ~RaySampler() = default;

  const Ray& ray() const noexcept { return ray_; }
  WaveNumber kappa() const noexcept { return kappa_; }
  /// Samples are valid for s > s_min.
  double s_min() const noexcept { return s_min_; }

  virtual Real50 im_psi(const Real50& s) const = 0;
  /// Used by the double-precision recovery tier; samplers with a cheaper
  /// double evaluation override it.
  virtual double im_psi_double(const Real50& s) const { return static_cast<double>(im_psi(s)); }

private:
  Ray ray_;
  WaveNumber kappa_;
  double s_min_;
};

/// Wraps a Scene; s_min is the last exit of the ray from the obstacle ball.
class SceneRaySampler final : public RaySampler {
public:
  SceneRaySampler(std::shared_ptr<const fields::Scene> scene, const Ray& ray);
  Real50 im_psi(const Real50& s) const override;

private:
  std::shared_ptr<const fields::Scene> scene_;
};

/// Offline samples (e.g. from a `s, im_psi` CSV). Lookups must hit a stored
/// radius to within a relative 1e-12.
class TableRaySampler final : public RaySampler {
public:
  TableRaySampler(const Ray& ray, WaveNumber kappa, std::map<Real50, Real50> samples, double s_min = 0.0);
  Real50 im_psi(const Real50& s) const override;
  const std::map<Real50, Real50>& samples() const noexcept { return samples_; }

private:
  std::map<Real50, Real50> samples_;
};

/// Smallest s >= 0 beyond which origin + sθ stays outside the ball of radius r
/// about the coordinate origin.
double ray_exit_radius(const Ray& ray, double r);

}  // namespace helmrec::awseries
