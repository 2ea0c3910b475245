#pragma once

// Recovery of the Atkinson–Wilcox coefficient tower of a radiation solution
// along one ray from samples of Im ψ alone.
//
// Depth n+1 is obtained from the already recovered f_1..f_n:
//
//   I(s)   = s Im ψ(q + sθ)
//   I_n(s) = s Im ψ_n(q + sθ),   ψ_n the n-term partial sum
//   J_n(s) = s^n (I(s) − I_n(s))
//   E(s)   = (−e^{−iκ(s+τ)} J_n(s) + e^{−iκs} J_n(s+τ)) / sin(κτ)
//
// E(s) → f_{n+1} as s → ∞. The O(1/s) remainder of E is removed by a least
// squares fit over the radius ladder in which each remaining 1/s^m term of J_n
// enters through its exact two-point response, so a tower that terminates is
// recovered exactly.

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "helmrec/awseries.hpp"
#include "helmrec/core.hpp"

namespace helmrec::rayrecover {

/// Smallest admissible |sin(κτ)|.
inline constexpr double kSinMargin = 0.1;

struct RecoverParams {
  double tau = 0;                 // two-point separation
  int depth = 1;                  // number of coefficients to recover
  std::vector<double> ladder;     // s_1 < ... < s_K
  int extrapolation_order = 2;    // p
  int precision_digits = 30;

  /// τ = π/(2κ), ladder (20/κ)·2^k for k = 0..4, p = 2, 30 digits.
  static RecoverParams defaults(WaveNumber kappa, int depth = 1);

  /// Throws Validation for |sin κτ| < margin, K < p+2, unsorted ladder,
  /// s_1 <= s_min, bad depth or precision.
  void validate(WaveNumber kappa, double s_min) const;
};

struct DepthReport {
  int index = 0;                   // j of the recovered f_j
  double fit_residual = 0;         // relative residual of the extrapolation fit
  double condition = 0;            // triangular-factor condition estimate
  double cancellation_digits = 0;  // ≈ (j−1)·log10(κ s_K)
  int correction_terms = 0;        // P, number of 1/s^m terms fitted
};

struct RayRecovery {
  awseries::AWExpansion recovered;
  std::vector<DepthReport> report;
  double validated_min = 0;  // smallest ladder radius
  /// Estimate of f_{N+1} (leading fitted correction at the last depth), used
  /// for the truncation error estimate of reconstructions.
  Complex next_coeff_estimate{0.0, 0.0};
  Precision precision = Precision::Digits50;
};

/// f₁ ≈ (−e^{−iκ(s+τ)} J(x) + e^{−iκs} J(y)) / sin(κτ), |x| = s, |y| = s + τ.
Complex two_point_estimate(double J_at_x, double J_at_y, double s, double tau, WaveNumber kappa);

struct Extrapolated {
  Complex value;
  double residual = 0;
};

/// Least squares fit F(s) ≈ f + c₁/s + … + c_p/s^p; returns f.
Extrapolated extrapolate_estimates(std::span<const std::pair<double, Complex>> estimates, int p);

/// Frame for a ray: q = ray origin, θ = ray direction.
std::pair<Vec3, Direction> shift_frame(const Ray& ray);

RayRecovery recover_coeffs(const awseries::RaySampler& sampler, const RecoverParams& params);

/// Recovery from a finite sub-interval of the ray requires analytic
/// continuation and is not supported; always throws Validation.
[[noreturn]] void recover_coeffs_on_interval(const awseries::RaySampler& sampler, const RecoverParams& params,
                                             double s_begin, double s_end);

struct Reconstruction {
  Complex value;
  double error_estimate = 0;   // ≈ |f_{N+1}| / s^{N+1}
  bool out_of_range = false;   // s below the validated radius range
};

Reconstruction reconstruct_on_ray(const RayRecovery& rec, double s);

}  // namespace helmrec::rayrecover
