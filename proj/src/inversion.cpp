// Born-level reconstruction of v from Im R⁺_{v,sc} on a plane X.
//
// (a) For a source point x' on X, the scattered Green function R⁺_{v,sc}(·, x')
//     is recovered along in-plane rays from p (projection of the origin onto X).
//     Its leading coefficient in direction −θ is ψ⁺_sc(x', θ)/(4π); in-plane θ
//     lie in both cones.
// (b) For each such θ, ψ⁺_sc(·, θ) sampled on a disk of X is fitted by outgoing
//     multipoles about the origin, whose far-field pattern gives A(θ, θ') for θ'
//     pointing into V_X.
// (c) Reciprocity A(θ, θ') = A(−θ', −θ) is checked on in-plane pairs.
// (d) v on voxels inside the obstacle ball is fitted to −4πA(θ, θ') ≈ v̂(κ(θ'−θ))
//     by Tikhonov-regularised least squares.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "helmrec/scattering.hpp"

namespace helmrec::scattering {

namespace {

constexpr double kFourPi = 4 * M_PI;

Complex expi(double ph) { return {std::cos(ph), std::sin(ph)}; }

double sinc(double t) { return std::abs(t) < 1e-4 ? 1 - t * t / 6 : std::sin(t) / t; }

double voxel_shape(const Vec3& xi, double h) { return h * h * h * sinc(xi.x * h / 2) * sinc(xi.y * h / 2) * sinc(xi.z * h / 2); }

class ColumnRaySampler final : public awseries::RaySampler {
public:
  ColumnRaySampler(std::shared_ptr<const LSSolver> solver, std::shared_ptr<const Column> column, const Ray& ray,
                   double obstacle_radius)
      : RaySampler(ray, solver->kappa(), awseries::ray_exit_radius(ray, obstacle_radius)),
        solver_(std::move(solver)), column_(std::move(column)) {}

  Real50 im_psi(const Real50& s) const override {
    const Vec3& o = ray().origin;
    const Vec3& d = ray().direction.vec();
    const Real50 dn = sqrt(Real50(d.x) * d.x + Real50(d.y) * d.y + Real50(d.z) * d.z);
    const std::array<Real50, 3> x{Real50(o.x) + s * d.x / dn, Real50(o.y) + s * d.y / dn, Real50(o.z) + s * d.z / dn};
    return solver_->scattered50(*column_, x).imag();
  }
  double im_psi_double(const Real50& s) const override {
    return solver_->scattered(*column_, ray().at(static_cast<double>(s))).imag();
  }

private:
  std::shared_ptr<const LSSolver> solver_;
  std::shared_ptr<const Column> column_;
};

class ColumnPlaneSampler final : public planeops::PlaneSampler {
public:
  ColumnPlaneSampler(std::shared_ptr<const LSSolver> solver, std::shared_ptr<const Column> column, double radius)
      : solver_(std::move(solver)), column_(std::move(column)), radius_(radius) {}
  WaveNumber kappa() const override { return solver_->kappa(); }
  double obstacle_radius() const override { return radius_; }
  std::unique_ptr<awseries::RaySampler> ray_sampler(const Ray& ray) const override {
    return std::make_unique<ColumnRaySampler>(solver_, column_, ray, radius_);
  }

private:
  std::shared_ptr<const LSSolver> solver_;
  std::shared_ptr<const Column> column_;
  double radius_;
};

/// In-plane direction at angle φ with the sign of its ν-component forced, so
/// cone membership holds exactly despite rounding.
Vec3 in_plane(const planeops::PlaneFrame& fr, double phi, int sign) {
  Vec3 t = fr.e1 * std::cos(phi) + fr.e2 * std::sin(phi);
  const double c = dot(t, fr.nu);
  if (sign * c < 0) t = t - fr.nu * (2 * c);
  return t;
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
template <class M> double top_eigenvalue(const M& a) {
  using V = Eigen::Matrix<typename M::Scalar, Eigen::Dynamic, 1>;
  V x = V::Ones(a.rows()) / std::sqrt(double(a.rows()));
  double lambda = 0;
  for (int it = 0; it < 60; ++it) {
    V y = a * x;
    lambda = y.norm();
    if (lambda == 0) break;
    x = y / lambda;
  }
  return lambda;
}

}  // namespace

std::unique_ptr<planeops::PlaneSampler> SolverPlaneData::column(const Vec3& x_prime) const {
  auto col = std::make_shared<const Column>(solver_->green_column(x_prime));
  return std::make_unique<ColumnPlaneSampler>(solver_, std::move(col), obstacle_radius_);
}

PipelineParams PipelineParams::defaults(const planeops::PlaneFrame& frame, WaveNumber kappa) {
  PipelineParams p;
  p.frame = frame;
  p.patch_spacing = kappa.wavelength() / 4;
  p.ray = rayrecover::RecoverParams::defaults(kappa, 1);
  p.ray.precision_digits = 15;
  p.ray.extrapolation_order = 3;
  return p;
}

void PipelineParams::validate(WaveNumber kappa, double obstacle_radius) const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, "scattering", "pipeline", msg); };
  frame.validate(obstacle_radius);
  if (!(patch_radius > 0) || !(patch_spacing > 0) || patch_spacing > patch_radius)
    fail("patch radius and spacing must be positive with spacing <= radius");
  if (std::pow(2 * patch_radius / patch_spacing + 1, 2) > 2e4) fail("patch has too many columns");
  if (equatorial_directions < 4 || equatorial_directions % 2) fail("equatorial_directions must be even and >= 4");
  if (hemisphere_directions < 4) fail("hemisphere_directions must be >= 4");
  if (multipole_degree < 0 || multipole_degree > 30) fail("multipole_degree must be in [0, 30]");
  if (!(multipole_rcond > 0 && multipole_rcond < 1)) fail("multipole_rcond must be in (0, 1)");
  if (!(band > 0 && band <= 1)) fail("band must be in (0, 1]");
  if (!(inversion_spacing > 0) || 2 * obstacle_radius / inversion_spacing > 40)
    fail("inversion_spacing must be positive and give at most 40 voxels across the obstacle");
  if (!(tikhonov >= 0)) fail("tikhonov must be >= 0");
  rayrecover::RecoverParams r = ray;
  r.depth = 1;
  r.validate(kappa, 0.0);
}

Complex PipelineResult::fourier(const Vec3& xi) const {
  Complex sum{0, 0};
  for (std::size_t j = 0; j < v.size(); ++j) sum += v[j] * expi(-dot(xi, voxel_centers[j]));
  return sum * voxel_shape(xi, voxel_spacing);
}

PipelineResult theorem3_pipeline(const GreenPlaneData& data, const PipelineParams& params) {
  const WaveNumber kappa = data.kappa();
  const double k = kappa.value();
  const double radius = data.obstacle_radius();
  params.validate(kappa, radius);
  const planeops::PlaneFrame& fr = params.frame;
  const Vec3 p = fr.nu * dot(fr.base, fr.nu);
  const int M = params.equatorial_directions;
  const ConeSet plus{fr.nu, 1}, minus{fr.nu, -1};

  PipelineResult out;

  // Directions: incidences in-plane (Θ^+), outgoing into V_X (Θ^−).
  std::vector<Vec3> incid(M), outgoing;
  for (int j = 0; j < M; ++j) {
    incid[j] = in_plane(fr, 2 * M_PI * j / M, 1);
    outgoing.push_back(in_plane(fr, 2 * M_PI * j / M, -1));
  }
  for (const auto& d : planeops::fibonacci_directions(2 * params.hemisphere_directions))
    if (dot(d, fr.nu) < 0) outgoing.push_back(d);

  // (a) columns
  std::vector<Vec3> nodes;
  const int half = int(std::floor(params.patch_radius / params.patch_spacing));
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      const double u = i * params.patch_spacing, v = j * params.patch_spacing;
      if (u * u + v * v <= params.patch_radius * params.patch_radius * (1 + 1e-12))
        nodes.push_back(p + fr.e1 * u + fr.e2 * v);
    }
  rayrecover::RecoverParams rp = params.ray;
  rp.depth = 1;
  const auto nn = Eigen::Index(nodes.size());
  Eigen::MatrixXcd U(nn, M);
  double fit_residual = 0;
  for (Eigen::Index a = 0; a < nn; ++a) {
    const auto column = data.column(nodes[a]);
    for (int j = 0; j < M; ++j) {
      try {
        const auto sampler = column->ray_sampler(Ray{p, Direction(-incid[j])});
        const auto rec = rayrecover::recover_coeffs(*sampler, rp);
        U(a, j) = kFourPi * rec.recovered.coeffs.at(0);
        fit_residual = std::max(fit_residual, rec.report.at(0).fit_residual);
      } catch (const Error& e) {
        throw Error(e.kind(), "scattering", "pipeline/ray-recovery", e.what());
      }
    }
  }
  out.stages.push_back({"ray-recovery", fit_residual,
                        std::to_string(nn) + " columns x " + std::to_string(M) + " in-plane rays, depth 1"});

  // (b) outgoing multipole fit about the origin
  const int L = params.multipole_degree;
  const Eigen::Index nb = Eigen::Index(L + 1) * (L + 1);
  Eigen::MatrixXcd B(nn, nb);
  for (Eigen::Index a = 0; a < nn; ++a) {
    const double r = nodes[a].norm();
    Eigen::Index c = 0;
    for (int l = 0; l <= L; ++l) {
      const Complex h = fields::spherical_hankel1<double>(l, k * r);
      for (int m = -l; m <= l; ++m) B(a, c++) = h * fields::spherical_harmonic(l, m, nodes[a]);
    }
  }
  Eigen::VectorXd scale = B.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < nb; ++c) B.col(c) /= scale[c];
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  int kept = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > params.multipole_rcond * sv[0]) {
      inv[i] = 1 / sv[i];
      ++kept;
    }
  Eigen::MatrixXcd C = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().adjoint() * U);
  for (Eigen::Index c = 0; c < nb; ++c) C.row(c) /= scale[c];
  const double unorm = U.norm();
  for (Eigen::Index c = 0; c < nb; ++c) B.col(c) *= scale[c];
  const double fit_rel = unorm > 0 ? (B * C - U).norm() / unorm : 0.0;
  out.stages.push_back({"far-field", fit_rel,
                        "degree " + std::to_string(L) + ", " + std::to_string(kept) + "/" + std::to_string(nb) +
                            " singular values kept"});

  const auto no = Eigen::Index(outgoing.size());
  Eigen::MatrixXcd Y(no, nb);
  for (Eigen::Index o = 0; o < no; ++o) {
    Eigen::Index c = 0;
    Complex lead(0, -1);  // (−i)^{l+1}
    for (int l = 0; l <= L; ++l, lead *= Complex(0, -1))
      for (int m = -l; m <= l; ++m) Y(o, c++) = lead / k * fields::spherical_harmonic(l, m, outgoing[o]);
  }
  const Eigen::MatrixXcd A = Y * C;  // A(θ_j, θ'_o) at (o, j)
  for (int j = 0; j < M; ++j)
    for (Eigen::Index o = 0; o < no; ++o) {
      if (!plus.contains(incid[j]) || !minus.contains(outgoing[o]))
        throw Error(ErrorKind::Numerical, "scattering", "pipeline", "direction outside its cone");
      out.amplitudes.push_back({incid[j], outgoing[o], A(o, j)});
    }

  // (c) reciprocity on in-plane pairs: −θ'_o = θ_{o+M/2}, −θ_j = θ'_{j+M/2}
  double amax = 0, asym = 0;
  for (int j = 0; j < M; ++j)
    for (int o = 0; o < M; ++o) {
      amax = std::max(amax, std::abs(A(o, j)));
      asym = std::max(asym, std::abs(A(o, j) - A((j + M / 2) % M, (o + M / 2) % M)));
    }
  out.stages.push_back({"symmetry", amax > 0 ? asym / amax : 0.0, "in-plane pairs (theta, theta')"});

  // (d) Born least squares on voxels inside the obstacle ball
  const double h = params.inversion_spacing;
  const int m = int(std::ceil(2 * radius / h)) + 1;
  out.voxel_spacing = h;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) {
        const Vec3 z{(i - (m - 1) / 2.0) * h, (j - (m - 1) / 2.0) * h, (l - (m - 1) / 2.0) * h};
        if (z.norm() < radius) out.voxel_centers.push_back(z);
      }
  out.band_radius = params.band * 2 * k;
  std::vector<Vec3> xis;
  std::vector<Complex> rhs;
  for (int j = 0; j < M; ++j)
    for (Eigen::Index o = 0; o < no; ++o) {
      const Vec3 xi = (outgoing[o] - incid[j]) * k;
      if (xi.norm() > out.band_radius) continue;
      xis.push_back(xi);
      rhs.push_back(-kFourPi * A(o, j));
    }
  const auto ns = Eigen::Index(xis.size()), nv = Eigen::Index(out.voxel_centers.size());
  Eigen::MatrixXcd F(ns, nv);
  Eigen::VectorXcd b(ns);
  for (Eigen::Index s = 0; s < ns; ++s) {
    const double shape = voxel_shape(xis[s], h);
    for (Eigen::Index v = 0; v < nv; ++v) F(s, v) = shape * expi(-dot(xis[s], out.voxel_centers[v]));
    b[s] = rhs[s];
  }
  Eigen::VectorXcd vest;
  if (params.real_potential) {
    Eigen::MatrixXd N = (F.adjoint() * F).real();
    const double alpha = params.tikhonov * params.tikhonov * top_eigenvalue(N);
    N.diagonal().array() += alpha;
    vest = N.ldlt().solve((F.adjoint() * b).real()).cast<Complex>();
  } else {
    Eigen::MatrixXcd N = F.adjoint() * F;
    const double alpha = params.tikhonov * params.tikhonov * top_eigenvalue(N);
    N.diagonal().array() += alpha;
    vest = N.ldlt().solve(F.adjoint() * b);
  }
  out.v.assign(vest.data(), vest.data() + vest.size());
  const double bnorm = b.norm();
  out.stages.push_back({"born-inversion", bnorm > 0 ? (F * vest - b).norm() / bnorm : 0.0,
                        std::to_string(ns) + " Fourier samples, " + std::to_string(nv) + " voxels"});

  // Born validity of the estimate: ‖G·diag(v·vol)‖₂ on the inversion voxels.
  const double vol = h * h * h;
  const Complex self = self_cell_mean(kappa, vol);
  Eigen::MatrixXcd G(nv, nv);
  for (Eigen::Index i = 0; i < nv; ++i)
    for (Eigen::Index j = 0; j < nv; ++j)
      G(i, j) = (i == j ? self : fields::green_outgoing(out.voxel_centers[i] - out.voxel_centers[j], kappa)) *
                out.v[j] * vol;
  out.born_norm = std::sqrt(top_eigenvalue(Eigen::MatrixXcd(G.adjoint() * G)));
  out.born_warning = out.born_norm > 0.1;
  return out;
}

double bandlimited_error(const PipelineResult& result, const fields::PotentialGrid& truth, int radial, int angular) {
  const auto dirs = planeops::fibonacci_directions(angular);
  const double q = result.band_radius;
  double err = 0, ref = 0;
  for (int r = 0; r < radial; ++r) {
    const double rho = (r + 0.5) * q / radial;
    for (const auto& d : dirs) {
      const Vec3 xi = d * rho;
      const Complex t = potential_fourier(truth, xi);
      err += rho * rho * std::norm(result.fourier(xi) - t);
      ref += rho * rho * std::norm(t);
    }
  }
  return ref > 0 ? std::sqrt(err / ref) : std::sqrt(err);
}

}  // namespace helmrec::scattering
