#include "helmrec/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "helmrec/awseries.hpp"

namespace helmrec::scattering {

namespace {

constexpr double kFourPi = 4 * M_PI;

Complex expi(double ph) { return {std::cos(ph), std::sin(ph)}; }

double sinc(double t) { return std::abs(t) < 1e-4 ? 1 - t * t / 6 : std::sin(t) / t; }

Error solver_error(ErrorKind kind, const std::string& stage, const std::string& msg) {
  return Error(kind, "scattering", stage, msg);
}

}  // namespace

Complex self_cell_mean(WaveNumber kappa, double vol) {
  const double k = kappa.value();
  const double a = std::cbrt(3 * vol / kFourPi);
  const Complex i(0, 1);
  // ∫_{|z|<a} G⁺(z) dz = −∫_0^a r e^{iκr} dr
  const Complex integral = -(expi(k * a) * (a / (i * k) + 1 / (k * k)) - 1 / (k * k));
  return integral / vol;
}

struct LSSolver::Impl {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  double born_norm = 0;
};

LSSolver::LSSolver(const fields::PotentialGrid& potential, WaveNumber kappa, SolverOptions options)
    : impl_(std::make_unique<Impl>()), kappa_(kappa) {
  potential.validate();
  const double vol = potential.voxel_volume();
  for (std::size_t f = 0; f < potential.voxel_count(); ++f)
    if (potential.values[f] != Complex(0, 0)) {
      centers_.push_back(potential.voxel_center(f));
      strengths_.push_back(potential.values[f] * vol);
    }
  const auto n = Eigen::Index(centers_.size());
  if (std::size_t(n) > options.max_unknowns)
    throw solver_error(ErrorKind::Validation, "ls_solve",
                       std::to_string(n) + " nonzero voxels exceed the dense-solver limit of " +
                           std::to_string(options.max_unknowns));
  if (n == 0) {
    rcond_ = 1;
    return;
  }

  // A = G·diag(v·vol); the system matrix is I − A.
  const Complex self = self_cell_mean(kappa, vol);
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Complex g = i == j ? self : fields::green_outgoing(centers_[i] - centers_[j], kappa);
      if (j > i) g *= 1 + options.asymmetry;
      a(i, j) = g * strengths_[j];
    }

  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n) / std::sqrt(double(n));
  double lambda = 0;
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXcd y = a.adjoint() * (a * x);
    lambda = y.norm();
    if (lambda == 0) break;
    x = y / lambda;
  }
  impl_->born_norm = std::sqrt(lambda);

  impl_->lu.compute(Eigen::MatrixXcd::Identity(n, n) - a);
  rcond_ = impl_->lu.rcond();
  if (!(rcond_ > 1e-13))
    throw solver_error(ErrorKind::Numerical, "ls_solve",
                       "discretized Lippmann-Schwinger system is singular (rcond " + fmt_sci(rcond_) +
                           "); the homogeneous equation has a nontrivial solution at this kappa");
}

LSSolver::~LSSolver() = default;

double LSSolver::born_norm() const { return impl_->born_norm; }

namespace {

Column finish(const std::vector<Complex>& strengths, Eigen::VectorXcd u) {
  Column c;
  c.u.assign(u.data(), u.data() + u.size());
  c.weights.resize(c.u.size());
  for (std::size_t j = 0; j < c.u.size(); ++j) c.weights[j] = strengths[j] * c.u[j];
  return c;
}

}  // namespace

Column LSSolver::green_column(const Vec3& y) const {
  const auto n = Eigen::Index(centers_.size());
  Eigen::VectorXcd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (distance(centers_[j], y) < fields::kSingularityGuard * kappa_.wavelength())
      throw solver_error(ErrorKind::Domain, "green_column", "source point coincides with a voxel centre");
    rhs[j] = fields::r0_plus(centers_[j], y, kappa_);
  }
  return finish(strengths_, n ? impl_->lu.solve(rhs) : rhs);
}

Column LSSolver::plane_wave_column(const Direction& theta) const {
  const auto n = Eigen::Index(centers_.size());
  Eigen::VectorXcd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) rhs[j] = expi(kappa_.value() * dot(theta.vec(), centers_[j]));
  return finish(strengths_, n ? impl_->lu.solve(rhs) : rhs);
}

Column LSSolver::born_green_column(const Vec3& y) const {
  const auto n = Eigen::Index(centers_.size());
  Eigen::VectorXcd rhs(n);
  for (Eigen::Index j = 0; j < n; ++j) rhs[j] = fields::r0_plus(centers_[j], y, kappa_);
  return finish(strengths_, rhs);
}

Complex LSSolver::scattered(const Column& c, const Vec3& x) const {
  Complex sum{0, 0};
  for (std::size_t j = 0; j < centers_.size(); ++j) sum += fields::green_outgoing(x - centers_[j], kappa_) * c.weights[j];
  return sum;
}

Complex50 LSSolver::scattered50(const Column& c, const std::array<Real50, 3>& x) const {
  const Real50 k = kappa_.value();
  const Real50 four_pi = 4 * pi_v<Real50>();
  Complex50 sum(0, 0);
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    const Real50 dx = x[0] - centers_[j].x, dy = x[1] - centers_[j].y, dz = x[2] - centers_[j].z;
    const Real50 r = sqrt(dx * dx + dy * dy + dz * dz);
    const Real50 ph = k * r;
    const Complex50 g(-cos(ph) / (four_pi * r), -sin(ph) / (four_pi * r));
    sum += g * Complex50(c.weights[j].real(), c.weights[j].imag());
  }
  return sum;
}

Complex LSSolver::farfield(const Column& c, const Direction& d) const {
  Complex sum{0, 0};
  for (std::size_t j = 0; j < centers_.size(); ++j)
    sum += expi(-kappa_.value() * dot(d.vec(), centers_[j])) * c.weights[j];
  return -sum / kFourPi;
}

Complex LSSolver::r_v_sc(const Vec3& x, const Vec3& y) const { return scattered(green_column(y), x); }

Complex LSSolver::r_v(const Vec3& x, const Vec3& y) const { return fields::r0_plus(x, y, kappa_) + r_v_sc(x, y); }

// ---------------------------------------------------------------------------

namespace {

class BoundResponse final : public fields::ScatteredResponse {
public:
  BoundResponse(std::shared_ptr<const LSSolver> solver, std::vector<Column> columns)
      : solver_(std::move(solver)), columns_(std::move(columns)) {}
  Complex scattered(const Vec3& x, std::size_t i) const override { return solver_->scattered(columns_.at(i), x); }
  Complex50 scattered50(const std::array<Real50, 3>& x, std::size_t i) const override {
    return solver_->scattered50(columns_.at(i), x);
  }

private:
  std::shared_ptr<const LSSolver> solver_;
  std::vector<Column> columns_;
};

}  // namespace

std::shared_ptr<const LSSolver> attach_potential(fields::Scene& scene, SolverOptions options) {
  if (!scene.potential) throw solver_error(ErrorKind::Validation, "attach_potential", "scene has no potential");
  scene.scattering.reset();
  scene.validate();
  auto solver = std::make_shared<const LSSolver>(*scene.potential, scene.kappa, options);
  std::vector<Column> columns;
  for (const auto& src : scene.sources)
    if (const auto* p = std::get_if<fields::PointSource>(&src)) columns.push_back(solver->green_column(p->position));
  scene.scattering = std::make_shared<BoundResponse>(solver, std::move(columns));
  return solver;
}

namespace {

Complex extrapolate_radial(const Evaluator& f, const Direction& d, WaveNumber kappa, const std::vector<double>& radii,
                           int order, double scale, const char* stage) {
  if (radii.empty() || !std::is_sorted(radii.begin(), radii.end()) || !(radii.front() > 0))
    throw solver_error(ErrorKind::Validation, stage, "radii must be positive and increasing");
  std::vector<std::pair<double, Complex>> est;
  for (double s : radii) est.emplace_back(s, scale * s * expi(-kappa.value() * s) * f(d.vec() * s));
  return rayrecover::extrapolate_estimates(est, order).value;
}

}  // namespace

Complex farfield_from_green(const Evaluator& r_sc_of_x, const Direction& d, WaveNumber kappa,
                            const std::vector<double>& radii, int order) {
  return extrapolate_radial(r_sc_of_x, d, kappa, radii, order, kFourPi, "farfield_from_green");
}

Complex scattering_amplitude(const Evaluator& psi_sc, const Direction& theta_prime, WaveNumber kappa,
                             const std::vector<double>& radii, int order) {
  return extrapolate_radial(psi_sc, theta_prime, kappa, radii, order, 1.0, "scattering_amplitude");
}

Complex potential_fourier(const fields::PotentialGrid& grid, const Vec3& xi) {
  const Vec3 h = grid.size / double(grid.n);
  const double shape = h.x * h.y * h.z * sinc(xi.x * h.x / 2) * sinc(xi.y * h.y / 2) * sinc(xi.z * h.z / 2);
  Complex sum{0, 0};
  for (std::size_t f = 0; f < grid.voxel_count(); ++f)
    if (grid.values[f] != Complex(0, 0)) sum += grid.values[f] * expi(-dot(xi, grid.voxel_center(f)));
  return sum * shape;
}

double ball_fourier(double radius, double xi_norm) {
  const double q = xi_norm * radius;
  const double vol = kFourPi / 3 * radius * radius * radius;
  if (q < 1e-3) return vol * (1 - q * q / 10);
  return vol * 3 * (std::sin(q) - q * std::cos(q)) / (q * q * q);
}

double reciprocity_report(const std::function<Complex(const Vec3&, const Vec3&)>& r, const std::vector<PointPair>& pairs,
                          double floor) {
  double worst = 0;
  for (const auto& pr : pairs) {
    const Complex a = r(pr.x, pr.y), b = r(pr.y, pr.x);
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), floor));
  }
  return worst;
}

}  // namespace helmrec::scattering
