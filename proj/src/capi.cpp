#include "helmrec/helmrec.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <random>
#include <string>

#include "helmrec/io.hpp"
#include "helmrec/scattering.hpp"

using namespace helmrec;

struct hr_scene {
  std::shared_ptr<fields::Scene> scene;
  std::shared_ptr<const scattering::LSSolver> solver;
};

struct hr_recovery {
  rayrecover::RayRecovery rec;
};

struct hr_plane {
  planeops::PlaneGrid grid;
  std::vector<std::uint8_t> flagged;
  std::size_t rays = 0;
  double cancellation = 0;
};

struct hr_pipeline {
  scattering::PipelineResult result;
};

namespace {

thread_local std::string last_error;

hr_status fail(hr_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F> hr_status guarded(F f) {
  try {
    f();
    last_error.clear();
    return HR_OK;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::Validation: return fail(HR_E_VALIDATION, e.what());
      case ErrorKind::Numerical: return fail(HR_E_NUMERICAL, e.what());
      case ErrorKind::Domain: return fail(HR_E_DOMAIN, e.what());
      case ErrorKind::Io: return fail(HR_E_IO, e.what());
    }
    return fail(HR_E_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HR_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HR_E_INTERNAL, std::string("internal error: ") + e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorKind::Validation, "capi", "arguments", std::string(what) + " is NULL");
}

Vec3 vec(const double* v) { return {v[0], v[1], v[2]}; }

rayrecover::RecoverParams convert(const hr_recover_params* p) {
  require(p, "params");
  if (p->ladder_len < 0 || p->ladder_len > HR_MAX_LADDER)
    throw Error(ErrorKind::Validation, "capi", "params", "ladder_len out of range");
  rayrecover::RecoverParams r;
  r.tau = p->tau;
  r.depth = p->depth;
  r.extrapolation_order = p->extrapolation_order;
  r.precision_digits = p->precision_digits;
  r.ladder.assign(p->ladder, p->ladder + p->ladder_len);
  return r;
}

void attach(hr_scene& s) {
  s.solver.reset();
  s.scene->scattering.reset();
  s.scene->validate();
  if (s.scene->potential) s.solver = scattering::attach_potential(*s.scene);
}

hr_scene* make_scene(fields::Scene sc) {
  auto h = std::make_unique<hr_scene>();
  h->scene = std::make_shared<fields::Scene>(std::move(sc));
  attach(*h);
  return h.release();
}

const scattering::LSSolver& solver_of(const hr_scene* s) {
  require(s, "scene");
  if (!s->solver) throw Error(ErrorKind::Validation, "capi", "scattering", "scene has no potential");
  return *s->solver;
}

planeops::PlaneGrid grid_of(const hr_plane_spec* spec) {
  require(spec, "plane spec");
  return {planeops::PlaneFrame::from_normal(vec(spec->base), vec(spec->normal)), spec->half_extent, spec->spacing, {}};
}

}  // namespace

extern "C" {

const char* hr_last_error(void) { return last_error.c_str(); }
const char* hr_version(void) { return "0.1.0"; }

hr_status hr_scene_load(const char* path, hr_scene** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = make_scene(io::scene_from_json(io::read_file(path)));
  });
}

hr_status hr_scene_parse(const char* json, hr_scene** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = make_scene(io::scene_from_json(json));
  });
}

void hr_scene_free(hr_scene* scene) { delete scene; }

hr_status hr_scene_set_kappa(hr_scene* s, double kappa) {
  return guarded([&] {
    require(s, "scene");
    auto copy = std::make_shared<fields::Scene>(*s->scene);
    copy->kappa = WaveNumber(kappa);
    hr_scene next{copy, nullptr};
    attach(next);
    *s = std::move(next);
  });
}

hr_status hr_scene_info(const hr_scene* s, double* kappa, double* radius, int* has_potential) {
  return guarded([&] {
    require(s, "scene");
    if (kappa) *kappa = s->scene->kappa.value();
    if (radius) *radius = s->scene->obstacle_radius;
    if (has_potential) *has_potential = s->scene->potential ? 1 : 0;
  });
}

hr_status hr_scene_eval(const hr_scene* s, const double x[3], double* re, double* im) {
  return guarded([&] {
    require(s, "scene");
    require(x, "x");
    const Complex v = fields::eval_scene(*s->scene, vec(x));
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

hr_status hr_recover_params_default(double kappa, int depth, hr_recover_params* out) {
  return guarded([&] {
    require(out, "out");
    const auto p = rayrecover::RecoverParams::defaults(WaveNumber(kappa), depth);
    hr_recover_params r{};
    r.tau = p.tau;
    r.depth = p.depth;
    r.extrapolation_order = p.extrapolation_order;
    r.precision_digits = p.precision_digits;
    r.ladder_len = int(p.ladder.size());
    std::copy(p.ladder.begin(), p.ladder.end(), r.ladder);
    *out = r;
  });
}

hr_status hr_recover_ray(const hr_scene* s, const double origin[3], const double dir[3], const hr_recover_params* p,
                         hr_recovery** out) {
  return guarded([&] {
    require(s, "scene");
    require(origin, "origin");
    require(dir, "dir");
    require(out, "out");
    const awseries::SceneRaySampler sampler(s->scene, Ray{vec(origin), Direction(vec(dir))});
    auto h = std::make_unique<hr_recovery>();
    h->rec = rayrecover::recover_coeffs(sampler, convert(p));
    *out = h.release();
  });
}

hr_status hr_samples_write(const hr_scene* s, const double origin[3], const double dir[3], const hr_recover_params* p,
                           const char* csv_path) {
  return guarded([&] {
    require(s, "scene");
    require(origin, "origin");
    require(dir, "dir");
    require(csv_path, "path");
    const auto params = convert(p);
    const awseries::SceneRaySampler sampler(s->scene, Ray{vec(origin), Direction(vec(dir))});
    params.validate(s->scene->kappa, sampler.s_min());
    std::vector<io::SampleRow> rows;
    for (const auto& r : io::sample_radii(params)) rows.push_back({r, sampler.im_psi(r)});
    io::write_file(csv_path, io::samples_to_csv(rows));
  });
}

hr_status hr_recover_ray_samples(const char* csv_path, double kappa, double s_min, const double origin[3],
                                 const double dir[3], const hr_recover_params* p, hr_recovery** out) {
  return guarded([&] {
    require(csv_path, "path");
    require(origin, "origin");
    require(dir, "dir");
    require(out, "out");
    const io::TableRaySampler sampler(io::samples_from_csv(io::read_file(csv_path)),
                                      Ray{vec(origin), Direction(vec(dir))}, WaveNumber(kappa), s_min);
    auto h = std::make_unique<hr_recovery>();
    h->rec = rayrecover::recover_coeffs(sampler, convert(p));
    *out = h.release();
  });
}

int hr_recovery_depth(const hr_recovery* rec) { return rec ? int(rec->rec.recovered.depth()) : 0; }

hr_status hr_recovery_coeff(const hr_recovery* rec, int j, double* re, double* im) {
  return guarded([&] {
    require(rec, "recovery");
    if (j < 1 || j > hr_recovery_depth(rec))
      throw Error(ErrorKind::Validation, "capi", "recovery", "coefficient index out of range");
    const Complex c = rec->rec.recovered.coeffs[j - 1];
    if (re) *re = c.real();
    if (im) *im = c.imag();
  });
}

hr_status hr_recovery_eval(const hr_recovery* rec, double s, double* re, double* im, double* err) {
  return guarded([&] {
    require(rec, "recovery");
    const auto r = rayrecover::reconstruct_on_ray(rec->rec, s);
    if (re) *re = r.value.real();
    if (im) *im = r.value.imag();
    if (err) *err = r.error_estimate;
  });
}

hr_status hr_recovery_write_json(const hr_recovery* rec, const char* path) {
  return guarded([&] {
    require(rec, "recovery");
    require(path, "path");
    io::write_file(path, io::recovery_to_json(rec->rec));
  });
}

void hr_recovery_free(hr_recovery* rec) { delete rec; }

hr_status hr_plane_sample(const hr_scene* s, const hr_plane_spec* spec, hr_plane** out) {
  return guarded([&] {
    require(s, "scene");
    require(out, "out");
    auto h = std::make_unique<hr_plane>();
    h->grid = planeops::sample_plane(*s->scene, grid_of(spec));
    h->flagged.assign(h->grid.node_count(), 0);
    *out = h.release();
  });
}

hr_status hr_plane_recover(const hr_scene* s, const hr_plane_spec* spec, const hr_recover_params* p, double guard,
                           hr_plane** out) {
  return guarded([&] {
    require(s, "scene");
    require(out, "out");
    const planeops::ScenePlaneSampler sampler(s->scene);
    auto r = planeops::recover_plane(sampler, grid_of(spec), convert(p), guard);
    auto h = std::make_unique<hr_plane>();
    h->grid = std::move(r.grid);
    h->flagged = std::move(r.flagged);
    h->rays = r.rays_recovered;
    h->cancellation = r.max_cancellation_digits;
    *out = h.release();
  });
}

hr_status hr_plane_load(const char* csv_path, const char* header_path, hr_plane** out) {
  return guarded([&] {
    require(csv_path, "csv path");
    require(header_path, "header path");
    require(out, "out");
    auto h = std::make_unique<hr_plane>();
    h->grid = io::grid_from_files(io::read_file(header_path), io::read_file(csv_path));
    h->flagged.assign(h->grid.node_count(), 0);
    *out = h.release();
  });
}

hr_status hr_plane_info(const hr_plane* pl, int* n, int* flagged, int* rays, double* cancellation) {
  return guarded([&] {
    require(pl, "plane");
    if (n) *n = pl->grid.nodes_per_side();
    if (flagged) *flagged = int(std::count(pl->flagged.begin(), pl->flagged.end(), 1));
    if (rays) *rays = int(pl->rays);
    if (cancellation) *cancellation = pl->cancellation;
  });
}

hr_status hr_plane_max_error(const hr_plane* pl, const hr_scene* s, double* max_rel) {
  return guarded([&] {
    require(pl, "plane");
    require(s, "scene");
    double worst = 0;
    const int n = pl->grid.nodes_per_side();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = std::size_t(i) * n + j;
        if (pl->flagged[k]) continue;
        const Complex t = fields::eval_scene(*s->scene, pl->grid.node(i, j));
        if (std::abs(t) > 0) worst = std::max(worst, std::abs(pl->grid.values[k] - t) / std::abs(t));
      }
    if (max_rel) *max_rel = worst;
  });
}

hr_status hr_plane_write(const hr_plane* pl, const char* csv_path, const char* header_path) {
  return guarded([&] {
    require(pl, "plane");
    if (csv_path) io::write_file(csv_path, io::grid_to_csv(pl->grid, pl->flagged));
    if (header_path) io::write_file(header_path, io::grid_header_json(pl->grid));
  });
}

hr_status hr_plane_continue(const hr_plane* pl, double kappa, const double x[3], double tolerance, double* re,
                            double* im, double* trunc, int* warning) {
  return guarded([&] {
    require(pl, "plane");
    require(x, "x");
    const auto c = planeops::halfspace_continue(pl->grid, WaveNumber(kappa), vec(x), tolerance);
    if (re) *re = c.value.real();
    if (im) *im = c.value.imag();
    if (trunc) *trunc = c.truncation_estimate;
    if (warning) *warning = c.aperture_warning ? 1 : 0;
  });
}

void hr_plane_free(hr_plane* plane) { delete plane; }

hr_status hr_farfield_write(const hr_scene* s, int count, const char* csv_path) {
  return guarded([&] {
    const auto& solver = solver_of(s);
    require(csv_path, "path");
    if (count < 1 || count > 2000) throw Error(ErrorKind::Validation, "capi", "farfield", "count must be in [1, 2000]");
    const auto dirs = planeops::fibonacci_directions(count);
    std::vector<scattering::AmplitudeSample> out;
    for (const auto& t : dirs) {
      const auto col = solver.plane_wave_column(Direction(t));
      for (const auto& tp : dirs) out.push_back({t, tp, solver.farfield(col, Direction(tp))});
    }
    io::write_file(csv_path, io::farfield_to_csv(out));
  });
}

hr_status hr_reciprocity(const hr_scene* s, int pairs, unsigned seed, double asymmetry, double* out) {
  return guarded([&] {
    const auto& base = solver_of(s);
    require(out, "out");
    if (pairs < 1) throw Error(ErrorKind::Validation, "capi", "reciprocity", "pairs must be positive");
    std::shared_ptr<const scattering::LSSolver> skewed;
    const scattering::LSSolver* solver = &base;
    if (asymmetry != 0) {
      scattering::SolverOptions opt;
      opt.asymmetry = asymmetry;
      skewed = std::make_shared<const scattering::LSSolver>(*s->scene->potential, s->scene->kappa, opt);
      solver = skewed.get();
    }
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ur(1.5, 3.0);
    const double r = s->scene->obstacle_radius;
    std::vector<scattering::PointPair> pts;
    for (int i = 0; i < pairs; ++i) {
      const Vec3 a{nd(rng), nd(rng), nd(rng)}, b{nd(rng), nd(rng), nd(rng)};
      const double ra = ur(rng) * r, rb = ur(rng) * r;
      pts.push_back({a.normalized() * ra, b.normalized() * rb});
    }
    *out = scattering::reciprocity_report([&](const Vec3& x, const Vec3& y) { return solver->r_v(x, y); }, pts);
  });
}

hr_status hr_pipeline_params_default(double kappa, const double base[3], const double normal[3],
                                     hr_pipeline_params* out) {
  return guarded([&] {
    require(base, "base");
    require(normal, "normal");
    require(out, "out");
    const auto p = scattering::PipelineParams::defaults(
        planeops::PlaneFrame::from_normal(vec(base), vec(normal)), WaveNumber(kappa));
    hr_pipeline_params r{};
    std::copy(base, base + 3, r.plane_base);
    std::copy(normal, normal + 3, r.plane_normal);
    r.patch_radius = p.patch_radius;
    r.patch_spacing = p.patch_spacing;
    r.equatorial_directions = p.equatorial_directions;
    r.hemisphere_directions = p.hemisphere_directions;
    r.multipole_degree = p.multipole_degree;
    r.band = p.band;
    r.inversion_spacing = p.inversion_spacing;
    r.tikhonov = p.tikhonov;
    r.real_potential = p.real_potential ? 1 : 0;
    *out = r;
  });
}

hr_status hr_pipeline_run(const hr_scene* s, const hr_pipeline_params* pp, hr_pipeline** out) {
  return guarded([&] {
    require(s, "scene");
    require(pp, "params");
    require(out, "out");
    auto p = scattering::PipelineParams::defaults(
        planeops::PlaneFrame::from_normal(vec(pp->plane_base), vec(pp->plane_normal)), s->scene->kappa);
    p.patch_radius = pp->patch_radius;
    p.patch_spacing = pp->patch_spacing;
    p.equatorial_directions = pp->equatorial_directions;
    p.hemisphere_directions = pp->hemisphere_directions;
    p.multipole_degree = pp->multipole_degree;
    p.band = pp->band;
    p.inversion_spacing = pp->inversion_spacing;
    p.tikhonov = pp->tikhonov;
    p.real_potential = pp->real_potential != 0;
    std::shared_ptr<const scattering::LSSolver> solver = s->solver;
    if (!solver) {
      // Free scene: R⁺_{v,sc} ≡ 0.
      fields::PotentialGrid zero{{-0.5, -0.5, -0.5}, {1, 1, 1}, 1, {Complex(0, 0)}};
      solver = std::make_shared<const scattering::LSSolver>(zero, s->scene->kappa);
    }
    const scattering::SolverPlaneData data(solver, s->scene->obstacle_radius);
    auto h = std::make_unique<hr_pipeline>();
    h->result = scattering::theorem3_pipeline(data, p);
    *out = h.release();
  });
}

hr_status hr_pipeline_error(const hr_pipeline* run, const hr_scene* truth, double* rel_l2) {
  return guarded([&] {
    require(run, "pipeline");
    require(truth, "scene");
    require(rel_l2, "out");
    if (!truth->scene->potential)
      throw Error(ErrorKind::Validation, "capi", "pipeline", "truth scene has no potential");
    *rel_l2 = scattering::bandlimited_error(run->result, *truth->scene->potential);
  });
}

hr_status hr_pipeline_stage(const hr_pipeline* run, int index, const char** name, double* error_estimate) {
  return guarded([&] {
    require(run, "pipeline");
    if (index < 0 || index >= int(run->result.stages.size()))
      throw Error(ErrorKind::Validation, "capi", "pipeline", "stage index out of range");
    const auto& st = run->result.stages[index];
    if (name) *name = st.stage.c_str();
    if (error_estimate) *error_estimate = st.error_estimate;
  });
}

hr_status hr_pipeline_born(const hr_pipeline* run, double* born_norm, int* warning) {
  return guarded([&] {
    require(run, "pipeline");
    if (born_norm) *born_norm = run->result.born_norm;
    if (warning) *warning = run->result.born_warning ? 1 : 0;
  });
}

hr_status hr_pipeline_write(const hr_pipeline* run, const char* potential_json, const char* farfield_csv,
                            const char* report_json, double bandlimited_error) {
  return guarded([&] {
    require(run, "pipeline");
    if (potential_json) io::write_file(potential_json, io::potential_to_json(io::estimate_as_grid(run->result)));
    if (farfield_csv) io::write_file(farfield_csv, io::farfield_to_csv(run->result.amplitudes));
    if (report_json) io::write_file(report_json, io::pipeline_report_json(run->result, bandlimited_error));
  });
}

void hr_pipeline_free(hr_pipeline* run) { delete run; }

hr_status hr_sphere_null(double kappa, double factor, int directions, double* max_im) {
  return guarded([&] {
    require(max_im, "out");
    if (directions < 1) throw Error(ErrorKind::Validation, "capi", "sphere_null", "directions must be positive");
    if (!(factor > 0)) throw Error(ErrorKind::Validation, "capi", "sphere_null", "radius factor must be positive");
    *max_im = planeops::sphere_null_probe(WaveNumber(kappa), factor, planeops::fibonacci_directions(directions));
  });
}

hr_status hr_two_point_estimate(double j_x, double j_y, double s, double tau, double kappa, double* re, double* im) {
  return guarded([&] {
    const Complex f = rayrecover::two_point_estimate(j_x, j_y, s, tau, WaveNumber(kappa));
    if (re) *re = f.real();
    if (im) *im = f.imag();
  });
}

hr_status hr_emit_series(const char* dir, const char* name, const char* const* columns, size_t cols,
                         const double* values, size_t rows) {
  return guarded([&] {
    require(dir, "dir");
    require(name, "name");
    require(columns, "columns");
    if (rows) require(values, "values");
    if (cols == 0) throw Error(ErrorKind::Validation, "capi", "arguments", "series needs at least one column");
    io::Series s;
    s.name = name;
    for (size_t c = 0; c < cols; ++c) s.columns.emplace_back(columns[c]);
    for (size_t r = 0; r < rows; ++r) s.rows.emplace_back(values + r * cols, values + (r + 1) * cols);
    io::emit_plot_data({s}, dir);
  });
}

}  // extern "C"
