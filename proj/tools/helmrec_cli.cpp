// helmrec command line. Talks to the library only through helmrec.h.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "helmrec/helmrec.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  hr_status status;
  std::string what;
};

void check(hr_status s) {
  if (s != HR_OK) throw Failure{s, hr_last_error()};
}

[[noreturn]] void invalid(const std::string& msg) { throw Failure{HR_E_VALIDATION, "cli: " + msg}; }

int exit_code(hr_status s) {
  switch (s) {
    case HR_OK: return 0;
    case HR_E_NUMERICAL:
    case HR_E_INTERNAL: return 3;
    default: return 2;
  }
}

template <class T, void (*Free)(T*)> struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Scene = Handle<hr_scene, hr_scene_free>;
using Recovery = Handle<hr_recovery, hr_recovery_free>;
using Plane = Handle<hr_plane, hr_plane_free>;
using Pipeline = Handle<hr_pipeline, hr_pipeline_free>;

struct Config {
  std::string command;
  std::string scene, out = ".", input;
  double kappa_override = 0;
  std::vector<double> ray_origin{0, 0, 0}, ray_dir{0, 0, 1};
  double tau = 0;
  int depth = 1;
  std::vector<double> ladder;
  int precision_digits = 30;
  std::vector<double> plane_base, plane_normal;
  double aperture = 0, spacing = 0;
  std::vector<std::vector<double>> probes;
  int count = 12;
  std::string suite;
  unsigned seed = 1;
  double kappa = 1;
  int n = 0;
  int directions = 200;
};

std::string path_in(const Config& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

void load_scene(const Config& c, Scene& sc) {
  if (c.scene.empty()) invalid("--scene is required for " + c.command);
  if (!fs::exists(c.scene)) invalid("scene file not found: " + c.scene);
  check(hr_scene_load(c.scene.c_str(), sc.out()));
  if (c.kappa_override > 0) check(hr_scene_set_kappa(sc.get(), c.kappa_override));
}

double scene_kappa(const Scene& sc) {
  double k = 0;
  check(hr_scene_info(sc.get(), &k, nullptr, nullptr));
  return k;
}

hr_recover_params recover_params(const Config& c, double kappa) {
  hr_recover_params p{};
  check(hr_recover_params_default(kappa, c.depth, &p));
  if (c.tau != 0) p.tau = c.tau;
  p.precision_digits = c.precision_digits;
  if (!c.ladder.empty()) {
    if (c.ladder.size() > HR_MAX_LADDER) invalid("ladder too long");
    p.ladder_len = int(c.ladder.size());
    std::copy(c.ladder.begin(), c.ladder.end(), p.ladder);
  }
  return p;
}

hr_plane_spec plane_spec(const Config& c) {
  if (c.plane_base.size() != 3 || c.plane_normal.size() != 3) invalid("--plane-base and --plane-normal are required");
  hr_plane_spec s{};
  std::copy(c.plane_base.begin(), c.plane_base.end(), s.base);
  std::copy(c.plane_normal.begin(), c.plane_normal.end(), s.normal);
  s.half_extent = c.aperture;
  s.spacing = c.spacing;
  return s;
}

void emit(const Config& c, const std::string& name, const std::vector<const char*>& cols,
          const std::vector<double>& values) {
  check(hr_emit_series(c.out.c_str(), name.c_str(), cols.data(), cols.size(), values.data(), values.size() / cols.size()));
}

// ---------------------------------------------------------------------------

int cmd_sample(const Config& c) {
  Scene sc;
  load_scene(c, sc);
  const auto p = recover_params(c, scene_kappa(sc));
  check(hr_samples_write(sc.get(), c.ray_origin.data(), c.ray_dir.data(), &p, path_in(c, "samples.csv").c_str()));
  std::printf("sample: %d radii x 2 written to %s\n", p.ladder_len, path_in(c, "samples.csv").c_str());
  return 0;
}

int cmd_recover_ray(const Config& c) {
  Recovery rec;
  Scene sc;
  double kappa = c.kappa_override, s_min = 0;
  if (!c.scene.empty()) {
    load_scene(c, sc);
    kappa = scene_kappa(sc);
  }
  if (!c.input.empty()) {
    if (!fs::exists(c.input)) invalid("sample file not found: " + c.input);
    if (!(kappa > 0)) invalid("--input needs --scene or --kappa-override for kappa");
    const auto p = recover_params(c, kappa);
    check(hr_recover_ray_samples(c.input.c_str(), kappa, s_min, c.ray_origin.data(), c.ray_dir.data(), &p, rec.out()));
  } else {
    if (c.scene.empty()) invalid("--scene or --input is required");
    const auto p = recover_params(c, kappa);
    check(hr_recover_ray(sc.get(), c.ray_origin.data(), c.ray_dir.data(), &p, rec.out()));
  }
  check(hr_recovery_write_json(rec.get(), path_in(c, "recovery.json").c_str()));
  double re = 0, im = 0;
  check(hr_recovery_coeff(rec.get(), 1, &re, &im));
  std::printf("recover-ray: depth %d, f1 = %.12e %+.12ei", hr_recovery_depth(rec.get()), re, im);
  if (sc.get()) {
    const double s = 50 / kappa;
    double vr = 0, vi = 0, err = 0, tr = 0, ti = 0;
    check(hr_recovery_eval(rec.get(), s, &vr, &vi, &err));
    double n[3];
    for (int i = 0; i < 3; ++i) n[i] = c.ray_dir[i];
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    const double x[3] = {c.ray_origin[0] + s * n[0] / len, c.ray_origin[1] + s * n[1] / len,
                         c.ray_origin[2] + s * n[2] / len};
    check(hr_scene_eval(sc.get(), x, &tr, &ti));
    std::printf(", rel err at s=50/kappa %.3e", std::hypot(vr - tr, vi - ti) / std::hypot(tr, ti));
  }
  std::printf("\n");
  return 0;
}

int cmd_recover_plane(const Config& c) {
  Scene sc;
  load_scene(c, sc);
  const auto spec = plane_spec(c);
  const auto p = recover_params(c, scene_kappa(sc));
  Plane pl;
  check(hr_plane_recover(sc.get(), &spec, &p, 1.5, pl.out()));
  check(hr_plane_write(pl.get(), path_in(c, "plane.csv").c_str(), path_in(c, "plane.json").c_str()));
  int n = 0, flagged = 0, rays = 0;
  double canc = 0, err = 0;
  check(hr_plane_info(pl.get(), &n, &flagged, &rays, &canc));
  check(hr_plane_max_error(pl.get(), sc.get(), &err));
  std::printf("recover-plane: %dx%d nodes, %d flagged, %d rays, max rel err %.3e\n", n, n, flagged, rays, err);
  return 0;
}

int cmd_continue(const Config& c) {
  Scene sc;
  load_scene(c, sc);
  const double kappa = scene_kappa(sc);
  const auto spec = plane_spec(c);
  Plane pl;
  if (!c.input.empty()) {
    const std::string header = fs::path(c.input).replace_extension(".json").string();
    if (!fs::exists(c.input) || !fs::exists(header)) invalid("grid files not found: " + c.input + ", " + header);
    check(hr_plane_load(c.input.c_str(), header.c_str(), pl.out()));
  } else {
    check(hr_plane_sample(sc.get(), &spec, pl.out()));
  }
  std::vector<std::vector<double>> probes = c.probes;
  if (probes.empty()) {
    const double len = std::sqrt(spec.normal[0] * spec.normal[0] + spec.normal[1] * spec.normal[1] +
                                 spec.normal[2] * spec.normal[2]);
    const double lambda = 2 * M_PI / kappa;
    for (double depth : {2.0, 3.0, 4.0})
      probes.push_back({spec.base[0] - depth * lambda * spec.normal[0] / len,
                        spec.base[1] - depth * lambda * spec.normal[1] / len,
                        spec.base[2] - depth * lambda * spec.normal[2] / len});
  }
  std::vector<double> rows;
  double worst = 0;
  int warnings = 0;
  for (const auto& x : probes) {
    if (x.size() != 3) invalid("--probe takes x,y,z");
    double re = 0, im = 0, trunc = 0, tr = 0, ti = 0;
    int warn = 0;
    check(hr_plane_continue(pl.get(), kappa, x.data(), 1e-2, &re, &im, &trunc, &warn));
    check(hr_scene_eval(sc.get(), x.data(), &tr, &ti));
    const double err = std::hypot(re - tr, im - ti) / std::hypot(tr, ti);
    worst = std::max(worst, err);
    warnings += warn;
    rows.insert(rows.end(), {x[0], x[1], x[2], re, im, tr, ti, err, trunc});
  }
  emit(c, "continuation", {"x", "y", "z", "re", "im", "truth_re", "truth_im", "rel_err", "truncation"}, rows);
  std::printf("continue-field: %zu probes, max rel err %.3e, %d aperture warnings\n", probes.size(), worst, warnings);
  return 0;
}

int cmd_farfield(const Config& c) {
  Scene sc;
  load_scene(c, sc);
  check(hr_farfield_write(sc.get(), c.count, path_in(c, "farfield.csv").c_str()));
  std::printf("farfield: %d x %d amplitudes written to %s\n", c.count, c.count, path_in(c, "farfield.csv").c_str());
  return 0;
}

int cmd_born(const Config& c) {
  Scene sc;
  load_scene(c, sc);
  if (c.plane_base.size() != 3 || c.plane_normal.size() != 3) invalid("--plane-base and --plane-normal are required");
  hr_pipeline_params p{};
  check(hr_pipeline_params_default(scene_kappa(sc), c.plane_base.data(), c.plane_normal.data(), &p));
  if (c.aperture > 0) p.patch_radius = c.aperture;
  if (c.spacing > 0) p.patch_spacing = c.spacing;
  Pipeline run;
  check(hr_pipeline_run(sc.get(), &p, run.out()));
  int has_v = 0;
  check(hr_scene_info(sc.get(), nullptr, nullptr, &has_v));
  double err = -1;
  if (has_v) check(hr_pipeline_error(run.get(), sc.get(), &err));
  check(hr_pipeline_write(run.get(), path_in(c, "potential.json").c_str(), path_in(c, "farfield.csv").c_str(),
                          path_in(c, "report.json").c_str(), err));
  double born = 0;
  int warn = 0;
  check(hr_pipeline_born(run.get(), &born, &warn));
  std::printf("born-invert: band-limited rel L2 err %.3e, Born norm %.3e%s\n", err, born,
              warn ? " (WARNING: outside the Born regime)" : "");
  return 0;
}

// ---------------------------------------------------------------------------
// verification suites

std::string ball_scene(double kappa, double eps, int n) {
  std::ostringstream s;
  s.precision(17);
  s << R"({"kappa": )" << kappa << R"(, "obstacle_radius": 1.8, "sources": [], "potential": {"corner": [-1,-1,-1], )"
    << R"("size": [2,2,2], "n": )" << n << R"(, "values_re": [)";
  std::ostringstream im;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double h = 2.0 / n;
        const double x = -1 + (i + 0.5) * h, y = -1 + (j + 0.5) * h, z = -1 + (k + 0.5) * h;
        const bool first = i + j + k == 0;
        s << (first ? "" : ",") << (x * x + y * y + z * z < 1 ? eps : 0.0);
        im << (first ? "" : ",") << 0;
      }
  s << R"(], "values_im": [)" << im.str() << "]}}";
  return s.str();
}

std::string random_scene(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::ostringstream re, im;
  re.precision(17);
  im.precision(17);
  for (int f = 0; f < 216; ++f) {
    re << (f ? "," : "") << 6 * u(rng);
    im << (f ? "," : "") << 3.2 * u(rng);
  }
  return R"({"kappa": 2, "obstacle_radius": 1.5, "sources": [], "potential": {"corner": [-0.8,-0.8,-0.8], )"
         R"("size": [1.6,1.6,1.6], "n": 6, "values_re": [)" +
         re.str() + R"(], "values_im": [)" + im.str() + "]}}";
}

bool suite_sphere_null(const Config& c) {
  std::vector<int> ns;
  if (c.n > 0) ns.push_back(c.n);
  else ns = {1, 2, 3, 4, 5};
  bool ok = true;
  std::vector<double> rows;
  for (int n : ns) {
    double null_im = 0, off = 0;
    check(hr_sphere_null(c.kappa, n, c.directions, &null_im));
    check(hr_sphere_null(c.kappa, n + 0.5, c.directions, &off));
    const double r = (n + 0.5) * M_PI / c.kappa;
    const double off_err = std::abs(off - 1 / (4 * M_PI * r)) * 4 * M_PI * r;
    ok = ok && null_im <= 1e-14 && off_err <= 1e-12;
    rows.insert(rows.end(), {double(n), null_im, off_err});
    std::printf("  sphere r=%d*pi/kappa: max|Im G| %.3e, off-resonant rel dev %.3e\n", n, null_im, off_err);
  }
  emit(c, "verify_sphere_null", {"n", "max_im_g", "off_resonant_rel_dev"}, rows);
  return ok;
}

bool suite_two_point(const Config&) {
  Scene sc;
  check(hr_scene_parse(R"({"kappa": 1, "sources": [{"type": "point", "position": [0,0,0]}]})", sc.out()));
  hr_recover_params p{};
  check(hr_recover_params_default(1.0, 1, &p));
  Recovery rec;
  const double o[3] = {0, 0, 0}, d[3] = {0.3, -0.4, 0.5};
  check(hr_recover_ray(sc.get(), o, d, &p, rec.out()));
  double re = 0, im = 0;
  check(hr_recovery_coeff(rec.get(), 1, &re, &im));
  const double err = std::hypot(re - 1 / (4 * M_PI), im) * 4 * M_PI;
  std::printf("  f1 = %.15e %+.3ei, rel err %.3e\n", re, im, err);
  return err <= 1e-12;
}

bool suite_slopes(const Config& c) {
  // Point source off the frame origin: f1 = e^{−iκθ·y0}/(4π).
  Scene sc;
  check(hr_scene_parse(R"({"kappa": 1, "sources": [{"type": "point", "position": [0.3,0,0]}]})", sc.out()));
  const double th[3] = {1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)};
  const double ph = -th[0] * 0.3;
  const double fr = std::cos(ph) / (4 * M_PI), fi = std::sin(ph) / (4 * M_PI);
  const double tau = M_PI / 2;
  auto J = [&](double s) {
    const double x[3] = {s * th[0], s * th[1], s * th[2]};
    double re = 0, im = 0;
    check(hr_scene_eval(sc.get(), x, &re, &im));
    return s * im;
  };
  std::vector<double> rows, ls, le;
  for (int i = 0; i <= 20; ++i) {
    const double s = 10 * std::pow(10.0, i / 10.0);
    double re = 0, im = 0;
    check(hr_two_point_estimate(J(s), J(s + tau), s, tau, 1.0, &re, &im));
    const double err = std::hypot(re - fr, im - fi);
    rows.insert(rows.end(), {s, err});
    ls.push_back(std::log(s));
    le.push_back(std::log(err));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) mx += ls[i] / ls.size(), my += le[i] / ls.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) sxy += (ls[i] - mx) * (le[i] - my), sxx += (ls[i] - mx) * (ls[i] - mx);
  const double slope = sxy / sxx;
  emit(c, "slope_two_point", {"s", "abs_err"}, rows);
  std::printf("  two-point remainder slope %.3f over s in [10, 1000]\n", slope);
  return std::abs(slope + 1) <= 0.2;
}

bool suite_reciprocity(const Config& c) {
  Scene sc;
  check(hr_scene_parse(random_scene(c.seed).c_str(), sc.out()));
  double sym = 0, skew = 0;
  check(hr_reciprocity(sc.get(), 8, c.seed, 0.0, &sym));
  check(hr_reciprocity(sc.get(), 8, c.seed, 0.5, &skew));
  emit(c, "verify_reciprocity", {"seed", "asymmetry", "asymmetrized_fixture"}, {double(c.seed), sym, skew});
  std::printf("  seed %u: asymmetry %.3e, asymmetrized fixture %.3e\n", c.seed, sym, skew);
  return sym <= 1e-8 && skew > 1e-3;
}

bool suite_born(const Config& c) {
  const double base[3] = {0, 0, 2}, normal[3] = {0, 0, -1};
  hr_pipeline_params p{};
  check(hr_pipeline_params_default(2.0, base, normal, &p));
  p.patch_radius = 8;
  std::vector<double> rows;
  bool ok = true;
  for (double eps : {0.0, 0.05}) {
    Scene sc;
    check(hr_scene_parse(ball_scene(2.0, eps, 10).c_str(), sc.out()));
    Pipeline run;
    check(hr_pipeline_run(sc.get(), &p, run.out()));
    double err = 0;
    if (eps > 0) {
      check(hr_pipeline_error(run.get(), sc.get(), &err));
      ok = ok && err <= 0.15;
      std::printf("  weak ball eps=%.2f: band-limited rel L2 err %.3e\n", eps, err);
    } else {
      check(hr_pipeline_write(run.get(), path_in(c, "born_zero_potential.json").c_str(), nullptr, nullptr, -1));
    }
    rows.insert(rows.end(), {eps, err});
  }
  emit(c, "verify_born", {"eps", "bandlimited_rel_l2"}, rows);
  return ok;
}

int cmd_verify(const Config& c) {
  const std::vector<std::pair<std::string, bool (*)(const Config&)>> suites{
      {"sphere-null", suite_sphere_null}, {"two-point", suite_two_point}, {"slopes", suite_slopes},
      {"reciprocity", suite_reciprocity}, {"born", suite_born}};
  bool known = c.suite == "all";
  for (const auto& s : suites) known = known || s.first == c.suite;
  if (!known) invalid("unknown suite '" + c.suite + "'");
  std::printf("verify: seed %u\n", c.seed);
  bool all = true;
  for (const auto& [name, fn] : suites) {
    if (c.suite != "all" && c.suite != name) continue;
    const bool ok = fn(c);
    std::printf("verify %s: %s\n", name.c_str(), ok ? "PASS" : "FAIL");
    all = all && ok;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"helmrec: radiation fields from their imaginary part"};
  app.require_subcommand(1);
  Config c;

  auto vec3 = [](CLI::App* a, const char* name, std::vector<double>& v, const char* help) {
    a->add_option(name, v, help)->delimiter(',')->expected(3);
  };
  auto common = [&](CLI::App* a) {
    a->add_option("--scene", c.scene, "scene JSON");
    a->add_option("--out", c.out, "output directory");
    a->add_option("--kappa-override", c.kappa_override, "replace the scene's kappa");
    a->add_option("--seed", c.seed, "seed for randomised suites");
  };
  auto recovery = [&](CLI::App* a) {
    vec3(a, "--ray-origin", c.ray_origin, "ray origin x,y,z");
    vec3(a, "--ray-dir", c.ray_dir, "ray direction x,y,z");
    a->add_option("--tau", c.tau, "two-point separation (default pi/(2 kappa))");
    a->add_option("--depth", c.depth, "number of coefficients");
    a->add_option("--ladder", c.ladder, "radius ladder s1,...,sK")->delimiter(',');
    a->add_option("--precision-digits", c.precision_digits, "<=15 double, <=50 extended");
  };
  auto plane = [&](CLI::App* a) {
    vec3(a, "--plane-base", c.plane_base, "point on the plane");
    vec3(a, "--plane-normal", c.plane_normal, "outward normal of V_X (towards the obstacle)");
    a->add_option("--aperture", c.aperture, "half extent of the grid");
    a->add_option("--spacing", c.spacing, "grid spacing");
  };

  auto* sample = app.add_subcommand("sample", "write Im psi samples along a ray");
  common(sample);
  recovery(sample);
  auto* rray = app.add_subcommand("recover-ray", "recover AW coefficients along a ray");
  common(rray);
  recovery(rray);
  rray->add_option("--input", c.input, "samples CSV instead of the scene");
  auto* rplane = app.add_subcommand("recover-plane", "reconstruct psi on a plane grid");
  common(rplane);
  recovery(rplane);
  plane(rplane);
  auto* cont = app.add_subcommand("continue-field", "continue plane data into V_X");
  common(cont);
  plane(cont);
  cont->add_option("--input", c.input, "grid CSV (header JSON alongside)");
  cont->add_option("--probe", c.probes, "probe point x,y,z (repeatable)")->delimiter(',')->expected(3)->allow_extra_args(false);
  auto* ff = app.add_subcommand("farfield", "scattering amplitudes of the scene's potential");
  common(ff);
  ff->add_option("--count", c.count, "number of directions");
  auto* born = app.add_subcommand("born-invert", "Born-level potential from Im R on a plane");
  common(born);
  plane(born);
  auto* verify = app.add_subcommand("verify", "verification suites");
  common(verify);
  verify->add_option("--suite", c.suite, "sphere-null | two-point | slopes | reciprocity | born | all")->required();
  verify->add_option("--kappa", c.kappa, "wavenumber for sphere-null");
  verify->add_option("--n", c.n, "single sphere index for sphere-null");
  verify->add_option("--directions", c.directions, "directions per sphere");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) invalid("cannot create output directory " + c.out);
    if (c.command == "sample") return cmd_sample(c);
    if (c.command == "recover-ray") return cmd_recover_ray(c);
    if (c.command == "recover-plane") return cmd_recover_plane(c);
    if (c.command == "continue-field") return cmd_continue(c);
    if (c.command == "farfield") return cmd_farfield(c);
    if (c.command == "born-invert") return cmd_born(c);
    return cmd_verify(c);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.what.c_str());
    return exit_code(f.status);
  }
}
