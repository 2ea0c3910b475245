#include "helmrec/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace helmrec::io {

using json = nlohmann::ordered_json;

namespace {

Error io_error(const std::string& stage, const std::string& msg) { return Error(ErrorKind::Io, "io", stage, msg); }
Error bad_input(const std::string& stage, const std::string& msg) {
  return Error(ErrorKind::Validation, "io", stage, msg);
}

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json cplx(const Complex& c) { return json::array({c.real(), c.imag()}); }

Vec3 get_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw bad_input("parse", std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Complex get_cplx(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw bad_input("parse", std::string(what) + " must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json parse(const std::string& text, const std::string& stage) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw bad_input(stage, std::string("malformed JSON: ") + e.what());
  }
}

template <class F> auto guarded(const std::string& stage, F f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw bad_input(stage, e.what());
  }
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::size_t columns, const std::string& stage) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns)
      throw bad_input(stage, "expected " + std::to_string(columns) + " columns in row: " + line);
    out.push_back(std::move(cells));
  }
  return out;
}

double to_double(const std::string& s, const std::string& stage) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (s.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw bad_input(stage, "not a number: '" + s + "'");
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("read", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("write", "cannot open " + tmp);
    out << content;
    if (!out) throw io_error("write", "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("write", "cannot rename " + tmp + ": " + ec.message());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Real50& v) { return v.str(std::numeric_limits<Real50>::max_digits10, std::ios::scientific); }

// ---------------------------------------------------------------------------

fields::Scene scene_from_json(const std::string& text) {
  const json j = parse(text, "scene");
  return guarded("scene", [&] {
    fields::Scene sc;
    sc.kappa = WaveNumber(j.at("kappa").get<double>());
    if (j.contains("obstacle_radius")) sc.obstacle_radius = j["obstacle_radius"].get<double>();
    for (const auto& s : j.at("sources")) {
      const std::string type = s.at("type").get<std::string>();
      const Complex amp = s.contains("amplitude") ? get_cplx(s["amplitude"], "amplitude") : Complex(1, 0);
      if (type == "point") {
        sc.sources.push_back(fields::PointSource{get_vec(s.at("position"), "position"), amp});
      } else if (type == "multipole") {
        sc.sources.push_back(
            fields::MultipoleSource{s.at("l").get<int>(), s.at("m").get<int>(), get_vec(s.at("center"), "center"), amp});
      } else {
        throw bad_input("scene", "unknown source type '" + type + "'");
      }
    }
    if (j.contains("potential") && !j["potential"].is_null()) {
      const json& p = j["potential"];
      fields::PotentialGrid g;
      g.corner = get_vec(p.at("corner"), "corner");
      g.size = get_vec(p.at("size"), "size");
      g.n = p.at("n").get<int>();
      const auto re = p.at("values_re").get<std::vector<double>>();
      const auto im = p.at("values_im").get<std::vector<double>>();
      if (re.size() != im.size()) throw bad_input("scene", "values_re and values_im differ in length");
      for (std::size_t i = 0; i < re.size(); ++i) g.values.emplace_back(re[i], im[i]);
      sc.potential = std::move(g);
    }
    sc.validate();
    return sc;
  });
}

namespace {

json potential_json(const fields::PotentialGrid& g) {
  json p;
  p["corner"] = vec(g.corner);
  p["size"] = vec(g.size);
  p["n"] = g.n;
  std::vector<double> re, im;
  for (const auto& v : g.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  p["values_re"] = re;
  p["values_im"] = im;
  return p;
}

json aw_json(const awseries::AWExpansion& aw) {
  json j;
  j["kappa"] = aw.kappa.value();
  j["origin"] = vec(aw.origin);
  j["theta"] = vec(aw.theta.vec());
  j["coeffs"] = json::array();
  for (const auto& c : aw.coeffs) j["coeffs"].push_back(cplx(c));
  return j;
}

}  // namespace

std::string scene_to_json(const fields::Scene& sc) {
  json j;
  j["kappa"] = sc.kappa.value();
  j["obstacle_radius"] = sc.obstacle_radius;
  j["sources"] = json::array();
  for (const auto& src : sc.sources) {
    json s;
    if (const auto* p = std::get_if<fields::PointSource>(&src)) {
      s["type"] = "point";
      s["position"] = vec(p->position);
      s["amplitude"] = cplx(p->amplitude);
    } else {
      const auto& m = std::get<fields::MultipoleSource>(src);
      s["type"] = "multipole";
      s["l"] = m.l;
      s["m"] = m.m;
      s["center"] = vec(m.center);
      s["amplitude"] = cplx(m.amplitude);
    }
    j["sources"].push_back(s);
  }
  if (sc.potential) j["potential"] = potential_json(*sc.potential);
  return j.dump(2) + "\n";
}

std::string potential_to_json(const fields::PotentialGrid& grid) { return potential_json(grid).dump(2) + "\n"; }

std::string aw_to_json(const awseries::AWExpansion& aw) { return aw_json(aw).dump(2) + "\n"; }

awseries::AWExpansion aw_from_json(const std::string& text) {
  const json j = parse(text, "aw");
  return guarded("aw", [&] {
    awseries::AWExpansion aw;
    aw.kappa = WaveNumber(j.at("kappa").get<double>());
    aw.origin = get_vec(j.at("origin"), "origin");
    aw.theta = Direction(get_vec(j.at("theta"), "theta"));
    for (const auto& c : j.at("coeffs")) aw.coeffs.push_back(get_cplx(c, "coefficient"));
    aw.validate();
    return aw;
  });
}

std::string recovery_to_json(const rayrecover::RayRecovery& rec) {
  json j;
  j["recovered"] = aw_json(rec.recovered);
  j["precision"] = rec.precision == Precision::Double ? "double" : "50-digit";
  j["validated_min"] = rec.validated_min;
  j["next_coeff_estimate"] = cplx(rec.next_coeff_estimate);
  j["depths"] = json::array();
  for (const auto& d : rec.report) {
    json r;
    r["index"] = d.index;
    r["fit_residual"] = d.fit_residual;
    r["condition"] = d.condition;
    r["cancellation_digits"] = d.cancellation_digits;
    r["correction_terms"] = d.correction_terms;
    j["depths"].push_back(r);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<Real50> sample_radii(const rayrecover::RecoverParams& params) {
  std::vector<Real50> out;
  for (double s : params.ladder) {
    out.push_back(Real50(s));
    out.push_back(Real50(s) + Real50(params.tau));
  }
  return out;
}

std::string samples_to_csv(const std::vector<SampleRow>& rows) {
  std::string out = "s,im_psi\n";
  for (const auto& r : rows) out += fmt(r.s) + "," + fmt(r.im_psi) + "\n";
  return out;
}

std::vector<SampleRow> samples_from_csv(const std::string& text) {
  std::vector<SampleRow> out;
  for (const auto& cells : csv_rows(text, 2, "samples")) {
    try {
      out.push_back({Real50(cells[0]), Real50(cells[1])});
    } catch (const std::exception&) {
      throw bad_input("samples", "not a number in row: " + cells[0] + "," + cells[1]);
    }
  }
  return out;
}

TableRaySampler::TableRaySampler(std::vector<SampleRow> rows, const Ray& ray, WaveNumber kappa, double s_min)
    : RaySampler(ray, kappa, s_min), rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(), [](const SampleRow& a, const SampleRow& b) { return a.s < b.s; });
}

Real50 TableRaySampler::im_psi(const Real50& s) const {
  const auto it =
      std::lower_bound(rows_.begin(), rows_.end(), s, [](const SampleRow& r, const Real50& v) { return r.s < v; });
  if (it == rows_.end() || it->s != s) throw bad_input("samples", "no tabulated sample at s = " + fmt(s));
  return it->im_psi;
}

// ---------------------------------------------------------------------------

std::string grid_to_csv(const planeops::PlaneGrid& grid, const std::vector<std::uint8_t>& flagged) {
  grid.validate();
  std::string out = "u,v,re,im\n";
  const int n = grid.nodes_per_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = std::size_t(i) * n + j;
      if (!flagged.empty() && flagged[k]) continue;
      const Complex v = grid.values.empty() ? Complex(0, 0) : grid.values[k];
      out += fmt(grid.u(i)) + "," + fmt(grid.u(j)) + "," + fmt(v.real()) + "," + fmt(v.imag()) + "\n";
    }
  return out;
}

std::string grid_header_json(const planeops::PlaneGrid& grid) {
  json j;
  j["base"] = vec(grid.frame.base);
  j["e1"] = vec(grid.frame.e1);
  j["e2"] = vec(grid.frame.e2);
  j["normal"] = vec(grid.frame.nu);
  j["half_extent"] = grid.half_extent;
  j["spacing"] = grid.spacing;
  j["nodes_per_side"] = grid.nodes_per_side();
  return j.dump(2) + "\n";
}

planeops::PlaneGrid grid_from_files(const std::string& header_json, const std::string& csv) {
  const json j = parse(header_json, "grid");
  planeops::PlaneGrid g = guarded("grid", [&] {
    planeops::PlaneGrid g;
    g.frame = {get_vec(j.at("base"), "base"), get_vec(j.at("e1"), "e1"), get_vec(j.at("e2"), "e2"),
               get_vec(j.at("normal"), "normal")};
    g.half_extent = j.at("half_extent").get<double>();
    g.spacing = j.at("spacing").get<double>();
    return g;
  });
  g.validate();
  const int n = g.nodes_per_side();
  g.values.assign(g.node_count(), Complex(0, 0));
  for (const auto& c : csv_rows(csv, 4, "grid")) {
    const double u = to_double(c[0], "grid"), v = to_double(c[1], "grid");
    const long i = std::lround((u + g.half_extent) / g.spacing), k = std::lround((v + g.half_extent) / g.spacing);
    if (i < 0 || i >= n || k < 0 || k >= n) throw bad_input("grid", "node outside the grid: " + c[0] + "," + c[1]);
    g.values[std::size_t(i) * n + k] = {to_double(c[2], "grid"), to_double(c[3], "grid")};
  }
  return g;
}

// ---------------------------------------------------------------------------

std::string farfield_to_csv(const std::vector<scattering::AmplitudeSample>& samples) {
  std::string out = "theta_x,theta_y,theta_z,thetap_x,thetap_y,thetap_z,re,im\n";
  for (const auto& a : samples) {
    for (double v : {a.theta.x, a.theta.y, a.theta.z, a.theta_prime.x, a.theta_prime.y, a.theta_prime.z})
      out += fmt(v) + ",";
    out += fmt(a.value.real()) + "," + fmt(a.value.imag()) + "\n";
  }
  return out;
}

std::string pipeline_report_json(const scattering::PipelineResult& r, double bandlimited_error) {
  json j;
  j["stages"] = json::array();
  for (const auto& s : r.stages) {
    json e;
    e["stage"] = s.stage;
    e["error_estimate"] = s.error_estimate;
    e["detail"] = s.detail;
    j["stages"].push_back(e);
  }
  j["born_norm"] = r.born_norm;
  j["born_warning"] = r.born_warning;
  j["band_radius"] = r.band_radius;
  j["voxel_spacing"] = r.voxel_spacing;
  j["voxels"] = r.v.size();
  j["amplitudes"] = r.amplitudes.size();
  if (bandlimited_error >= 0) j["bandlimited_error"] = bandlimited_error;
  return j.dump(2) + "\n";
}

fields::PotentialGrid estimate_as_grid(const scattering::PipelineResult& r) {
  const double h = r.voxel_spacing;
  double extent = 0;
  for (const auto& z : r.voxel_centers) extent = std::max({extent, std::abs(z.x), std::abs(z.y), std::abs(z.z)});
  const int m = int(std::lround(2 * extent / h)) + 1;
  fields::PotentialGrid g;
  g.n = m;
  g.corner = Vec3{1, 1, 1} * (-m * h / 2);
  g.size = Vec3{1, 1, 1} * (m * h);
  g.values.assign(g.voxel_count(), Complex(0, 0));
  auto idx = [&](double c) { return std::size_t(std::lround(c / h + (m - 1) / 2.0)); };
  for (std::size_t v = 0; v < r.v.size(); ++v) {
    const Vec3& z = r.voxel_centers[v];
    g.values[(idx(z.x) * m + idx(z.y)) * m + idx(z.z)] = r.v[v];
  }
  return g;
}

std::vector<std::string> emit_plot_data(const std::vector<Series>& series, const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw io_error("plot", "cannot create " + directory + ": " + ec.message());
  std::vector<std::string> paths;
  for (const auto& s : series) {
    std::string out;
    for (std::size_t c = 0; c < s.columns.size(); ++c) out += (c ? "," : "") + s.columns[c];
    out += "\n";
    for (const auto& row : s.rows) {
      if (row.size() != s.columns.size()) throw bad_input("plot", "row width does not match header in " + s.name);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!std::isfinite(row[c])) throw bad_input("plot", "non-finite value in " + s.name);
        out += (c ? "," : "") + fmt(row[c]);
      }
      out += "\n";
    }
    const std::string path = (std::filesystem::path(directory) / (s.name + ".csv")).string();
    write_file(path, out);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace helmrec::io
