#pragma once

// JSON and CSV exchange formats, plus plot-ready series. Output is
// deterministic: fixed key order, round-trip number formatting.

#include <string>
#include <vector>

#include "helmrec/awseries.hpp"
#include "helmrec/fields.hpp"
#include "helmrec/planeops.hpp"
#include "helmrec/rayrecover.hpp"
#include "helmrec/scattering.hpp"

namespace helmrec::io {

std::string read_file(const std::string& path);
/// Writes to a temporary next to `path` and renames, so a failed run leaves
/// no partial artifact.
void write_file(const std::string& path, const std::string& content);

/// %.17g, the shortest form that round-trips a double.
std::string fmt(double v);
std::string fmt(const Real50& v);

fields::Scene scene_from_json(const std::string& text);
std::string scene_to_json(const fields::Scene& scene);
std::string potential_to_json(const fields::PotentialGrid& grid);

std::string aw_to_json(const awseries::AWExpansion& aw);
awseries::AWExpansion aw_from_json(const std::string& text);

std::string recovery_to_json(const rayrecover::RayRecovery& rec);

// ---------------------------------------------------------------------------
// Offline samples: rows `s, im_psi` in 50-digit decimal.

struct SampleRow {
  Real50 s;
  Real50 im_psi;
};

/// The radii recover_coeffs evaluates: s_k and s_k + τ for every ladder entry.
std::vector<Real50> sample_radii(const rayrecover::RecoverParams& params);
std::string samples_to_csv(const std::vector<SampleRow>& rows);
std::vector<SampleRow> samples_from_csv(const std::string& text);

/// Serves tabulated samples; a radius that is not in the table is an error.
class TableRaySampler final : public awseries::RaySampler {
public:
  TableRaySampler(std::vector<SampleRow> rows, const Ray& ray, WaveNumber kappa, double s_min);
  Real50 im_psi(const Real50& s) const override;

private:
  std::vector<SampleRow> rows_;  // sorted by s
};

// ---------------------------------------------------------------------------
// Plane grids: rows `u, v, re, im` plus a JSON header with frame and spacing.

std::string grid_to_csv(const planeops::PlaneGrid& grid, const std::vector<std::uint8_t>& flagged = {});
std::string grid_header_json(const planeops::PlaneGrid& grid);
planeops::PlaneGrid grid_from_files(const std::string& header_json, const std::string& csv);

// ---------------------------------------------------------------------------

std::string farfield_to_csv(const std::vector<scattering::AmplitudeSample>& samples);
std::string pipeline_report_json(const scattering::PipelineResult& result, double bandlimited_error = -1);
/// The pipeline estimate as a PotentialGrid on the cube of inversion voxels.
fields::PotentialGrid estimate_as_grid(const scattering::PipelineResult& result);

// ---------------------------------------------------------------------------

struct Series {
  std::string name;                  // file stem
  std::vector<std::string> columns;  // header, e.g. {"s", "abs_err"}
  std::vector<std::vector<double>> rows;
};

/// One CSV per series in `directory`, named <name>.csv, header row first.
/// Returns the written paths.
std::vector<std::string> emit_plot_data(const std::vector<Series>& series, const std::string& directory);

}  // namespace helmrec::io
