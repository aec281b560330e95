#pragma once

#include <nsgeo/contours.hpp>
#include <nsgeo/estimation.hpp>
#include <nsgeo/metrics.hpp>
#include <nsgeo/variogram.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nsgeo {

/// Column names of the delimited observation file (header row required;
/// comma or whitespace separated).
struct LoadOptions {
  std::string x_col = "x";
  std::string y_col = "y";
  std::string value_col = "value";
};

struct LoadReport {
  Dataset data;
  std::size_t dropped_nonfinite = 0;
  std::size_t merged_duplicates = 0;
  std::vector<std::string> warnings;
};

/// Reads observations from a delimited text file. Rows with non-finite or
/// unparseable coordinates/values are dropped with a count warning; locations
/// duplicated within 1e-9 are averaged with a warning.
LoadReport load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const LoadOptions& options = {});

/// Grid rasters as delimited text with a header block (origin, cell, dims);
/// values row-major from the origin, one grid row per line.
void write_grid(const std::filesystem::path& path, const GridData& data);
GridData read_grid(const std::filesystem::path& path);

/// Anchor-point parameter table; round-trips raw estimates exactly (1e-12).
void write_anchors(const std::filesystem::path& path, const AnchorEstimates& estimates);
AnchorEstimates read_anchors(const std::filesystem::path& path);

/// Per-anchor ellipse rows (center, lambda1, lambda2, psi) for overlay plots.
void write_ellipses(const std::filesystem::path& path, const std::vector<Point>& anchors,
                    const std::vector<LocalFit>& fits);

/// Score table mirroring the external-validation layout: one metric per row,
/// one column per model.
void write_scores(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, ScoreReport>>& columns);

struct ContourSet {
  Point center;
  double level = 0.0;
  std::vector<Polyline> polylines;
};

void write_contours(const std::filesystem::path& path, const std::vector<ContourSet>& sets);

}  // namespace nsgeo
