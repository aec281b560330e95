#include <nsgeo/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nsgeo {

namespace {

std::vector<std::string> tokenize(const std::string& line, bool comma) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream ss(line);
  if (comma) {
    while (std::getline(ss, token, ',')) {
      // trim surrounding whitespace
      const auto b = token.find_first_not_of(" \t\r");
      const auto e = token.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? std::string() : token.substr(b, e - b + 1));
    }
  } else {
    while (ss >> token) out.push_back(token);
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return in;
}

// Header block lines look like "# key v1 v2 ...".
bool header_values(const std::string& line, const std::string& key, std::vector<double>& vals) {
  if (line.rfind("# " + key + " ", 0) != 0) return false;
  std::istringstream ss(line.substr(key.size() + 3));
  vals.clear();
  double v;
  while (ss >> v) vals.push_back(v);
  return true;
}

}  // namespace

LoadReport load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in = open_in(path);
  std::string line;
  // Header row (skipping comments/blank lines).
  do {
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path.string());
  } while (line.empty() || line[0] == '#');

  const bool comma = line.find(',') != std::string::npos;
  const std::vector<std::string> header = tokenize(line, comma);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("missing column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cx = col(options.x_col);
  const std::size_t cy = col(options.y_col);
  const std::size_t cv = col(options.value_col);

  LoadReport report;
  std::vector<Point> pts;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> tok = tokenize(line, comma);
    if (tok.size() <= std::max({cx, cy, cv})) {
      ++report.dropped_nonfinite;
      continue;
    }
    double x, y, v;
    if (!parse_double(tok[cx], x) || !parse_double(tok[cy], y) || !parse_double(tok[cv], v) ||
        !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(v)) {
      ++report.dropped_nonfinite;
      continue;
    }
    pts.push_back({x, y});
    vals.push_back(v);
  }
  if (pts.empty()) throw std::runtime_error("no usable observations in " + path.string());
  if (report.dropped_nonfinite > 0)
    report.warnings.push_back(std::to_string(report.dropped_nonfinite) +
                              " row(s) dropped (non-finite or unparseable)");

  // Average values at duplicated locations (tolerance 1e-9).
  std::vector<Point> out_pts;
  std::vector<double> out_vals;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < out_pts.size(); ++j) {
      if (distance(out_pts[j], pts[i]) < 1e-9) {
        out_vals[j] += vals[i];
        counts[j] += 1;
        merged = true;
        ++report.merged_duplicates;
        break;
      }
    }
    if (!merged) {
      out_pts.push_back(pts[i]);
      out_vals.push_back(vals[i]);
      counts.push_back(1);
    }
  }
  for (std::size_t j = 0; j < out_pts.size(); ++j)
    out_vals[j] /= static_cast<double>(counts[j]);
  if (report.merged_duplicates > 0)
    report.warnings.push_back(std::to_string(report.merged_duplicates) +
                              " duplicated location(s) averaged");

  report.data = Dataset(std::move(out_pts), std::move(out_vals));
  return report;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const LoadOptions& options) {
  std::ofstream out = open_out(path);
  out << options.x_col << '\t' << options.y_col << '\t' << options.value_col << '\n';
  for (std::size_t i = 0; i < data.size(); ++i)
    out << data.locations[i].x << '\t' << data.locations[i].y << '\t' << data.values[i] << '\n';
}

void write_grid(const std::filesystem::path& path, const GridData& data) {
  if (data.values.size() != data.grid.size())
    throw std::invalid_argument("write_grid: value count does not match grid dims");
  std::ofstream out = open_out(path);
  out << "# nsgeo grid\n";
  out << "# origin " << data.grid.origin.x << ' ' << data.grid.origin.y << '\n';
  out << "# cell " << data.grid.dx << ' ' << data.grid.dy << '\n';
  out << "# dims " << data.grid.nx << ' ' << data.grid.ny << '\n';
  for (std::size_t j = 0; j < data.grid.ny; ++j) {
    for (std::size_t i = 0; i < data.grid.nx; ++i) {
      out << data.values[data.grid.index(i, j)];
      out << (i + 1 < data.grid.nx ? '\t' : '\n');
    }
  }
}

GridData read_grid(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  Point origin{};
  double dx = 0.0, dy = 0.0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;
  std::vector<double> hv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_values(line, "origin", hv) && hv.size() == 2) origin = {hv[0], hv[1]};
      if (header_values(line, "cell", hv) && hv.size() == 2) {
        dx = hv[0];
        dy = hv[1];
      }
      if (header_values(line, "dims", hv) && hv.size() == 2) {
        nx = static_cast<std::size_t>(hv[0]);
        ny = static_cast<std::size_t>(hv[1]);
      }
      continue;
    }
    std::istringstream ss(line);
    double v;
    while (ss >> v) values.push_back(v);
  }
  if (nx == 0 || ny == 0) throw std::runtime_error("read_grid: missing dims header in " + path.string());
  if (values.size() != nx * ny)
    throw std::runtime_error("read_grid: value count does not match dims in " + path.string());
  return GridData(Grid(origin, dx, dy, nx, ny), std::move(values));
}

void write_anchors(const std::filesystem::path& path, const AnchorEstimates& estimates) {
  std::ofstream out = open_out(path);
  out << "# nsgeo anchors\n";
  out << "# epsilon " << estimates.epsilon << '\n';
  out << "# b " << estimates.b << '\n';
  out << "x\ty\tmean\tsigma\tlambda1\tlambda2\tpsi\tobjective\tconverged\tat_bound\n";
  for (std::size_t k = 0; k < estimates.anchors.size(); ++k) {
    const LocalFit& f = estimates.fits[k];
    out << estimates.anchors[k].x << '\t' << estimates.anchors[k].y << '\t' << estimates.means[k]
        << '\t' << f.sigma << '\t' << f.aniso.lambda1 << '\t' << f.aniso.lambda2 << '\t'
        << f.aniso.psi << '\t' << f.objective << '\t' << (f.converged ? 1 : 0) << '\t'
        << (f.at_bound ? 1 : 0) << '\n';
  }
}

AnchorEstimates read_anchors(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  AnchorEstimates est;
  std::string line;
  std::vector<double> hv;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_values(line, "epsilon", hv) && hv.size() == 1) est.epsilon = hv[0];
      if (header_values(line, "b", hv) && hv.size() == 1) est.b = hv[0];
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column names row
      continue;
    }
    std::istringstream ss(line);
    double x, y, mean, sigma, l1, l2, psi, objective;
    int converged, at_bound;
    if (!(ss >> x >> y >> mean >> sigma >> l1 >> l2 >> psi >> objective >> converged >> at_bound))
      throw std::runtime_error("read_anchors: malformed row in " + path.string());
    LocalFit f;
    f.x0 = {x, y};
    f.sigma = sigma;
    f.aniso = AnisotropyParams(l1, l2, psi);
    f.objective = objective;
    f.converged = converged != 0;
    f.at_bound = at_bound != 0;
    est.anchors.push_back({x, y});
    est.fits.push_back(f);
    est.means.push_back(mean);
  }
  if (est.anchors.empty()) throw std::runtime_error("read_anchors: no rows in " + path.string());
  return est;
}

void write_ellipses(const std::filesystem::path& path, const std::vector<Point>& anchors,
                    const std::vector<LocalFit>& fits) {
  if (anchors.size() != fits.size()) throw std::invalid_argument("write_ellipses: size mismatch");
  std::ofstream out = open_out(path);
  out << "x\ty\tlambda1\tlambda2\tpsi\n";
  for (std::size_t k = 0; k < anchors.size(); ++k)
    out << anchors[k].x << '\t' << anchors[k].y << '\t' << fits[k].aniso.lambda1 << '\t'
        << fits[k].aniso.lambda2 << '\t' << fits[k].aniso.psi << '\n';
}

void write_scores(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, ScoreReport>>& columns) {
  if (columns.empty()) throw std::invalid_argument("write_scores: no columns");
  std::ofstream out = open_out(path);
  out << std::setprecision(6);
  out << "metric";
  for (const auto& [name, _] : columns) out << '\t' << name;
  out << '\n';
  const auto row = [&](const char* name, auto get) {
    out << name;
    for (const auto& [_, r] : columns) out << '\t' << get(r);
    out << '\n';
  };
  row("mae", [](const ScoreReport& r) { return r.mae; });
  row("rmse", [](const ScoreReport& r) { return r.rmse; });
  row("nmse", [](const ScoreReport& r) { return r.nmse; });
  row("logs", [](const ScoreReport& r) { return r.logs; });
  row("logs_mean", [](const ScoreReport& r) { return r.logs_mean; });
  row("crps", [](const ScoreReport& r) { return r.crps; });
  out << "n";
  for (const auto& [_, r] : columns) out << '\t' << r.n;
  out << '\n';
}

void write_contours(const std::filesystem::path& path, const std::vector<ContourSet>& sets) {
  std::ofstream out = open_out(path);
  out << "center_x\tcenter_y\tlevel\tpolyline\tvertex\tx\ty\n";
  for (const ContourSet& set : sets) {
    for (std::size_t p = 0; p < set.polylines.size(); ++p) {
      const Polyline& line = set.polylines[p];
      for (std::size_t v = 0; v < line.vertices.size(); ++v) {
        out << set.center.x << '\t' << set.center.y << '\t' << set.level << '\t' << p << '\t' << v
            << '\t' << line.vertices[v].x << '\t' << line.vertices[v].y << '\n';
      }
    }
  }
}

}  // namespace nsgeo
