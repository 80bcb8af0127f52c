#include "counterpoint/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "counterpoint/error.hpp"

namespace counterpoint {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  double v = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  const std::string where = "line " + std::to_string(line) + ", column '" + column + "'";
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::NonNumericCell, where + ": '" + cell + "' is not a number");
  }
  if (v < 0) throw Error(ErrorKind::NonNumericCell, where + ": negative count " + cell);
  return v;
}

}  // namespace

ObservationSet load_observations(std::istream& in, const CounterNamespace& ns, std::string run_id,
                                 const LoadOptions& options) {
  ObservationSet obs;
  obs.run_id = std::move(run_id);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::TooFewSamples, "observation file '" + obs.run_id + "' is empty");

  std::vector<std::optional<std::size_t>> column_of(ns.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == 0 && header[c] == "t") continue;
    auto idx = ns.find(header[c]);
    if (!idx) {
      obs.warnings.push_back("ignoring unmodeled column '" + header[c] + "'");
      continue;
    }
    if (column_of[*idx]) throw Error(ErrorKind::InvalidArgument, "duplicate column '" + header[c] + "'");
    column_of[*idx] = c;
  }
  std::vector<std::string> keep;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (column_of[i]) {
      keep.push_back(ns.name(i));
    } else {
      obs.projected_out.push_back(ns.name(i));
    }
  }
  if (!obs.projected_out.empty()) {
    if (!options.project) {
      std::string names;
      for (const auto& n : obs.projected_out) names += (names.empty() ? "" : ", ") + n;
      throw Error(ErrorKind::MissingCounter, "observations lack counter(s): " + names);
    }
    obs.warnings.push_back("projected out " + std::to_string(obs.projected_out.size()) + " missing counter(s)");
  }
  obs.ns = ns.restricted_to(keep);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (column_of[i]) cols.push_back(*column_of[i]);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::NonNumericCell, "line " + std::to_string(line_no) + " has " +
                                                 std::to_string(cells.size()) + " cells, header has " +
                                                 std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(cols.size());
    for (auto c : cols) row.push_back(parse_cell(cells[c], line_no, header[c]));
    obs.samples.push_back(std::move(row));
  }
  if (obs.samples.size() < 2) {
    throw Error(ErrorKind::TooFewSamples, "'" + obs.run_id + "' has " + std::to_string(obs.samples.size()) +
                                              " sample(s); at least 2 are needed");
  }
  return obs;
}

ObservationSet load_observations(const std::filesystem::path& path, const CounterNamespace& ns,
                                 const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return load_observations(in, ns, path.stem().string(), options);
}

Moments mean_and_covariance(const Matrix& samples) {
  const std::size_t m = samples.size();
  if (m < 2) throw Error(ErrorKind::TooFewSamples, "covariance needs at least 2 samples");
  const std::size_t n = samples.front().size();
  for (const auto& row : samples) {
    if (row.size() != n) throw Error(ErrorKind::DimensionMismatch, "ragged sample matrix");
  }
  // Accumulate deviations from the first row: identical rows give that row
  // back exactly, and large offsets do not swamp the variance.
  const std::vector<double>& origin = samples.front();
  std::vector<double> shift(n, 0.0);
  for (const auto& row : samples) {
    for (std::size_t j = 0; j < n; ++j) shift[j] += row[j] - origin[j];
  }
  for (auto& x : shift) x /= static_cast<double>(m);
  Moments out;
  out.mean.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.mean[j] = origin[j] + shift[j];
  out.covariance.assign(n, std::vector<double>(n, 0.0));
  for (const auto& row : samples) {
    for (std::size_t i = 0; i < n; ++i) {
      const double di = (row[i] - origin[i]) - shift[i];
      if (di == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.covariance[i][j] += di * ((row[j] - origin[j]) - shift[j]);
    }
  }
  out.mean_covariance.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double c = 0.5 * (out.covariance[i][j] + out.covariance[j][i]) / static_cast<double>(m - 1);
      out.covariance[i][j] = out.covariance[j][i] = c;
      out.mean_covariance[i][j] = out.mean_covariance[j][i] = c / static_cast<double>(m);
    }
  }
  return out;
}

Moments mean_and_covariance(const ObservationSet& obs) { return mean_and_covariance(obs.samples); }

double chi_square_quantile(unsigned dof, double p) {
  if (dof == 0) throw Error(ErrorKind::InvalidArgument, "chi-square needs at least one degree of freedom");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "probability must lie in (0, 1)");
  const double k = dof / 2.0;
  auto cdf = [k](double q) { return boost::math::gamma_p(k, q / 2.0); };
  double lo = 0.0, hi = std::max(1.0, 2.0 * dof);
  while (cdf(hi) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Eigensystem eigendecompose(const Matrix& sym) {
  const std::size_t n = sym.size();
  double scale = 0.0;
  for (const auto& row : sym) {
    if (row.size() != n) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
    for (double x : row) scale = std::max(scale, std::abs(x));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(sym[i][j] - sym[j][i]) > 1e-12 * (1.0 + scale)) {
        throw Error(ErrorKind::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) + ") differ");
      }
    }
  }
  Matrix a = sym;
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a[i][i] * a[i][i];
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off == 0.0 || off <= 1e-30 * diag) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  Eigensystem out;
  for (auto k : order) {
    out.values.push_back(std::max(0.0, a[k][k]));
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = v[i][k];
    out.vectors.push_back(std::move(e));
  }
  return out;
}

bool ConfidenceRegion::contains(const std::vector<double>& point, double tolerance) const {
  if (point.size() != center.size()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from region");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) proj += axes[i][j] * (point[j] - center[j]);
    if (std::abs(proj) > half_lengths[i] + tolerance) return false;
  }
  return true;
}

double ConfidenceRegion::volume() const {
  double v = 1.0;
  for (double h : half_lengths) v *= 2.0 * h;
  return v;
}

ConfidenceRegion build_confidence_region(const ObservationSet& obs, const RegionOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (options.variance_floor < 0.0) throw Error(ErrorKind::InvalidArgument, "variance floor must be non-negative");
  Moments mom = mean_and_covariance(obs);
  const std::size_t n = mom.mean.size();
  ConfidenceRegion r;
  r.ns = obs.ns;
  r.center = mom.mean;
  r.alpha = options.alpha;
  r.samples = obs.sample_count();
  r.mode = options.mode;

  Eigensystem eig;
  if (options.mode == CovarianceMode::Independent) {
    for (std::size_t i = 0; i < n; ++i) {
      eig.values.push_back(std::max(0.0, mom.mean_covariance[i][i]));
      std::vector<double> e(n, 0.0);
      e[i] = 1.0;
      eig.vectors.push_back(std::move(e));
    }
  } else {
    eig = eigendecompose(mom.mean_covariance);
  }
  for (auto& l : eig.values) l = std::max(l, options.variance_floor);

  unsigned dof = static_cast<unsigned>(n);
  if (options.effective_rank_dof) {
    const double top = eig.values.empty() ? 0.0 : *std::max_element(eig.values.begin(), eig.values.end());
    dof = static_cast<unsigned>(
        std::count_if(eig.values.begin(), eig.values.end(), [&](double l) { return l > 1e-12 * top && l > 0.0; }));
  }
  r.dof = std::max(1u, dof);
  r.chi_square = chi_square_quantile(r.dof, 1.0 - options.alpha);
  r.eigenvalues = eig.values;
  r.axes = std::move(eig.vectors);
  for (double l : r.eigenvalues) r.half_lengths.push_back(std::sqrt(l * r.chi_square));
  return r;
}

}  // namespace counterpoint
