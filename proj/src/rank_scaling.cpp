#include "gcvar/rank_scaling.hpp"

#include "gcvar/errors.hpp"
#include "gcvar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gcvar {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

bool constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

void validate(const Panel& panel) {
  if (panel.rows() < 4) throw InputError("panel needs at least 4 observations");
  if (panel.cols() < 2) throw InputError("panel needs at least 2 variables");
  if (static_cast<Index>(panel.names.size()) != panel.cols())
    throw InputError("panel has " + std::to_string(panel.names.size()) + " names for " +
                     std::to_string(panel.cols()) + " columns");
  for (std::size_t a = 0; a < panel.names.size(); ++a)
    for (std::size_t b = a + 1; b < panel.names.size(); ++b)
      if (panel.names[a] == panel.names[b]) throw InputError("duplicate column name '" + panel.names[a] + "'");
  if (!panel.values.allFinite()) throw InputError("panel contains missing or non-finite values");
  for (Index j = 0; j < panel.cols(); ++j) {
    const auto col = panel.values.col(j);
    if (constant({col.data(), static_cast<std::size_t>(col.size())}))
      throw InputError("column '" + panel.names[static_cast<std::size_t>(j)] +
                       "' has fewer than two distinct values");
  }
}

Panel make_panel(Eigen::MatrixXd values, std::vector<std::string> names) {
  if (names.empty())
    for (Index j = 0; j < values.cols(); ++j) names.push_back("X" + std::to_string(j + 1));
  Panel panel{std::move(values), std::move(names)};
  validate(panel);
  return panel;
}

Panel difference_columns(const Panel& panel, const std::vector<std::string>& columns) {
  if (columns.empty()) return panel;
  std::vector<bool> diff(static_cast<std::size_t>(panel.cols()), false);
  for (const auto& name : columns) {
    const auto it = std::find(panel.names.begin(), panel.names.end(), name);
    if (it == panel.names.end()) throw InputError("unknown column to difference: " + name);
    diff[static_cast<std::size_t>(it - panel.names.begin())] = true;
  }
  const Index n = panel.rows();
  Eigen::MatrixXd out(n - 1, panel.cols());
  for (Index j = 0; j < panel.cols(); ++j) {
    if (diff[static_cast<std::size_t>(j)])
      out.col(j) = panel.values.col(j).tail(n - 1) - panel.values.col(j).head(n - 1);
    else
      out.col(j) = panel.values.col(j).tail(n - 1);
  }
  return make_panel(std::move(out), panel.names);
}

Panel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty input file " + path.string());
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto names = split_csv_line(line);
  std::vector<double> data;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != names.size())
      throw InputError("row " + std::to_string(rows + 2) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(names.size()));
    for (const auto& f : fields) {
      double v = 0.0;
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      if (!f.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (f.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw InputError("invalid or missing value '" + f + "' in row " + std::to_string(rows + 2));
      data.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<Index>(names.size());
  Eigen::MatrixXd values(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) values(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  return make_panel(std::move(values), names);
}

void write_panel_csv(const Panel& panel, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t j = 0; j < panel.names.size(); ++j) out << (j ? "," : "") << panel.names[j];
  out << '\n';
  for (Index i = 0; i < panel.rows(); ++i) {
    for (Index j = 0; j < panel.cols(); ++j) out << (j ? "," : "") << format_double(panel.values(i, j));
    out << '\n';
  }
  write_text(path, out.str());
}

Eigen::MatrixXd stack_lags(const Eigen::MatrixXd& values, int lags) {
  if (lags < 0) throw InputError("lag order must be nonnegative");
  const Index n = values.rows();
  const Index k = values.cols();
  const Index rows = std::max<Index>(0, n - lags);
  Eigen::MatrixXd out(rows, (lags + 1) * k);
  for (int l = 0; l <= lags; ++l) out.middleCols(l * k, k) = values.middleRows(lags - l, rows);
  return out;
}

LaggedDesign build_lagged(const Panel& panel, int lags) {
  if (lags < 0) throw InputError("lag order must be nonnegative");
  if (lags >= panel.rows() - 3) throw InputError("insufficient sample for lag order");
  return build_lagged_segments(panel, {{0, panel.rows()}}, lags);
}

LaggedDesign build_lagged_segments(const Panel& panel,
                                   const std::vector<std::pair<Index, Index>>& ranges, int lags) {
  if (lags < 0) throw InputError("lag order must be nonnegative");
  const Index k = panel.cols();
  Index total = 0;
  for (const auto& [b, e] : ranges) total += std::max<Index>(0, e - b - lags);
  LaggedDesign design;
  design.lags = lags;
  design.block_size = k;
  design.values.resize(total, (lags + 1) * k);
  Index at = 0;
  for (const auto& [b, e] : ranges) {
    if (e - b <= lags) continue;
    const Eigen::MatrixXd block = stack_lags(panel.values.middleRows(b, e - b), lags);
    design.values.middleRows(at, block.rows()) = block;
    at += block.rows();
  }
  for (int l = 0; l <= lags; ++l)
    for (const auto& name : panel.names) design.names.push_back(name + "_l" + std::to_string(l));
  return design;
}

std::vector<double> mid_ranks(std::span<const double> x) {
  const std::size_t m = x.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && x[idx[j + 1]] == x[idx[i]]) ++j;
    // Positions i..j (0-based) share the rank ((i+1) + (j+1)) / 2.
    const double r = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("spearman_rho: length mismatch");
  if (x.size() < 2) throw InputError("spearman_rho needs at least 2 observations");
  if (constant(x) || constant(y)) throw NumericalError("zero rank variance");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  const double m = static_cast<double>(x.size());
  const double centre = 0.5 * (m + 1.0);
  double s = 0.0;
  for (std::size_t t = 0; t < rx.size(); ++t) s += (rx[t] - centre) * (ry[t] - centre);
  return 12.0 * s / (m * m * m - m);
}

double rho_to_correlation(double rho) { return 2.0 * std::sin(std::numbers::pi / 6.0 * rho); }

Eigen::MatrixXd average_blocks(const Eigen::MatrixXd& sigma, Index block_size) {
  const Index k = block_size;
  const Index blocks = sigma.rows() / k;
  Eigen::MatrixXd out(sigma.rows(), sigma.cols());
  for (Index d = 0; d < blocks; ++d) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(k, k);
    for (Index b = 0; b + d < blocks; ++b) avg += sigma.block(b * k, (b + d) * k, k, k);
    avg /= static_cast<double>(blocks - d);
    if (d == 0) avg = symmetrized(avg);
    for (Index b = 0; b + d < blocks; ++b) {
      out.block(b * k, (b + d) * k, k, k) = avg;
      out.block((b + d) * k, b * k, k, k) = avg.transpose();
    }
  }
  return out;
}

ScalingMatrix scaling_matrix(const LaggedDesign& design) {
  const Index n = design.values.rows();
  const Index d = design.values.cols();
  if (n < 4) throw InputError("insufficient sample for lag order");
  // Centred ranks; the Spearman matrix is then one Gram product.
  Eigen::MatrixXd centred(n, d);
  const double centre = 0.5 * static_cast<double>(n + 1);
  for (Index j = 0; j < d; ++j) {
    const auto col = design.values.col(j);
    const std::span<const double> x{col.data(), static_cast<std::size_t>(n)};
    if (constant(x)) throw NumericalError("zero rank variance");
    const auto r = mid_ranks(x);
    for (Index t = 0; t < n; ++t) centred(t, j) = r[static_cast<std::size_t>(t)] - centre;
  }
  const double nn = static_cast<double>(n);
  Eigen::MatrixXd rho = (centred.transpose() * centred) * (12.0 / (nn * nn * nn - nn));
  Eigen::MatrixXd sigma(d, d);
  for (Index j = 0; j < d; ++j) {
    sigma(j, j) = 1.0;
    for (Index i = 0; i < j; ++i) {
      const double v = rho_to_correlation(std::clamp(rho(i, j), -1.0, 1.0));
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  ScalingMatrix out;
  out.sigma = average_blocks(sigma, design.block_size);
  out.sigma.diagonal().setOnes();
  out.block_size = design.block_size;
  out.lags = design.lags;
  return out;
}

Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& sigma, double floor) {
  if (!(floor > 0.0)) throw InputError("eigenvalue floor must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.eigenvalues().minCoeff() >= floor) return sigma;
  Eigen::MatrixXd out = sigma;
  double target = floor;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(target);
    Eigen::MatrixXd rebuilt = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::VectorXd scale = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
    out = symmetrized(scale.asDiagonal() * rebuilt * scale.asDiagonal());
    out.diagonal().setOnes();
    const double low = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
    if (low >= floor) return out;
    // Rescaling by the diagonal shrinks the spectrum; aim higher next time.
    target *= 2.0;
  }
  throw NumericalError("psd repair did not reach the eigenvalue floor");
}

ScalingMatrix psd_repair(const ScalingMatrix& sigma, double floor) {
  ScalingMatrix out = sigma;
  out.sigma = psd_repair(sigma.sigma, floor);
  return out;
}

}  // namespace gcvar
