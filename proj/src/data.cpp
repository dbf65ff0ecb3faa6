#include "cpm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cpm/errors.hpp"

namespace cpm {
namespace {

Eigen::MatrixXd covariate_matrix(std::span<const RawSample> samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto p = samples.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(samples.front().z.size());
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(s.z.size()) != p)
      throw InvalidArgument("observation " + std::to_string(i + 1) + " has " + std::to_string(s.z.size()) +
                            " covariates, expected " + std::to_string(p));
    if (!std::isfinite(s.y)) throw InvalidArgument("observation " + std::to_string(i + 1) + " has non-finite y");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(s.z[static_cast<size_t>(j)]))
        throw InvalidArgument("observation " + std::to_string(i + 1) + " has a non-finite covariate");
      z(i, j) = s.z[static_cast<size_t>(j)];
    }
  }
  return z;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
      if (trim(line).empty()) continue;
      t.header = split_row(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    t.rows.push_back(split_row(line));
  }
  if (!have_header) throw IngestionError("'" + path.string() + "' is empty (header row required)");
  if (t.rows.empty()) throw IngestionError("'" + path.string() + "' has a header but no data rows");
  return t;
}

std::vector<size_t> column_indices(const CsvTable& t, const std::vector<std::string>& names) {
  std::vector<size_t> idx;
  for (const auto& name : names) {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw IngestionError("column '" + name + "' not found in header");
    idx.push_back(static_cast<size_t>(it - t.header.begin()));
  }
  return idx;
}

double parse_cell(const CsvTable& t, size_t row, size_t col) {
  const auto& cells = t.rows[row];
  const std::string& name = t.header[col];
  if (col >= cells.size() || cells[col].empty())
    throw IngestionError("row " + std::to_string(row + 1) + ", column '" + name + "': missing value");
  const std::string& s = cells[col];
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw IngestionError("row " + std::to_string(row + 1) + ", column '" + name + "': non-numeric value '" + s +
                         "'");
  return v;
}

}  // namespace

Eigen::Index CensoredDataset::num_left() const {
  return std::count(left.begin(), left.end(), std::uint8_t{1});
}

Eigen::Index CensoredDataset::num_right() const {
  return std::count(right.begin(), right.end(), std::uint8_t{1});
}

std::vector<Eigen::Index> OrdinalEncoding::category_counts() const {
  std::vector<Eigen::Index> counts(cuts.size(), 0);
  for (int k : category) ++counts[static_cast<size_t>(k)];
  return counts;
}

CensoredDataset make_uncensored(std::span<const RawSample> samples) {
  CensoredDataset d;
  d.covariates = covariate_matrix(samples);
  d.yprime.resize(static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) d.yprime(static_cast<Eigen::Index>(i)) = samples[i].y;
  d.left.assign(samples.size(), 0);
  d.right.assign(samples.size(), 0);
  return d;
}

CensoredDataset censor_transform(std::span<const RawSample> samples, double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper))
    throw InvalidBounds("censoring bounds require finite L < U");
  CensoredDataset d = make_uncensored(samples);
  d.bounds = Bounds{lower, upper};
  Eigen::Index interior = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double& y = d.yprime(i);
    if (y <= lower) {
      y = lower;
      d.left[static_cast<size_t>(i)] = 1;
    } else if (y >= upper) {
      y = upper;
      d.right[static_cast<size_t>(i)] = 1;
    } else {
      ++interior;
    }
  }
  if (interior == 0) throw DegenerateData("no observation lies strictly inside (L,U)");
  return d;
}

OrdinalEncoding encode_ordinal(const CensoredDataset& data) {
  const auto n = data.size();
  if (static_cast<size_t>(n) != data.left.size() || static_cast<size_t>(n) != data.right.size() ||
      data.covariates.rows() != n)
    throw InvalidArgument("encode_ordinal: inconsistent dataset dimensions");

  OrdinalEncoding enc;
  enc.cuts.assign(data.yprime.data(), data.yprime.data() + n);
  std::sort(enc.cuts.begin(), enc.cuts.end());
  enc.cuts.erase(std::unique(enc.cuts.begin(), enc.cuts.end()), enc.cuts.end());
  if (enc.cuts.size() < 2) throw DegenerateData("at least two distinct outcome values are required");

  enc.category.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto it = std::lower_bound(enc.cuts.begin(), enc.cuts.end(), data.yprime(i));
    enc.category[static_cast<size_t>(i)] = static_cast<int>(it - enc.cuts.begin());
  }
  enc.covariates = data.covariates;
  enc.bounds = data.bounds;
  if (data.bounds) {
    if (data.num_left() > 0) enc.left_cat = 0;
    if (data.num_right() > 0) enc.right_cat = enc.n_categories() - 1;
  }
  return enc;
}

std::vector<RawSample> read_csv(const std::filesystem::path& path, const std::string& outcome_column,
                                const std::vector<std::string>& covariate_columns) {
  const CsvTable t = load_csv(path);
  const size_t ycol = column_indices(t, {outcome_column}).front();
  const auto zcols = column_indices(t, covariate_columns);
  std::vector<RawSample> out;
  out.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    RawSample s;
    s.y = parse_cell(t, r, ycol);
    s.z.reserve(zcols.size());
    for (size_t c : zcols) s.z.push_back(parse_cell(t, r, c));
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::MatrixXd read_csv_columns(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  const CsvTable t = load_csv(path);
  const auto cols = column_indices(t, columns);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (size_t r = 0; r < t.rows.size(); ++r)
    for (size_t c = 0; c < cols.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_cell(t, r, cols[c]);
  return m;
}

}  // namespace cpm
