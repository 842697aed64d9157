#include "openmix/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "openmix/error.hpp"
#include "openmix/io.hpp"

namespace openmix {

void LabeledDataset::validate() const {
  if (labels.size() != features.rows()) {
    throw InvariantError("dataset has " + std::to_string(features.rows()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  for (std::size_t y : labels) {
    if (y >= num_classes) {
      throw InvariantError("label " + std::to_string(y) + " is not below k = " +
                           std::to_string(num_classes));
    }
  }
  if (!features.all_finite()) throw InvariantError("dataset contains non-finite features");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out{features.gather_rows(indices), {}, num_classes};
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels[i]);
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t y : labels) ++counts[y];
  return counts;
}

LabeledDataset gen_gaussian_blobs(std::size_t k, std::size_t n_per_class, std::size_t d,
                                  const Matrix& centers, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw ParameterError("blob sigma must be positive");
  if (centers.rows() != k || centers.cols() != d) {
    throw DimensionError("centers must be " + std::to_string(k) + "x" + std::to_string(d));
  }
  LabeledDataset ds{Matrix(k * n_per_class, d), {}, k};
  ds.labels.reserve(k * n_per_class);
  std::size_t row = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
      for (std::size_t j = 0; j < d; ++j) ds.features(row, j) = rng.normal(centers(c, j), sigma);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

Matrix triangle_centers(double side) {
  const double radius = side / std::sqrt(3.0);
  Matrix centers(3, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * static_cast<double>(c) / 3.0;
    centers(c, 0) = radius * std::cos(angle);
    centers(c, 1) = radius * std::sin(angle);
  }
  return centers;
}

std::string_view to_string(OutlierFamily family) {
  switch (family) {
    case OutlierFamily::gaussian_noise: return "gaussian_noise";
    case OutlierFamily::rademacher: return "rademacher";
    case OutlierFamily::annulus_blob: return "annulus_blob";
    case OutlierFamily::held_out_class: return "held_out_class";
  }
  return "?";
}

OutlierFamily parse_outlier_family(std::string_view name) {
  for (auto f : {OutlierFamily::gaussian_noise, OutlierFamily::rademacher,
                 OutlierFamily::annulus_blob, OutlierFamily::held_out_class}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown outlier family '" + std::string(name) +
                    "'; expected one of {gaussian_noise, rademacher, annulus_blob, held_out_class}");
}

namespace {

std::vector<double> center_or_origin(const std::vector<double>& center, std::size_t d) {
  if (center.empty()) return std::vector<double>(d, 0.0);
  if (center.size() != d) throw DimensionError("outlier center has wrong dimension");
  return center;
}

}  // namespace

OutlierSet gen_outliers(OutlierFamily family, std::size_t m, std::size_t d,
                        const OutlierParams& params, Rng& rng) {
  if (m == 0) throw ParameterError("outlier count must be positive");
  if (d == 0) throw ParameterError("outlier dimension must be positive");
  OutlierSet out{Matrix(m, d)};
  switch (family) {
    case OutlierFamily::gaussian_noise: {
      if (!(params.scale > 0.0)) throw ParameterError("gaussian_noise scale must be positive");
      const auto c = center_or_origin(params.center, d);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) out.features(i, j) = rng.normal(c[j], params.scale);
      }
      break;
    }
    case OutlierFamily::rademacher: {
      for (double& v : out.features.data()) {
        v = (rng.next_u64() >> 63) ? params.scale : -params.scale;
      }
      break;
    }
    case OutlierFamily::annulus_blob: {
      if (!(params.r_inner >= 0.0) || !(params.r_inner < params.r_outer)) {
        throw ParameterError("annulus requires 0 <= r_inner < r_outer");
      }
      const auto c = center_or_origin(params.center, d);
      const double dd = static_cast<double>(d);
      const double lo = std::pow(params.r_inner, dd);
      const double hi = std::pow(params.r_outer, dd);
      std::vector<double> dir(d);
      for (std::size_t i = 0; i < m; ++i) {
        double norm = 0.0;
        do {
          norm = 0.0;
          for (double& v : dir) {
            v = rng.normal();
            norm += v * v;
          }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        // Radius CDF ∝ r^d gives a uniform density over the shell volume.
        double r = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / dd);
        r = std::clamp(r, params.r_inner, params.r_outer);
        for (std::size_t j = 0; j < d; ++j) out.features(i, j) = c[j] + r * dir[j] / norm;
      }
      break;
    }
    case OutlierFamily::held_out_class: {
      const Matrix& extra = params.extra_centers;
      if (extra.rows() == 0 || extra.cols() != d) {
        throw ParameterError("held_out_class needs extra centers of dimension " + std::to_string(d));
      }
      if (!(params.extra_sigma > 0.0)) throw ParameterError("held_out_class sigma must be positive");
      for (std::size_t e = 0; e < extra.rows(); ++e) {
        for (std::size_t c = 0; c < params.id_centers.rows(); ++c) {
          if (params.id_centers.cols() == d &&
              std::equal(extra.row(e).begin(), extra.row(e).end(), params.id_centers.row(c).begin())) {
            throw ParameterError("held-out center " + std::to_string(e) +
                                 " coincides with an in-distribution center");
          }
        }
      }
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t e = i % extra.rows();
        for (std::size_t j = 0; j < d; ++j) {
          out.features(i, j) = rng.normal(extra(e, j), params.extra_sigma);
        }
      }
      break;
    }
  }
  return out;
}

SplitIndices split_indices(const LabeledDataset& ds, double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  SplitIndices out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.size() < 2) {
      throw UsageError("class " + std::to_string(c) + " has fewer than 2 samples; cannot stratify");
    }
    rng.shuffle(idx);
    auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(idx.size()) * test_fraction + 0.5));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTestSplit split(const LabeledDataset& ds, double test_fraction, Rng& rng) {
  const auto idx = split_indices(ds, test_fraction, rng);
  return {ds.subset(idx.train), ds.subset(idx.test)};
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ParameterError("batch_size must be at least 1");
  const auto order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> out;
  out.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

namespace {

struct CsvRows {
  std::vector<std::vector<std::string_view>> cells;
  std::vector<std::size_t> line_numbers;
};

CsvRows tokenize(std::string_view text) {
  CsvRows rows;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = line.find(',', pos);
      cells.push_back(trim(line.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " cells, found " +
                       std::to_string(cells.size()), line_no);
    }
    rows.cells.push_back(std::move(cells));
    rows.line_numbers.push_back(line_no);
  }
  if (rows.cells.empty()) throw ParseError("empty CSV input", 0);
  return rows;
}

double numeric_cell(std::string_view cell, std::size_t line) {
  auto v = parse_double(cell);
  if (!v) throw ParseError("non-numeric cell '" + std::string(cell) + "'", line);
  if (!std::isfinite(*v)) throw ParseError("non-finite cell '" + std::string(cell) + "'", line);
  return *v;
}

std::string row_text(std::span<const double> row) {
  std::string s;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) s += ',';
    s += format_double(row[j]);
  }
  return s;
}

}  // namespace

LabeledDataset parse_labeled_csv(std::string_view text) {
  const auto rows = tokenize(text);
  const std::size_t width = rows.cells.front().size();
  if (width < 2) throw ParseError("labeled CSV needs at least one feature column and a label", 1);
  LabeledDataset ds{Matrix(rows.cells.size(), width - 1), {}, 0};
  ds.labels.reserve(rows.cells.size());
  for (std::size_t i = 0; i < rows.cells.size(); ++i) {
    const auto& cells = rows.cells[i];
    const std::size_t line = rows.line_numbers[i];
    for (std::size_t j = 0; j + 1 < width; ++j) ds.features(i, j) = numeric_cell(cells[j], line);
    std::string_view label = cells.back();
    long long y = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), y);
    if (ec != std::errc() || ptr != label.data() + label.size() || label.empty()) {
      throw ParseError("label '" + std::string(label) + "' is not an integer", line);
    }
    if (y < 0) throw ParseError("negative label " + std::to_string(y), line);
    ds.labels.push_back(static_cast<std::size_t>(y));
    ds.num_classes = std::max(ds.num_classes, static_cast<std::size_t>(y) + 1);
  }
  return ds;
}

OutlierSet parse_unlabeled_csv(std::string_view text) {
  const auto rows = tokenize(text);
  const std::size_t width = rows.cells.front().size();
  OutlierSet out{Matrix(rows.cells.size(), width)};
  for (std::size_t i = 0; i < rows.cells.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out.features(i, j) = numeric_cell(rows.cells[i][j], rows.line_numbers[i]);
    }
  }
  return out;
}

LabeledDataset load_csv(const std::filesystem::path& path) { return parse_labeled_csv(read_file(path)); }

OutlierSet load_csv_unlabeled(const std::filesystem::path& path) {
  return parse_unlabeled_csv(read_file(path));
}

std::string to_csv(const LabeledDataset& ds) {
  std::string s;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    s += row_text(ds.features.row(i));
    s += ',';
    s += std::to_string(ds.labels[i]);
    s += '\n';
  }
  return s;
}

std::string to_csv(const OutlierSet& outliers) {
  std::string s;
  for (std::size_t i = 0; i < outliers.size(); ++i) {
    s += row_text(outliers.features.row(i));
    s += '\n';
  }
  return s;
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(ds));
}

void save_csv(const OutlierSet& outliers, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(outliers));
}

}  // namespace openmix
