#include "openmix/fsu.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "openmix/error.hpp"

namespace openmix {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

FsuReport fsu_from_features(const Matrix& features, std::span<const std::size_t> labels,
                            std::size_t k, std::size_t max_pairs_per_class, Rng& rng) {
  if (k < 2) throw UsageError("FSU needs at least two classes");
  if (labels.size() != features.rows()) throw DimensionError("FSU: one label per feature row");
  if (max_pairs_per_class == 0) throw UsageError("FSU: max_pairs_per_class must be positive");
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw DimensionError("FSU: label out of range");
    members[labels[i]].push_back(i);
  }
  FsuReport report;
  report.class_means = Matrix(k, features.cols());
  double intra_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& idx = members[c];
    if (idx.size() < 2) {
      throw UsageError("FSU: class " + std::to_string(c) + " has fewer than 2 samples");
    }
    auto mean = report.class_means.row(c);
    for (std::size_t i : idx) {
      auto row = features.row(i);
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(idx.size());

    const std::size_t n = idx.size();
    const std::size_t all_pairs = n * (n - 1) / 2;
    if (all_pairs <= max_pairs_per_class) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          intra_sum += distance(features.row(idx[a]), features.row(idx[b]));
        }
      }
      report.z_intra += all_pairs;
    } else {
      for (std::size_t p = 0; p < max_pairs_per_class; ++p) {
        const std::size_t a = rng.index(n);
        std::size_t b = rng.index(n - 1);
        if (b >= a) ++b;
        intra_sum += distance(features.row(idx[a]), features.row(idx[b]));
      }
      report.z_intra += max_pairs_per_class;
    }
  }
  double inter_sum = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a != b) inter_sum += distance(report.class_means.row(a), report.class_means.row(b));
    }
  }
  report.z_inter = k * (k - 1);
  report.pi_intra = intra_sum / static_cast<double>(report.z_intra);
  report.pi_inter = inter_sum / static_cast<double>(report.z_inter);
  report.pi_fsu = report.pi_inter > 0.0 ? report.pi_intra / report.pi_inter
                                        : std::numeric_limits<double>::quiet_NaN();
  return report;
}

FsuReport fsu(const MlpModel& model, const LabeledDataset& dataset,
              std::size_t max_pairs_per_class, Rng& rng) {
  const auto result = forward(model, dataset.features);
  return fsu_from_features(result.features, dataset.labels, dataset.num_classes,
                           max_pairs_per_class, rng);
}

std::string FsuReport::to_json() const {
  nlohmann::json j;
  j["pi_intra"] = pi_intra;
  j["pi_inter"] = pi_inter;
  j["pi_fsu"] = pi_fsu;
  j["z_intra"] = z_intra;
  j["z_inter"] = z_inter;
  auto means = nlohmann::json::array();
  for (std::size_t c = 0; c < class_means.rows(); ++c) {
    auto row = class_means.row(c);
    means.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["class_means"] = std::move(means);
  return j.dump(2) + "\n";
}

}  // namespace openmix
