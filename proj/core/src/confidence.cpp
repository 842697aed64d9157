#include "openmix/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "openmix/error.hpp"

namespace openmix {

std::string_view to_string(Scorer scorer) {
  switch (scorer) {
    case Scorer::msp: return "msp";
    case Scorer::neg_entropy: return "neg_entropy";
    case Scorer::max_logit: return "max_logit";
    case Scorer::energy: return "energy";
  }
  return "?";
}

Scorer parse_scorer(std::string_view name) {
  for (auto s : {Scorer::msp, Scorer::neg_entropy, Scorer::max_logit, Scorer::energy}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scorer '" + std::string(name) +
                    "'; expected one of {msp, neg_entropy, max_logit, energy}");
}

std::vector<EvalRecord> score_logits(const Matrix& logits, std::size_t k,
                                     const ScoreOptions& options,
                                     std::span<const std::size_t> labels) {
  if (k == 0 || logits.cols() < k || logits.cols() > k + 1) {
    throw DimensionError("scoring needs k or k+1 outputs, got " + std::to_string(logits.cols()) +
                         " for k = " + std::to_string(k));
  }
  if (!labels.empty() && labels.size() != logits.rows()) {
    throw DimensionError("label count does not match batch size");
  }
  const Matrix probs = softmax(logits);
  std::vector<EvalRecord> records(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto p = probs.row(i).first(k);
    auto z = logits.row(i).first(k);
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    double mass = 1.0;
    if (options.renormalize) {
      mass = 0.0;
      for (double v : p) mass += v;
    }
    double kappa = 0.0;
    switch (options.scorer) {
      case Scorer::msp:
        kappa = p[best] / mass;
        break;
      case Scorer::neg_entropy: {
        // Entropy needs a distribution, so the first k entries are always rescaled here.
        double total = 0.0;
        for (double v : p) total += v;
        double h = 0.0;
        for (double v : p) {
          const double q = v / total;
          if (q > 0.0) h -= q * std::log(q);
        }
        kappa = -h;
        break;
      }
      case Scorer::max_logit:
        kappa = *std::max_element(z.begin(), z.end());
        break;
      case Scorer::energy: {
        const double mx = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - mx);
        kappa = mx + std::log(sum);
        break;
      }
    }
    records[i].predicted = best;
    records[i].confidence = kappa;
    records[i].correct = !labels.empty() && labels[i] == best;
  }
  return records;
}

std::vector<EvalRecord> score(const MlpModel& model, const Matrix& batch, std::size_t k,
                              const ScoreOptions& options, std::span<const std::size_t> labels) {
  return score_logits(forward(model, batch).logits, k, options, labels);
}

std::vector<Decision> decide(std::span<const EvalRecord> records, DecisionRule rule) {
  std::vector<Decision> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(r.confidence >= rule.threshold ? Decision::accept : Decision::reject);
  }
  return out;
}

}  // namespace openmix
