#include "simann/knn.hpp"

#include <algorithm>
#include <cmath>

#include "simann/util.hpp"

namespace simann {

std::vector<Neighbor> normalize_neighbors(std::span<const ScoredDoc> results,
                                          const std::string& self_id,
                                          std::size_t k,
                                          const InvertedIndex& index) {
  std::vector<Neighbor> neighbors;
  if (results.empty()) return neighbors;

  const double score_max = results.front().score;
  std::size_t start = results.front().doc_id == self_id ? 1 : 0;
  for (std::size_t i = start; i < results.size() && neighbors.size() < k; ++i) {
    const ScoredDoc& r = results[i];
    double distance = 1.0 - r.score / score_max;
    distance = std::clamp(distance, kMinDistance, 1.0);
    Neighbor n;
    n.doc_id = r.doc_id;
    n.doc_ordinal = r.doc_ordinal;
    n.score = r.score;
    n.distance = distance;
    n.weight = 1.0 / (distance * distance);
    n.labels = index.doc_labels[r.doc_ordinal];
    n.label_count = index.doc_label_count[r.doc_ordinal];
    neighbors.push_back(std::move(n));
  }
  return neighbors;
}

std::uint32_t predict_label_count(std::span<const Neighbor> neighbors,
                                  double multiplier) {
  if (neighbors.empty()) return 1;
  double weight_sum = 0.0;
  double weighted_counts = 0.0;
  for (const Neighbor& n : neighbors) {
    weight_sum += n.weight;
    weighted_counts += n.weight * static_cast<double>(n.label_count);
  }
  double n = std::floor(multiplier * (weighted_counts / weight_sum) + 0.5);
  return n < 1.0 ? 1u : static_cast<std::uint32_t>(n);
}

std::vector<std::pair<LabelCode, double>> vote_labels(
    std::span<const Neighbor> neighbors) {
  LabelSet candidates;
  for (const Neighbor& n : neighbors) candidates.insert(n.labels.begin(),
                                                        n.labels.end());
  std::vector<std::pair<LabelCode, double>> ranked;
  ranked.reserve(candidates.size());
  for (const LabelCode& code : candidates) {
    double vote = 0.0;
    for (const Neighbor& n : neighbors)
      vote += n.labels.count(code) ? n.weight : -n.weight;
    ranked.emplace_back(code, vote);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return code_less(a.first, b.first);
                   });
  return ranked;
}

Prediction annotate(const Record& record, const InvertedIndex& index,
                    const ExtractorConfig& config,
                    const AnnotateParams& params) {
  Prediction pred;
  pred.doc_id = record.id;

  TermStream stream = extract_record(record, config);
  std::vector<ScoredDoc> results = search(index, stream, params.k + 1);
  std::vector<Neighbor> neighbors =
      normalize_neighbors(results, record.id, params.k, index);
  if (neighbors.empty()) {
    pred.no_match = true;
    return pred;
  }

  pred.ranked = vote_labels(neighbors);
  std::uint32_t n = params.fixed_n
                        ? *params.fixed_n
                        : predict_label_count(neighbors, params.multiplier);
  n = std::min<std::uint32_t>(n, static_cast<std::uint32_t>(pred.ranked.size()));
  pred.n_predicted = n;
  pred.chosen.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) pred.chosen.push_back(pred.ranked[i].first);
  return pred;
}

std::vector<Prediction> annotate_batch_serial(const Corpus& corpus,
                                              const InvertedIndex& index,
                                              const ExtractorConfig& config,
                                              const AnnotateParams& params) {
  std::vector<Prediction> out;
  out.reserve(corpus.records.size());
  for (const Record& r : corpus.records)
    out.push_back(annotate(r, index, config, params));
  return out;
}

std::vector<Prediction> annotate_batch(const Corpus& corpus,
                                       const InvertedIndex& index,
                                       const ExtractorConfig& config,
                                       const AnnotateParams& params,
                                       int threads) {
  std::vector<Prediction> out(corpus.records.size());
  const int n_threads = effective_threads(threads);
#pragma omp parallel for schedule(dynamic, 16) num_threads(n_threads)
  for (std::ptrdiff_t i = 0;
       i < static_cast<std::ptrdiff_t>(corpus.records.size()); ++i)
    out[static_cast<std::size_t>(i)] = annotate(
        corpus.records[static_cast<std::size_t>(i)], index, config, params);
  return out;
}

}  // namespace simann
