#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simann/index.hpp"
#include "simann/textproc.hpp"
#include "simann/types.hpp"

namespace simann {

// Distances of 0 (a neighbor scoring equal to score_max) are clamped here so
// the inverse-square weight stays finite while still dominating the vote.
inline constexpr double kMinDistance = 1e-6;

struct Neighbor {
  std::string doc_id;
  std::uint32_t doc_ordinal = 0;
  double score = 0.0;
  double distance = 0.0;  // clamp(1 - score/score_max, kMinDistance, 1)
  double weight = 0.0;    // 1 / distance^2
  LabelSet labels;
  std::uint32_t label_count = 0;
};

struct Prediction {
  std::string doc_id;
  std::vector<std::pair<LabelCode, double>> ranked;  // vote desc, code asc
  std::uint32_t n_predicted = 0;
  std::vector<LabelCode> chosen;  // first n_predicted of ranked
  bool no_match = false;          // no kept query terms or no neighbors
};

// Turns raw retrieval results into weighted neighbors. When the top result is
// the query document itself it is dropped and only donates score_max;
// otherwise the top result is kept and defines score_max. At most k neighbors.
std::vector<Neighbor> normalize_neighbors(std::span<const ScoredDoc> results,
                                          const std::string& self_id,
                                          std::size_t k,
                                          const InvertedIndex& index);

// round(multiplier * weighted mean of neighbor label counts), half-up,
// never below 1.
std::uint32_t predict_label_count(std::span<const Neighbor> neighbors,
                                  double multiplier);

// vote(c) = sum of weights of neighbors labeled c minus sum of weights of
// neighbors not labeled c. Ordered by vote descending, ties by code.
std::vector<std::pair<LabelCode, double>> vote_labels(
    std::span<const Neighbor> neighbors);

struct AnnotateParams {
  std::size_t k = 30;
  double multiplier = 1.0;
  std::optional<std::uint32_t> fixed_n;
};

Prediction annotate(const Record& record, const InvertedIndex& index,
                    const ExtractorConfig& config,
                    const AnnotateParams& params);

std::vector<Prediction> annotate_batch_serial(const Corpus& corpus,
                                              const InvertedIndex& index,
                                              const ExtractorConfig& config,
                                              const AnnotateParams& params);

// OpenMP over records; output order matches corpus order.
std::vector<Prediction> annotate_batch(const Corpus& corpus,
                                       const InvertedIndex& index,
                                       const ExtractorConfig& config,
                                       const AnnotateParams& params,
                                       int threads);

}  // namespace simann
