#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simann/index.hpp"
#include "simann/knn.hpp"
#include "simann/types.hpp"

namespace simann {

// One synthetic document per label, aggregating the term streams of every
// document carrying that label (counts summed).
struct LabelProfile {
  LabelCode label;
  TermStream terms;
  std::uint64_t n_members = 0;
};

std::vector<LabelProfile> build_profiles_serial(
    std::span<const TermStream> streams, std::span<const LabelSet> labels);
std::vector<LabelProfile> build_profiles(std::span<const TermStream> streams,
                                         std::span<const LabelSet> labels,
                                         int threads);

// Indexes profiles as documents whose id is the label code and whose label
// set is the singleton {label}. DF filtering is recomputed over profiles.
InvertedIndex build_profile_index(std::span<const LabelProfile> profiles,
                                  std::uint32_t min_df, double max_df_ratio,
                                  int threads = 1);

// Retrieves the top k profiles and votes over their singleton label sets;
// chosen is the top fixed_n labels.
Prediction annotate_profiles(const Record& record,
                             const InvertedIndex& profile_index,
                             const ExtractorConfig& config, std::size_t k,
                             std::uint32_t fixed_n);

std::vector<Prediction> annotate_profiles_batch(const Corpus& corpus,
                                                const InvertedIndex& profile_index,
                                                const ExtractorConfig& config,
                                                std::size_t k,
                                                std::uint32_t fixed_n,
                                                int threads);

}  // namespace simann
