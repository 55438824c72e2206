#include "simann/profiles.hpp"

#include <algorithm>
#include <map>

#include "simann/util.hpp"

namespace simann {

namespace {

std::vector<LabelProfile> aggregate_profiles(
    std::span<const TermStream> streams, std::span<const LabelSet> labels,
    int threads) {
  if (streams.size() != labels.size())
    throw internal_error("build_profiles: streams/labels size mismatch");

  // Label -> member document ordinals, in corpus order.
  std::map<LabelCode, std::vector<std::size_t>, CodeLess> members;
  for (std::size_t d = 0; d < labels.size(); ++d)
    for (const LabelCode& label : labels[d]) members[label].push_back(d);

  std::vector<LabelProfile> profiles(members.size());
  std::vector<const std::pair<const LabelCode, std::vector<std::size_t>>*>
      slots;
  slots.reserve(members.size());
  for (const auto& entry : members) slots.push_back(&entry);

  const int n_threads = effective_threads(threads);
#pragma omp parallel for schedule(dynamic, 8) num_threads(n_threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(slots.size());
       ++i) {
    const auto& [label, docs] = *slots[static_cast<std::size_t>(i)];
    std::map<std::string, std::uint64_t> counts;
    for (std::size_t d : docs)
      for (const auto& [term, count] : streams[d].terms) counts[term] += count;

    LabelProfile& profile = profiles[static_cast<std::size_t>(i)];
    profile.label = label;
    profile.n_members = docs.size();
    profile.terms.doc_id = label;
    profile.terms.representation =
        streams.empty() ? Representation::stems : streams.front().representation;
    profile.terms.terms.reserve(counts.size());
    for (const auto& [term, count] : counts)
      profile.terms.terms.emplace_back(
          term, static_cast<std::uint32_t>(
                    std::min<std::uint64_t>(count, UINT32_MAX)));
  }
  return profiles;
}

}  // namespace

std::vector<LabelProfile> build_profiles_serial(
    std::span<const TermStream> streams, std::span<const LabelSet> labels) {
  return aggregate_profiles(streams, labels, 1);
}

std::vector<LabelProfile> build_profiles(std::span<const TermStream> streams,
                                         std::span<const LabelSet> labels,
                                         int threads) {
  return aggregate_profiles(streams, labels, threads);
}

InvertedIndex build_profile_index(std::span<const LabelProfile> profiles,
                                  std::uint32_t min_df, double max_df_ratio,
                                  int threads) {
  std::vector<TermStream> streams;
  std::vector<LabelSet> labels;
  streams.reserve(profiles.size());
  labels.reserve(profiles.size());
  for (const LabelProfile& p : profiles) {
    streams.push_back(p.terms);
    labels.push_back(LabelSet{p.label});
  }
  DfStats df = compute_df(streams, min_df, max_df_ratio, threads);
  return build_index(streams, labels, df, threads);
}

Prediction annotate_profiles(const Record& record,
                             const InvertedIndex& profile_index,
                             const ExtractorConfig& config, std::size_t k,
                             std::uint32_t fixed_n) {
  AnnotateParams params;
  params.k = k;
  params.fixed_n = fixed_n;
  return annotate(record, profile_index, config, params);
}

std::vector<Prediction> annotate_profiles_batch(
    const Corpus& corpus, const InvertedIndex& profile_index,
    const ExtractorConfig& config, std::size_t k, std::uint32_t fixed_n,
    int threads) {
  AnnotateParams params;
  params.k = k;
  params.fixed_n = fixed_n;
  return annotate_batch(corpus, profile_index, config, params, threads);
}

}  // namespace simann
