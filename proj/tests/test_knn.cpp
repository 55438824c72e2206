#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "simann/corpus.hpp"
#include "simann/index.hpp"
#include "simann/knn.hpp"
#include "test_util.hpp"

using namespace simann;

namespace {

// Index whose only job is to carry per-document label sets for
// normalize_neighbors; every doc gets a distinct private term.
InvertedIndex label_carrier(const std::vector<LabelSet>& labels) {
  std::vector<TermStream> streams;
  for (std::size_t d = 0; d < labels.size(); ++d)
    streams.push_back(make_stream(testutil::doc_name(d),
                                  Representation::stems,
                                  {{"t" + std::to_string(d), 1}}));
  DfStats df = compute_df(streams, 0, 1.0, 1);
  return build_index(streams, labels, df, 1);
}

ScoredDoc scored(const InvertedIndex& index, std::size_t ordinal,
                 double score) {
  return {static_cast<std::uint32_t>(ordinal), index.doc_ids[ordinal], score};
}

}  // namespace

TEST_CASE("normalize_neighbors drops the self hit but keeps its score_max") {
  InvertedIndex index = label_carrier({{"1"}, {"2"}});
  std::vector<ScoredDoc> results = {scored(index, 0, 8.0),
                                    scored(index, 1, 2.0)};

  auto neighbors = normalize_neighbors(results, index.doc_ids[0], 30, index);
  REQUIRE(neighbors.size() == 1);
  CHECK(neighbors[0].doc_id == index.doc_ids[1]);
  CHECK(neighbors[0].distance == 0.75);  // 1 - 2/8
  CHECK(neighbors[0].weight == 1.0 / (0.75 * 0.75));
  CHECK(neighbors[0].weight == doctest::Approx(1.7778).epsilon(1e-4));
  CHECK(neighbors[0].labels == LabelSet{"2"});
}

TEST_CASE("normalize_neighbors keeps an unseen query's top result") {
  InvertedIndex index = label_carrier({{"1"}, {"2"}});
  std::vector<ScoredDoc> results = {scored(index, 0, 5.0),
                                    scored(index, 1, 1.0)};

  auto neighbors = normalize_neighbors(results, "not-indexed", 30, index);
  REQUIRE(neighbors.size() == 2);
  CHECK(neighbors[0].doc_id == index.doc_ids[0]);
  CHECK(neighbors[0].distance == kMinDistance);  // clamped at score_max
  CHECK(neighbors[0].weight == 1.0 / (kMinDistance * kMinDistance));
  CHECK(neighbors[1].distance == 0.8);
}

TEST_CASE("normalize_neighbors truncates to k and accepts short results") {
  InvertedIndex index = label_carrier({{"1"}, {"2"}, {"3"}, {"4"}});
  std::vector<ScoredDoc> results = {
      scored(index, 0, 9.0), scored(index, 1, 6.0), scored(index, 2, 3.0),
      scored(index, 3, 1.0)};

  CHECK(normalize_neighbors(results, "x", 2, index).size() == 2);
  CHECK(normalize_neighbors(results, "x", 10, index).size() == 4);
  CHECK(normalize_neighbors({}, "x", 10, index).empty());
}

TEST_CASE("predict_label_count applies the weighted mean with half-up rounding") {
  auto neighbor = [](double weight, std::uint32_t count) {
    Neighbor n;
    n.weight = weight;
    n.label_count = count;
    return n;
  };

  SUBCASE("worked example") {
    // distances [0.5, 1.0] -> weights [4, 1]; counts [4, 6]
    std::vector<Neighbor> ns = {neighbor(4.0, 4), neighbor(1.0, 6)};
    CHECK(predict_label_count(ns, 1.0) == 4);  // mean 4.4
    CHECK(predict_label_count(ns, 1.1) == 5);  // 4.84
  }
  SUBCASE("single neighbor returns its own count for any weight") {
    for (double w : {1e-6, 1.0, 1e9}) {
      std::vector<Neighbor> ns = {neighbor(w, 7)};
      CHECK(predict_label_count(ns, 1.0) == 7);
    }
  }
  SUBCASE("never below one") {
    std::vector<Neighbor> ns = {neighbor(1.0, 1), neighbor(1.0, 1)};
    CHECK(predict_label_count(ns, 0.1) == 1);
  }
  SUBCASE("half-up at the boundary") {
    std::vector<Neighbor> ns = {neighbor(1.0, 2), neighbor(1.0, 3)};
    CHECK(predict_label_count(ns, 1.0) == 3);  // 2.5 rounds up
  }
  SUBCASE("pre-multiplier mean stays within neighbor count range") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> wdist(0.1, 100.0);
    std::uniform_int_distribution<std::uint32_t> cdist(1, 40);
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<Neighbor> ns;
      std::uint32_t lo = 40, hi = 1;
      for (int i = 0; i < 10; ++i) {
        std::uint32_t c = cdist(rng);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        ns.push_back(neighbor(wdist(rng), c));
      }
      std::uint32_t n = predict_label_count(ns, 1.0);
      CHECK(n >= lo);
      CHECK(n <= hi);
    }
  }
}

TEST_CASE("vote_labels sums signed weights and orders by vote then code") {
  auto neighbor = [](double weight, LabelSet labels) {
    Neighbor n;
    n.weight = weight;
    n.labels = std::move(labels);
    return n;
  };

  SUBCASE("worked example") {
    std::vector<Neighbor> ns = {neighbor(4.0, {"X", "Y"}),
                                neighbor(1.0, {"Y", "Z"})};
    auto votes = vote_labels(ns);
    REQUIRE(votes.size() == 3);
    CHECK(votes[0] == std::pair<LabelCode, double>{"Y", 5.0});
    CHECK(votes[1] == std::pair<LabelCode, double>{"X", 3.0});
    CHECK(votes[2] == std::pair<LabelCode, double>{"Z", -3.0});
  }
  SUBCASE("shared label collects the full weight mass") {
    std::vector<Neighbor> ns = {neighbor(2.0, {"A"}), neighbor(3.5, {"A"}),
                                neighbor(1.0, {"A", "B"})};
    auto votes = vote_labels(ns);
    CHECK(votes[0].first == "A");
    CHECK(votes[0].second == 6.5);
  }
  SUBCASE("single neighbor votes +w per label in code order") {
    std::vector<Neighbor> ns = {neighbor(2.5, {"30", "4"})};
    auto votes = vote_labels(ns);
    REQUIRE(votes.size() == 2);
    CHECK(votes[0].first == "4");  // numeric code order, equal votes
    CHECK(votes[1].first == "30");
    CHECK(votes[0].second == 2.5);
    CHECK(votes[1].second == 2.5);
  }
  SUBCASE("matches an explicit incidence-matrix recount") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> wdist(0.01, 50.0);
    std::uniform_int_distribution<std::size_t> ndist(1, 40);
    for (int iter = 0; iter < 60; ++iter) {
      std::vector<Neighbor> ns;
      std::size_t n = ndist(rng);
      for (std::size_t i = 0; i < n; ++i)
        ns.push_back(neighbor(wdist(rng), testutil::random_labels(rng, 100, 8)));

      auto got = vote_labels(ns);

      LabelSet candidates;
      for (const auto& nb : ns)
        candidates.insert(nb.labels.begin(), nb.labels.end());
      CHECK(got.size() == candidates.size());
      for (const auto& [code, vote] : got) {
        double expected = 0.0;
        for (const auto& nb : ns)
          expected += nb.labels.count(code) ? nb.weight : -nb.weight;
        CHECK(vote == expected);
      }
      for (std::size_t i = 1; i < got.size(); ++i) {
        bool ordered = got[i - 1].second > got[i].second ||
                       (got[i - 1].second == got[i].second &&
                        code_less(got[i - 1].first, got[i].first));
        CHECK(ordered);
      }
    }
  }
}

namespace {

Corpus word_corpus(const std::vector<std::pair<std::string, std::string>>&
                       docs,
                   const std::vector<LabelSet>& labels) {
  Corpus corpus;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Record r;
    r.id = docs[i].first;
    r.title = "";
    r.abstract_text = docs[i].second;
    r.labels = labels[i];
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace

TEST_CASE("annotate recovers the nearest distinct neighbor for in-index docs") {
  Corpus train = word_corpus(
      {{"doc-a", "tumor tumor mediastino cirugia"},
       {"doc-b", "tumor mediastino cirugia torax"},
       {"doc-c", "insulina diabetes glucemia tumor"}},
      {{"1", "2"}, {"3", "4", "5"}, {"6"}});

  ExtractorConfig config;
  config.representation = Representation::stems;
  auto streams = extract_batch_serial(train, config);
  std::vector<LabelSet> labels;
  for (const auto& r : train.records) labels.push_back(r.labels);
  DfStats df = compute_df(streams, 0, 1.0, 1);
  InvertedIndex index = build_index(streams, labels, df, 1);

  AnnotateParams params;
  params.k = 1;
  params.multiplier = 1.0;

  // doc-a's nearest distinct neighbor is doc-b: prediction is doc-b's labels,
  // and the count regression over that single neighbor returns 3.
  Prediction pred = annotate(train.records[0], index, config, params);
  CHECK_FALSE(pred.no_match);
  CHECK(pred.n_predicted == 3);
  CHECK(pred.chosen == std::vector<LabelCode>{"3", "4", "5"});

  SUBCASE("no shared vocabulary flags an empty prediction") {
    Record stranger;
    stranger.id = "x";
    stranger.abstract_text = "palabras totalmente distintas aqui";
    Prediction p = annotate(stranger, index, config, params);
    CHECK(p.no_match);
    CHECK(p.chosen.empty());
    CHECK(p.ranked.empty());
  }
  SUBCASE("fixed_n overrides the regression") {
    params.fixed_n = 1;
    Prediction p = annotate(train.records[0], index, config, params);
    CHECK(p.n_predicted == 1);
    CHECK(p.chosen.size() == 1);
  }
  SUBCASE("chosen is always a prefix of ranked") {
    params.k = 3;
    for (const auto& rec : train.records) {
      Prediction p = annotate(rec, index, config, params);
      REQUIRE(p.chosen.size() == p.n_predicted);
      for (std::size_t i = 0; i < p.chosen.size(); ++i)
        CHECK(p.chosen[i] == p.ranked[i].first);
    }
  }
}

TEST_CASE("annotate recovers a duplicated document's exact label set") {
  for (const std::string twin_id : {"aaa-twin", "zzz-twin"}) {
    Corpus train = word_corpus(
        {{"doc-a", "tumor mediastino cirugia toracica"},
         {twin_id, "tumor mediastino cirugia toracica"},
         {"doc-c", "tumor glucemia insulina diabetes"}},
        {{"7", "2", "19"}, {"7", "2", "19"}, {"5"}});

    ExtractorConfig config;
    config.representation = Representation::stems;
    auto streams = extract_batch_serial(train, config);
    std::vector<LabelSet> labels;
    for (const auto& r : train.records) labels.push_back(r.labels);
    DfStats df = compute_df(streams, 0, 1.0, 1);
    InvertedIndex index = build_index(streams, labels, df, 1);

    AnnotateParams params;
    params.k = 1;
    Prediction pred = annotate(train.records[0], index, config, params);
    CAPTURE(twin_id);
    CHECK(pred.chosen == std::vector<LabelCode>{"2", "7", "19"});
    CHECK(pred.n_predicted == 3);
  }
}

TEST_CASE("prediction is invariant under uniform score rescaling") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> sdist(0.5, 50.0);

  std::vector<LabelSet> labels;
  for (int d = 0; d < 20; ++d)
    labels.push_back(testutil::random_labels(rng, 40, 6));
  InvertedIndex index = label_carrier(labels);

  for (int iter = 0; iter < 40; ++iter) {
    std::vector<double> raw;
    for (int i = 0; i < 12; ++i) raw.push_back(sdist(rng));
    std::sort(raw.rbegin(), raw.rend());

    auto run_at_scale = [&](double c) {
      std::vector<ScoredDoc> results;
      for (int i = 0; i < 12; ++i)
        results.push_back(scored(index, static_cast<std::size_t>(i),
                                 raw[static_cast<std::size_t>(i)] * c));
      auto neighbors = normalize_neighbors(results, "unseen", 10, index);
      auto votes = vote_labels(neighbors);
      return std::pair{predict_label_count(neighbors, 1.1), votes};
    };

    auto [n_base, votes_base] = run_at_scale(1.0);
    for (double c : {0.5, 3.0, 1e6}) {
      auto [n_scaled, votes_scaled] = run_at_scale(c);
      CAPTURE(iter);
      CAPTURE(c);
      CHECK(n_scaled == n_base);
      REQUIRE(votes_scaled.size() == votes_base.size());
      for (std::size_t i = 0; i < votes_base.size(); ++i) {
        CHECK(votes_scaled[i].first == votes_base[i].first);
        CHECK(votes_scaled[i].second ==
              doctest::Approx(votes_base[i].second).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("annotate_batch matches the serial reference") {
  std::mt19937_64 rng(31);
  const char* words[] = {"tumor", "mediastino", "cirugia", "insulina",
                         "diabetes", "asma", "torax", "glucemia"};
  std::uniform_int_distribution<std::size_t> pick(0, 7);

  Corpus train;
  for (int d = 0; d < 50; ++d) {
    Record r;
    r.id = testutil::doc_name(static_cast<std::size_t>(d));
    for (int i = 0; i < 12; ++i)
      r.abstract_text += std::string(words[pick(rng)]) + " ";
    r.labels = testutil::random_labels(rng, 25, 4);
    train.records.push_back(std::move(r));
  }

  ExtractorConfig config;
  config.representation = Representation::stems;
  auto streams = extract_batch_serial(train, config);
  std::vector<LabelSet> labels;
  for (const auto& r : train.records) labels.push_back(r.labels);
  DfStats df = compute_df(streams, 1, 1.0, 1);
  InvertedIndex index = build_index(streams, labels, df, 1);

  AnnotateParams params;
  params.k = 5;
  params.multiplier = 1.1;

  auto serial = annotate_batch_serial(train, index, config, params);
  auto parallel = annotate_batch(train, index, config, params, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].doc_id == parallel[i].doc_id);
    CHECK(serial[i].chosen == parallel[i].chosen);
    CHECK(serial[i].n_predicted == parallel[i].n_predicted);
    CHECK(serial[i].ranked == parallel[i].ranked);
    CHECK(serial[i].no_match == parallel[i].no_match);
  }
}
