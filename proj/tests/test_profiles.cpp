#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "simann/profiles.hpp"
#include "test_util.hpp"

using namespace simann;

TEST_CASE("build_profiles aggregates member streams per label") {
  std::vector<TermStream> streams = {
      make_stream("doc1", Representation::stems, {{"t1", 2}}),
      make_stream("doc2", Representation::stems, {{"t1", 1}, {"t2", 3}}),
  };
  std::vector<LabelSet> labels = {{"A"}, {"A", "B"}};

  auto profiles = build_profiles_serial(streams, labels);
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].label == "A");
  CHECK(profiles[0].n_members == 2);
  CHECK(profiles[0].terms.count_of("t1") == 3);
  CHECK(profiles[0].terms.count_of("t2") == 3);
  CHECK(profiles[1].label == "B");
  CHECK(profiles[1].n_members == 1);
  CHECK(profiles[1].terms.count_of("t1") == 1);
  CHECK(profiles[1].terms.count_of("t2") == 3);

  SUBCASE("single-member profile equals that document's stream") {
    CHECK(profiles[1].terms.terms == streams[1].terms);
  }
  SUBCASE("empty corpus yields no profiles") {
    CHECK(build_profiles_serial({}, {}).empty());
  }
}

TEST_CASE("profile aggregation matches a brute-force recount") {
  std::mt19937_64 rng(13);
  auto vocab = testutil::make_vocab(60);

  for (int iter = 0; iter < 15; ++iter) {
    std::size_t n_docs = 20 + static_cast<std::size_t>(iter) * 5;
    auto streams = testutil::random_streams(rng, n_docs, vocab, 2, 30);
    std::vector<LabelSet> labels;
    for (std::size_t d = 0; d < n_docs; ++d)
      labels.push_back(testutil::random_labels(rng, 50, 5));

    auto profiles = build_profiles(streams, labels, 4);
    auto serial = build_profiles_serial(streams, labels);

    // Parallel output must equal the serial reference.
    REQUIRE(profiles.size() == serial.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      CHECK(profiles[i].label == serial[i].label);
      CHECK(profiles[i].n_members == serial[i].n_members);
      CHECK(profiles[i].terms.terms == serial[i].terms.terms);
    }

    // Independent recount: sum per-label term counts document by document.
    std::map<LabelCode, std::map<std::string, std::uint64_t>, CodeLess> want;
    std::map<LabelCode, std::uint64_t, CodeLess> members;
    for (std::size_t d = 0; d < n_docs; ++d)
      for (const auto& label : labels[d]) {
        ++members[label];
        for (const auto& [term, count] : streams[d].terms)
          want[label][term] += count;
      }

    REQUIRE(profiles.size() == want.size());
    std::size_t i = 0;
    for (const auto& [label, terms] : want) {
      CHECK(profiles[i].label == label);
      CHECK(profiles[i].n_members == members[label]);
      REQUIRE(profiles[i].terms.terms.size() == terms.size());
      for (const auto& [term, count] : profiles[i].terms.terms)
        CHECK(count == terms.at(term));
      ++i;
    }
  }
}

TEST_CASE("profile index recomputes DF over profiles, not documents") {
  // "shared" appears in 6 documents but every one carries label A, so at the
  // profile level its df is 1 and min_df=1 filters it out.
  std::vector<TermStream> streams;
  std::vector<LabelSet> labels;
  for (std::size_t d = 0; d < 6; ++d) {
    streams.push_back(make_stream(testutil::doc_name(d),
                                  Representation::stems,
                                  {{"shared", 1}, {"w" + std::to_string(d), 1}}));
    labels.push_back({"A"});
  }
  streams.push_back(
      make_stream("doc-x", Representation::stems, {{"solo", 2}, {"both", 1}}));
  labels.push_back({"B"});
  streams.push_back(
      make_stream("doc-y", Representation::stems, {{"solo", 1}, {"both", 2}}));
  labels.push_back({"C"});

  auto profiles = build_profiles_serial(streams, labels);
  InvertedIndex pidx = build_profile_index(profiles, 1, 1.0);

  CHECK(pidx.term_id.count("shared") == 0);  // profile-level df 1
  CHECK(pidx.term_id.count("solo") == 1);    // profile-level df 2
  CHECK(pidx.term_id.count("both") == 1);
  CHECK(pidx.n_docs == 3);
  // Profile documents carry singleton label sets named by their label.
  for (std::size_t i = 0; i < pidx.doc_ids.size(); ++i) {
    CHECK(pidx.doc_labels[i] == LabelSet{pidx.doc_ids[i]});
    CHECK(pidx.doc_label_count[i] == 1);
  }
}

namespace {

struct ProfileFixture {
  InvertedIndex pidx;
  ExtractorConfig config;

  ProfileFixture() {
    // Three well-separated profiles plus shared background vocabulary. Every
    // word is a fixed point of the stemmer, so the raw streams here line up
    // with what query-side extraction produces.
    std::vector<TermStream> streams = {
        make_stream("d1", Representation::stems,
                    {{"alfa", 6}, {"isla", 2}}),
        make_stream("d2", Representation::stems,
                    {{"alba", 6}, {"isla", 2}}),
        make_stream("d3", Representation::stems,
                    {{"orca", 6}, {"isla", 2}}),
        make_stream("d4", Representation::stems,
                    {{"alfa", 2}, {"alba", 2}, {"isla", 1}}),
    };
    std::vector<LabelSet> labels = {{"10"}, {"20"}, {"30"}, {"10", "20"}};
    auto profiles = build_profiles_serial(streams, labels);
    pidx = build_profile_index(profiles, 0, 1.0);
    config.representation = Representation::stems;
  }
};

}  // namespace

TEST_CASE_FIXTURE(ProfileFixture, "annotate_profiles votes over singleton labels") {
  Record rec;
  rec.id = "q";
  rec.title = "";
  rec.abstract_text = "alfa alfa alfa isla";

  Prediction pred = annotate_profiles(rec, pidx, config, 3, 2);
  CHECK_FALSE(pred.no_match);
  CHECK(pred.n_predicted == 2);
  REQUIRE(pred.chosen.size() == 2);
  CHECK(pred.chosen[0] == "10");

  // With singleton neighbor labels, vote order must equal weight order:
  // vote(label_i) = 2*w_i - sum(w), a strictly increasing map of w_i.
  auto results = search(pidx, extract_record(rec, config), 4);
  auto neighbors = normalize_neighbors(results, rec.id, 3, pidx);
  REQUIRE(neighbors.size() >= pred.ranked.size());
  for (std::size_t i = 0; i + 1 < pred.ranked.size(); ++i)
    CHECK(pred.ranked[i].second >= pred.ranked[i + 1].second);
  for (std::size_t i = 0; i < pred.ranked.size(); ++i)
    CHECK(pred.ranked[i].first == *neighbors[i].labels.begin());
}

TEST_CASE_FIXTURE(ProfileFixture, "fixed_n caps the profile prediction") {
  Record rec;
  rec.id = "q";
  rec.abstract_text = "isla isla";

  Prediction wide = annotate_profiles(rec, pidx, config, 3, 10);
  CHECK(wide.chosen.size() <= 3);  // at most k candidate profiles

  Prediction one = annotate_profiles(rec, pidx, config, 3, 1);
  CHECK(one.chosen.size() == 1);
}

TEST_CASE_FIXTURE(ProfileFixture, "unmatched records come back flagged") {
  Record rec;
  rec.id = "q";
  rec.abstract_text = "vocabulario desconocido totalmente";
  Prediction pred = annotate_profiles(rec, pidx, config, 3, 2);
  CHECK(pred.no_match);
  CHECK(pred.chosen.empty());
}

TEST_CASE_FIXTURE(ProfileFixture, "equal-vote profiles order by code") {
  Record rec;
  rec.id = "q";
  rec.abstract_text = "alfa alba";
  Prediction pred = annotate_profiles(rec, pidx, config, 2, 2);
  REQUIRE(pred.chosen.size() == 2);
  // Profiles for 10 and 20 are mirror images, so their scores tie and the
  // code-ascending rule decides.
  CHECK(pred.chosen[0] == "10");
  CHECK(pred.chosen[1] == "20");
}

TEST_CASE("annotate_profiles_batch matches element-wise annotation") {
  ProfileFixture fixture;
  Corpus corpus;
  const char* texts[] = {"alfa isla", "alba alba", "orca isla isla",
                         "alfa alba orca", "isla"};
  for (int i = 0; i < 5; ++i) {
    Record r;
    r.id = "q" + std::to_string(i);
    r.abstract_text = texts[i];
    corpus.records.push_back(std::move(r));
  }

  auto batch =
      annotate_profiles_batch(corpus, fixture.pidx, fixture.config, 3, 2, 4);
  REQUIRE(batch.size() == 5);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Prediction single = annotate_profiles(corpus.records[i], fixture.pidx,
                                          fixture.config, 3, 2);
    CHECK(batch[i].doc_id == single.doc_id);
    CHECK(batch[i].chosen == single.chosen);
    CHECK(batch[i].ranked == single.ranked);
    CHECK(batch[i].no_match == single.no_match);
  }
}
