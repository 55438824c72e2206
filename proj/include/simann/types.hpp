#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace simann {

// Error taxonomy. The CLI maps these onto process exit codes:
// input_error -> 2, recipe_error -> 3, internal_error -> 4.
class input_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class recipe_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class internal_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A descriptor code. Base codes carry no '.'; fused meta codes are "a.b".
using LabelCode = std::string;

// Segment-wise code order: split on '.', compare numeric segments by value,
// everything else lexicographically. Yields "331" < "9062" < "21030.21034",
// which is the order fused codes are spelled in.
bool code_less(const LabelCode& a, const LabelCode& b);

struct CodeLess {
  bool operator()(const LabelCode& a, const LabelCode& b) const {
    return code_less(a, b);
  }
};

using LabelSet = std::set<LabelCode, CodeLess>;

enum class Representation : std::uint8_t {
  stems = 0,
  lemmas = 1,
  nps = 2,
  deps = 3,
  concepts = 4,
  all = 5,
};

const char* to_string(Representation rep);
Representation representation_from_string(const std::string& name);

// Ordered multiset of index terms extracted from one document. Entries are
// unique and sorted by term; counts aggregate repeat occurrences.
struct TermStream {
  std::string doc_id;
  Representation representation = Representation::stems;
  std::vector<std::pair<std::string, std::uint32_t>> terms;

  std::uint64_t total_count() const {
    std::uint64_t n = 0;
    for (const auto& [t, c] : terms) n += c;
    return n;
  }
  std::uint32_t count_of(const std::string& term) const;
};

// Aggregates duplicate terms and sorts; drops zero counts.
TermStream make_stream(std::string doc_id, Representation rep,
                       std::vector<std::pair<std::string, std::uint32_t>> raw);

}  // namespace simann
