#include "simann/types.hpp"

#include <algorithm>
#include <cctype>

#include "simann/util.hpp"

namespace simann {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

// <0 / 0 / >0 for one dot-separated segment.
int compare_segment(std::string_view x, std::string_view y) {
  if (all_digits(x) && all_digits(y)) {
    // Compare as magnitudes; leading zeros break ties lexicographically.
    std::string_view xs = x.substr(std::min(x.find_first_not_of('0'), x.size()));
    std::string_view ys = y.substr(std::min(y.find_first_not_of('0'), y.size()));
    if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
    int c = xs.compare(ys);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  int c = x.compare(y);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

bool code_less(const LabelCode& a, const LabelCode& b) {
  std::string_view sa = a, sb = b;
  while (!sa.empty() || !sb.empty()) {
    if (sa.empty()) return true;
    if (sb.empty()) return false;
    std::size_t da = sa.find('.');
    std::size_t db = sb.find('.');
    std::string_view xa = sa.substr(0, da);
    std::string_view xb = sb.substr(0, db);
    int c = compare_segment(xa, xb);
    if (c != 0) return c < 0;
    sa = da == std::string_view::npos ? std::string_view{} : sa.substr(da + 1);
    sb = db == std::string_view::npos ? std::string_view{} : sb.substr(db + 1);
  }
  return false;
}

const char* to_string(Representation rep) {
  switch (rep) {
    case Representation::stems: return "stems";
    case Representation::lemmas: return "lemmas";
    case Representation::nps: return "nps";
    case Representation::deps: return "deps";
    case Representation::concepts: return "concepts";
    case Representation::all: return "all";
  }
  throw internal_error("unknown representation");
}

Representation representation_from_string(const std::string& name) {
  if (name == "stems") return Representation::stems;
  if (name == "lemmas") return Representation::lemmas;
  if (name == "nps") return Representation::nps;
  if (name == "deps") return Representation::deps;
  if (name == "concepts") return Representation::concepts;
  if (name == "all") return Representation::all;
  throw input_error("unknown representation: " + name);
}

std::uint32_t TermStream::count_of(const std::string& term) const {
  auto it = std::lower_bound(
      terms.begin(), terms.end(), term,
      [](const auto& entry, const std::string& t) { return entry.first < t; });
  if (it != terms.end() && it->first == term) return it->second;
  return 0;
}

TermStream make_stream(std::string doc_id, Representation rep,
                       std::vector<std::pair<std::string, std::uint32_t>> raw) {
  std::sort(raw.begin(), raw.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  TermStream out;
  out.doc_id = std::move(doc_id);
  out.representation = rep;
  out.terms.reserve(raw.size());
  for (auto& [term, count] : raw) {
    if (count == 0) continue;
    if (!out.terms.empty() && out.terms.back().first == term)
      out.terms.back().second += count;
    else
      out.terms.emplace_back(std::move(term), count);
  }
  return out;
}

}  // namespace simann
