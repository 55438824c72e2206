// Spanish suffix-stripping stemmer (Snowball family), operating on
// codepoints so accented vowels keep their role in the algorithm.

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "simann/textproc.hpp"
#include "utf8.hpp"

namespace simann {

namespace {

using W = std::u32string;
using Sv = std::u32string_view;

bool is_vowel(char32_t c) {
  switch (c) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
    case U'á': case U'é': case U'í': case U'ó': case U'ú': case U'ü':
      return true;
    default:
      return false;
  }
}

struct Regions {
  std::size_t r1, r2, rv;
};

Regions mark_regions(const W& w) {
  const std::size_t n = w.size();
  Regions reg{n, n, n};

  for (std::size_t i = 0; i + 1 < n; ++i)
    if (is_vowel(w[i]) && !is_vowel(w[i + 1])) {
      reg.r1 = i + 2;
      break;
    }
  for (std::size_t i = reg.r1; i + 1 < n; ++i)
    if (is_vowel(w[i]) && !is_vowel(w[i + 1])) {
      reg.r2 = i + 2;
      break;
    }

  if (n >= 3) {
    if (!is_vowel(w[1])) {
      // second letter a consonant: after the next following vowel
      for (std::size_t i = 2; i < n; ++i)
        if (is_vowel(w[i])) {
          reg.rv = i + 1;
          break;
        }
    } else if (is_vowel(w[0])) {
      // two initial vowels: after the next consonant
      for (std::size_t i = 2; i < n; ++i)
        if (!is_vowel(w[i])) {
          reg.rv = i + 1;
          break;
        }
    } else {
      // consonant-vowel: after the third letter
      reg.rv = 3;
    }
  }
  return reg;
}

bool ends_with(const W& w, Sv suffix) {
  return w.size() >= suffix.size() &&
         Sv(w).substr(w.size() - suffix.size()) == suffix;
}

// Start index of a matched suffix.
std::size_t suffix_start(const W& w, Sv suffix) { return w.size() - suffix.size(); }

// Longest entry matching the end of w; lists are ordered longest-first.
template <std::size_t N>
Sv longest_match(const W& w, const std::array<Sv, N>& list) {
  for (Sv s : list)
    if (ends_with(w, s)) return s;
  return {};
}

// Longest entry that both matches and lies entirely inside the region.
template <std::size_t N>
Sv longest_match_in(const W& w, const std::array<Sv, N>& list, std::size_t region) {
  for (Sv s : list)
    if (ends_with(w, s) && suffix_start(w, s) >= region) return s;
  return {};
}

void step0_attached_pronoun(W& w, const Regions& reg) {
  static constexpr std::array<Sv, 13> kPronouns = {
      U"selas", U"selos", U"sela", U"selo", U"las", U"les", U"los",
      U"nos",   U"la",    U"le",   U"lo",   U"me",  U"se"};
  Sv pron = longest_match(w, kPronouns);
  if (pron.empty()) return;

  W base = w.substr(0, w.size() - pron.size());
  // accented gerund/infinitive endings; deletion also removes the accent
  static constexpr std::array<Sv, 5> kAccented = {U"iéndo", U"ándo", U"ár",
                                                  U"ér", U"ír"};
  static constexpr std::array<Sv, 5> kPlain = {U"iendo", U"ando", U"ar", U"er",
                                               U"ir"};
  // longest-match over the union, then the RV test
  static constexpr std::array<Sv, 11> kAll = {U"iéndo", U"iendo", U"yendo",
                                              U"ándo",  U"ando",  U"ár",
                                              U"ér",    U"ír",    U"ar",
                                              U"er",    U"ir"};
  Sv ending = longest_match(base, kAll);
  if (ending.empty()) return;
  std::size_t start = suffix_start(base, ending);
  if (start < reg.rv) return;

  if (ending == Sv(U"yendo")) {
    if (start == 0 || base[start - 1] != U'u') return;
    w = std::move(base);
    return;
  }
  for (std::size_t i = 0; i < kAccented.size(); ++i) {
    if (ending == kAccented[i]) {
      base.replace(start, ending.size(), kPlain[i]);
      w = std::move(base);
      return;
    }
  }
  w = std::move(base);  // plain (b) case
}

// Deletes `n` trailing codepoints if the resulting suffix start is in the
// region; returns whether it deleted.
bool chop_if(W& w, std::size_t n, std::size_t region) {
  if (w.size() < n || w.size() - n < region) return false;
  w.resize(w.size() - n);
  return true;
}

template <std::size_t N>
void try_chop_preceding(W& w, const std::array<Sv, N>& list, std::size_t region) {
  Sv s = longest_match_in(w, list, region);
  if (!s.empty()) w.resize(w.size() - s.size());
}

bool step1_standard_suffix(W& w, const Regions& reg) {
  struct Rule {
    Sv suffix;
    int group;
  };
  // ordered by suffix length descending; groups share one longest-match scan
  static constexpr std::array<Rule, 46> kRules = {{
      {U"amientos", 1}, {U"imientos", 1}, {U"amiento", 1}, {U"imiento", 1},
      {U"aciones", 2},  {U"uciones", 4},  {U"logías", 3},  {U"encias", 5},
      {U"ancias", 2},   {U"idades", 8},   {U"amente", 6},  {U"adoras", 2},
      {U"adores", 2},   {U"anzas", 1},    {U"ismos", 1},   {U"ables", 1},
      {U"ibles", 1},    {U"istas", 1},    {U"adora", 2},   {U"ación", 2},
      {U"antes", 2},    {U"ancia", 2},    {U"logía", 3},   {U"ución", 4},
      {U"encia", 5},    {U"mente", 7},    {U"anza", 1},    {U"icos", 1},
      {U"icas", 1},     {U"ismo", 1},     {U"able", 1},    {U"ible", 1},
      {U"ista", 1},     {U"osos", 1},     {U"osas", 1},    {U"idad", 8},
      {U"ivas", 9},     {U"ivos", 9},     {U"ador", 2},    {U"ante", 2},
      {U"oso", 1},      {U"osa", 1},      {U"ico", 1},     {U"ica", 1},
      {U"iva", 9},      {U"ivo", 9},
  }};

  const Rule* hit = nullptr;
  for (const Rule& r : kRules)
    if (ends_with(w, r.suffix)) {
      hit = &r;
      break;
    }
  if (!hit) return false;

  const std::size_t start = suffix_start(w, hit->suffix);
  switch (hit->group) {
    case 1:
      return chop_if(w, hit->suffix.size(), reg.r2);
    case 2: {
      if (!chop_if(w, hit->suffix.size(), reg.r2)) return false;
      static constexpr std::array<Sv, 1> kIc = {U"ic"};
      try_chop_preceding(w, kIc, reg.r2);
      return true;
    }
    case 3:
      if (start < reg.r2) return false;
      w.replace(start, hit->suffix.size(), U"log");
      return true;
    case 4:
      if (start < reg.r2) return false;
      w.replace(start, hit->suffix.size(), U"u");
      return true;
    case 5:
      if (start < reg.r2) return false;
      w.replace(start, hit->suffix.size(), U"ente");
      return true;
    case 6: {
      if (!chop_if(w, hit->suffix.size(), reg.r1)) return false;
      if (ends_with(w, Sv(U"iv")) && suffix_start(w, U"iv") >= reg.r2) {
        w.resize(w.size() - 2);
        static constexpr std::array<Sv, 1> kAt = {U"at"};
        try_chop_preceding(w, kAt, reg.r2);
      } else {
        static constexpr std::array<Sv, 3> kOsIcAd = {U"os", U"ic", U"ad"};
        try_chop_preceding(w, kOsIcAd, reg.r2);
      }
      return true;
    }
    case 7: {
      if (!chop_if(w, hit->suffix.size(), reg.r2)) return false;
      static constexpr std::array<Sv, 3> kPre = {U"ante", U"able", U"ible"};
      try_chop_preceding(w, kPre, reg.r2);
      return true;
    }
    case 8: {
      if (!chop_if(w, hit->suffix.size(), reg.r2)) return false;
      static constexpr std::array<Sv, 3> kPre = {U"abil", U"ic", U"iv"};
      try_chop_preceding(w, kPre, reg.r2);
      return true;
    }
    case 9: {
      if (!chop_if(w, hit->suffix.size(), reg.r2)) return false;
      static constexpr std::array<Sv, 1> kAt = {U"at"};
      try_chop_preceding(w, kAt, reg.r2);
      return true;
    }
  }
  return false;
}

bool step2a_y_verb_suffix(W& w, const Regions& reg) {
  static constexpr std::array<Sv, 12> kSuffixes = {
      U"yeron", U"yendo", U"yamos", U"yais", U"yan", U"yen",
      U"yas",   U"yes",   U"ya",    U"ye",   U"yo",  U"yó"};
  Sv s = longest_match_in(w, kSuffixes, reg.rv);
  if (s.empty()) return false;
  std::size_t start = suffix_start(w, s);
  if (start == 0 || w[start - 1] != U'u') return false;
  w.resize(start);
  return true;
}

void step2b_verb_suffix(W& w, const Regions& reg) {
  // these additionally strip a trailing u after g
  static constexpr std::array<Sv, 4> kGu = {U"emos", U"éis", U"en", U"es"};
  // ordered by codepoint length descending
  static constexpr std::array<Sv, 92> kPlain = {
      U"aríamos", U"eríamos", U"iríamos", U"iéramos", U"iésemos",
      U"aríais",  U"eríais",  U"iríais",  U"aremos",  U"eremos",
      U"iremos",  U"ierais",  U"ieseis",  U"asteis",  U"isteis",
      U"ábamos",  U"áramos",  U"ásemos",  U"arían",   U"arías",
      U"erían",   U"erías",   U"irían",   U"irías",   U"aréis",
      U"eréis",   U"iréis",   U"ieran",   U"iesen",   U"ieron",
      U"iendo",   U"ieras",   U"ieses",   U"abais",   U"arais",
      U"aseis",   U"íamos",   U"arán",    U"arás",    U"erán",
      U"erás",    U"irán",    U"irás",    U"aría",    U"ería",
      U"iría",    U"iera",    U"iese",    U"aste",    U"iste",
      U"aban",    U"aran",    U"asen",    U"aron",    U"ando",
      U"abas",    U"adas",    U"idas",    U"aras",    U"ases",
      U"íais",    U"ados",    U"idos",    U"amos",    U"imos",
      U"ará",     U"aré",     U"erá",     U"eré",     U"irá",
      U"iré",     U"aba",     U"ada",     U"ida",     U"ara",
      U"ase",     U"ían",     U"ías",     U"áis",     U"ado",
      U"ido",     U"ía",      U"ad",      U"ed",      U"id",
      U"an",      U"ió",      U"ar",      U"er",      U"ir",
      U"as",      U"ís"};

  Sv gu = longest_match_in(w, kGu, reg.rv);
  Sv plain = longest_match_in(w, kPlain, reg.rv);
  if (!gu.empty() && gu.size() >= plain.size()) {
    w.resize(w.size() - gu.size());
    if (ends_with(w, Sv(U"gu"))) w.resize(w.size() - 1);
  } else if (!plain.empty()) {
    w.resize(w.size() - plain.size());
  }
}

void step3_residual_suffix(W& w, const Regions& reg) {
  static constexpr std::array<Sv, 6> kDrop = {U"os", U"a", U"o",
                                              U"á",  U"í", U"ó"};
  static constexpr std::array<Sv, 2> kE = {U"e", U"é"};

  Sv drop = longest_match(w, kDrop);
  Sv e = longest_match(w, kE);
  if (drop.size() >= e.size() && !drop.empty()) {
    chop_if(w, drop.size(), reg.rv);
    return;
  }
  if (!e.empty() && suffix_start(w, e) >= reg.rv) {
    w.resize(w.size() - e.size());
    if (ends_with(w, Sv(U"gu")) && suffix_start(w, U"u") >= reg.rv)
      w.resize(w.size() - 1);
  }
}

char32_t remove_acute(char32_t c) {
  switch (c) {
    case U'á': return U'a';
    case U'é': return U'e';
    case U'í': return U'i';
    case U'ó': return U'o';
    case U'ú': return U'u';
    default: return c;
  }
}

char32_t to_lower_es(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  switch (c) {
    case U'Á': return U'á';
    case U'É': return U'é';
    case U'Í': return U'í';
    case U'Ó': return U'ó';
    case U'Ú': return U'ú';
    case U'Ü': return U'ü';
    case U'Ñ': return U'ñ';
    default: return c;
  }
}

}  // namespace

std::string stem_spanish(std::string_view word) {
  W w = decode_utf8(word);
  for (char32_t& c : w) c = to_lower_es(c);

  const Regions reg = mark_regions(w);
  step0_attached_pronoun(w, reg);
  if (!step1_standard_suffix(w, reg)) {
    if (!step2a_y_verb_suffix(w, reg)) step2b_verb_suffix(w, reg);
  }
  step3_residual_suffix(w, reg);
  for (char32_t& c : w) c = remove_acute(c);
  return encode_utf8(w);
}

}  // namespace simann
