// Tiered name index and sieve-based candidate generator. One record is
// indexed per (name, entry) pair; a mention is searched tier by tier
// (Exact, Fuzzy, CharacterNgram, Token, Abbreviation, CountryCode) and the
// first non-empty tier wins. Matching entries are ordered by population.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topores/gazetteer.hpp"
#include "topores/text.hpp"

namespace topores {

enum class Tier : uint8_t {
    Exact = 0,
    Fuzzy = 1,
    CharacterNgram = 2,
    Token = 3,
    Abbreviation = 4,
    CountryCode = 5,
};

inline constexpr std::array<Tier, 6> kTierOrder = {
    Tier::Exact,         Tier::Fuzzy,        Tier::CharacterNgram,
    Tier::Token,         Tier::Abbreviation, Tier::CountryCode,
};

inline constexpr const char* tier_name(Tier t) {
    switch (t) {
        case Tier::Exact: return "exact";
        case Tier::Fuzzy: return "fuzzy";
        case Tier::CharacterNgram: return "char_ngram";
        case Tier::Token: return "token";
        case Tier::Abbreviation: return "abbreviation";
        case Tier::CountryCode: return "country_code";
    }
    return "?";
}

// Fuzzy tier radius: up to two character edits.
inline constexpr size_t kFuzzyMaxEdits = 2;
// Abbreviation keys need at least this many capital letters.
inline constexpr size_t kMinAbbreviationLen = 2;

struct NameRecord {
    std::string name;          // original case, as stored in the gazetteer
    std::string normalized;    // casefolded, whitespace stripped
    std::u32string norm_cps;   // codepoints of normalized
    uint32_t entry_index = 0;  // into Gazetteer::entries
};

struct Candidate {
    const GeoEntry* entry = nullptr;
    Tier matched_tier = Tier::Exact;
    std::string matched_name;
};

struct GenerationResult {
    std::vector<Candidate> candidates;
    Tier tier = Tier::Exact;    // tier the sieve stopped at; meaningful when non-empty
    bool empty_mention = false; // diagnostic: mention was empty after trimming
};

// Pure per-tier match predicate between one gazetteer name and a mention.
// Used directly by brute-force oracles; the index reproduces its semantics
// through posting lists.
inline bool match_tier(std::string_view name, std::string_view mention,
                       Tier tier, bool entry_is_country,
                       std::string_view entry_country_code) {
    const std::string m = trim(mention);
    if (m.empty()) return false;
    switch (tier) {
        case Tier::Exact: {
            std::string nm = normalize_name(m);
            return !nm.empty() && nm == normalize_name(name);
        }
        case Tier::Fuzzy: {
            size_t d = levenshtein(normalize_name_cps(m), normalize_name_cps(name));
            return d >= 1 && d <= kFuzzyMaxEdits;
        }
        case Tier::CharacterNgram:
            return sorted_intersects(trigram_set(m), trigram_set(name));
        case Tier::Token:
            return sorted_intersects(tokenize(m), tokenize(name));
        case Tier::Abbreviation:
            return capitals_count(name) >= kMinAbbreviationLen &&
                   m == capitals_key(name);
        case Tier::CountryCode:
            return entry_is_country && !entry_country_code.empty() &&
                   casefold(m) == casefold(entry_country_code);
    }
    return false;
}

class NameIndex {
public:
    std::vector<NameRecord> records;
    std::unordered_map<std::string, std::vector<uint32_t>> exact_map;        // normalized -> record ids
    std::unordered_map<std::string, std::vector<uint32_t>> trigram_postings; // trigram -> record ids
    std::unordered_map<std::string, std::vector<uint32_t>> token_postings;   // token -> record ids
    std::unordered_map<std::string, std::vector<uint32_t>> abbreviation_map; // capitals key -> record ids
    std::unordered_map<std::string, std::vector<uint32_t>> country_code_map; // casefolded code -> entry indices
    std::vector<std::vector<uint32_t>> length_buckets; // normalized length -> record ids, for the fuzzy scan

    void add_record(const Gazetteer& g, uint32_t entry_index, const std::string& name) {
        NameRecord rec;
        rec.name = name;
        rec.norm_cps = normalize_name_cps(name);
        rec.normalized = encode_utf8(rec.norm_cps);
        rec.entry_index = entry_index;
        const uint32_t rid = static_cast<uint32_t>(records.size());

        if (!rec.normalized.empty()) {
            exact_map[rec.normalized].push_back(rid);
            size_t len = rec.norm_cps.size();
            if (length_buckets.size() <= len) length_buckets.resize(len + 1);
            length_buckets[len].push_back(rid);
        }
        for (const auto& tg : trigram_set(name)) trigram_postings[tg].push_back(rid);
        for (const auto& tok : tokenize(name)) token_postings[tok].push_back(rid);
        if (capitals_count(name) >= kMinAbbreviationLen) {
            abbreviation_map[capitals_key(name)].push_back(rid);
        }
        (void)g;
        records.push_back(std::move(rec));
    }
};

// Indexes every name (canonical plus synonyms, deduplicated per entry) of
// every gazetteer entry. Country codes are mapped separately and are not
// indexed as names.
inline NameIndex build_index(const Gazetteer& g) {
    NameIndex idx;
    for (uint32_t ei = 0; ei < g.entries.size(); ++ei) {
        const GeoEntry& e = g.entries[ei];
        std::vector<std::string_view> names;
        names.push_back(e.canonical_name);
        for (const auto& s : e.synonyms) {
            bool dup = false;
            for (const auto& n : names) {
                if (n == s) { dup = true; break; }
            }
            if (!dup) names.push_back(s);
        }
        for (const auto& n : names) idx.add_record(g, ei, std::string(n));
        if (e.is_country() && !e.country_code.empty()) {
            idx.country_code_map[casefold(e.country_code)].push_back(ei);
        }
    }
    return idx;
}

namespace detail {

// entry index -> earliest matching record id (deterministic matched name)
using TierHits = std::unordered_map<uint32_t, uint32_t>;

inline void add_hit(TierHits& hits, uint32_t entry_index, uint32_t rid) {
    auto [it, inserted] = hits.emplace(entry_index, rid);
    if (!inserted && rid < it->second) it->second = rid;
}

inline void collect_postings(
    const std::unordered_map<std::string, std::vector<uint32_t>>& postings,
    const std::vector<std::string>& keys, const NameIndex& idx, TierHits& hits) {
    for (const auto& key : keys) {
        auto it = postings.find(key);
        if (it == postings.end()) continue;
        for (uint32_t rid : it->second) {
            add_hit(hits, idx.records[rid].entry_index, rid);
        }
    }
}

} // namespace detail

// Algorithm: try each tier in order, stop at the first tier with hits,
// deduplicate by entry, sort by population descending (ties by ascending
// entry id), return the top k.
inline GenerationResult generate(const NameIndex& idx, const Gazetteer& g,
                                 std::string_view mention, size_t k) {
    GenerationResult result;
    const std::string m = trim(mention);
    if (m.empty()) {
        result.empty_mention = true;
        return result;
    }
    if (k == 0) return result;

    const std::u32string m_cps = normalize_name_cps(m);
    const std::string m_norm = encode_utf8(m_cps);

    detail::TierHits hits;
    bool country_tier = false;
    for (Tier tier : kTierOrder) {
        hits.clear();
        country_tier = false;
        switch (tier) {
            case Tier::Exact: {
                auto it = idx.exact_map.find(m_norm);
                if (it != idx.exact_map.end() && !m_norm.empty()) {
                    for (uint32_t rid : it->second) {
                        detail::add_hit(hits, idx.records[rid].entry_index, rid);
                    }
                }
                break;
            }
            case Tier::Fuzzy: {
                if (m_cps.empty()) break;
                size_t lo = m_cps.size() > kFuzzyMaxEdits ? m_cps.size() - kFuzzyMaxEdits : 0;
                size_t hi = m_cps.size() + kFuzzyMaxEdits;
                for (size_t len = lo; len <= hi && len < idx.length_buckets.size(); ++len) {
                    for (uint32_t rid : idx.length_buckets[len]) {
                        size_t d = levenshtein_bounded(m_cps, idx.records[rid].norm_cps,
                                                       kFuzzyMaxEdits);
                        if (d >= 1 && d <= kFuzzyMaxEdits) {
                            detail::add_hit(hits, idx.records[rid].entry_index, rid);
                        }
                    }
                }
                break;
            }
            case Tier::CharacterNgram:
                detail::collect_postings(idx.trigram_postings, trigram_set(m), idx, hits);
                break;
            case Tier::Token:
                detail::collect_postings(idx.token_postings, tokenize(m), idx, hits);
                break;
            case Tier::Abbreviation: {
                auto it = idx.abbreviation_map.find(m);
                if (it != idx.abbreviation_map.end()) {
                    for (uint32_t rid : it->second) {
                        detail::add_hit(hits, idx.records[rid].entry_index, rid);
                    }
                }
                break;
            }
            case Tier::CountryCode: {
                auto it = idx.country_code_map.find(casefold(m));
                if (it != idx.country_code_map.end()) {
                    country_tier = true;
                    for (uint32_t ei : it->second) hits.emplace(ei, 0);
                }
                break;
            }
        }
        if (!hits.empty()) {
            result.tier = tier;
            break;
        }
    }
    if (hits.empty()) return result;

    result.candidates.reserve(hits.size());
    for (const auto& [entry_index, rid] : hits) {
        Candidate c;
        c.entry = &g.entries[entry_index];
        c.matched_tier = result.tier;
        c.matched_name = country_tier ? c.entry->country_code : idx.records[rid].name;
        result.candidates.push_back(std::move(c));
    }
    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.entry->population != b.entry->population) {
                      return a.entry->population > b.entry->population;
                  }
                  return a.entry->id < b.entry->id;
              });
    if (result.candidates.size() > k) result.candidates.resize(k);
    return result;
}

struct LabeledMention {
    std::string mention;
    int64_t gold_id = 0;
};

// Fraction of mentions whose gold entry appears in the top k candidates.
inline double recall_at_k(const NameIndex& idx, const Gazetteer& g,
                          const std::vector<LabeledMention>& mentions, size_t k) {
    if (mentions.empty()) return 0.0;
    size_t hit = 0;
    for (const auto& lm : mentions) {
        GenerationResult r = generate(idx, g, lm.mention, k);
        for (const Candidate& c : r.candidates) {
            if (c.entry->id == lm.gold_id) { ++hit; break; }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(mentions.size());
}

} // namespace topores
