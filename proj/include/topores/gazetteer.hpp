// In-memory gazetteer: entries parsed from GeoNames-format dump streams,
// the feature-type inventory, and adjectival country forms. Immutable once
// parsing finishes; safe for concurrent readers.
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topores/text.hpp"

namespace topores {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeatureType {
    std::string code;
    int32_t ordinal = -1;
};

struct GeoEntry {
    int64_t id = 0;
    std::string canonical_name;
    std::vector<std::string> synonyms;
    double latitude = 0.0;
    double longitude = 0.0;
    int64_t population = 0;
    std::string feature_class;   // single letter, may be empty
    std::string feature_code;    // e.g. PPLA2, ADM1, PCLI
    int32_t feature_ordinal = -1;
    std::string country_code;    // empty means absent
    std::string admin1_code;
    std::string admin2_code;
    std::string admin3_code;

    // Country-level record: feature class A with a PCL* code.
    bool is_country() const {
        return feature_class == "A" && feature_code.rfind("PCL", 0) == 0;
    }
    bool is_admin123() const {
        return feature_code == "ADM1" || feature_code == "ADM2" ||
               feature_code == "ADM3";
    }
};

struct ParseStats {
    uint64_t main_rows = 0, main_accepted = 0, main_skipped = 0;
    uint64_t alt_rows = 0, alt_accepted = 0, alt_skipped = 0;
    uint64_t adj_rows = 0, adj_accepted = 0, adj_skipped = 0;
};

class Gazetteer {
public:
    std::vector<GeoEntry> entries;                       // sorted by id
    std::vector<std::string> feature_inventory;          // ordinal -> code
    std::vector<std::pair<std::string, int64_t>> adjectival_forms; // form -> country id
    ParseStats stats;

    const GeoEntry* lookup(int64_t id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &entries[it->second];
    }

    size_t size() const { return entries.size(); }

    int32_t feature_ordinal(std::string_view code) const {
        auto it = feature_ordinals_.find(std::string(code));
        return it == feature_ordinals_.end() ? -1 : it->second;
    }

    std::optional<FeatureType> feature_type(std::string_view code) const {
        int32_t ord = feature_ordinal(code);
        if (ord < 0) return std::nullopt;
        return FeatureType{std::string(code), ord};
    }

    // Rebuilds lookup tables after entries/inventory are populated.
    void reindex() {
        by_id_.clear();
        by_id_.reserve(entries.size());
        for (size_t i = 0; i < entries.size(); ++i) by_id_[entries[i].id] = i;
        feature_ordinals_.clear();
        for (size_t i = 0; i < feature_inventory.size(); ++i) {
            feature_ordinals_[feature_inventory[i]] = static_cast<int32_t>(i);
        }
    }

private:
    std::unordered_map<int64_t, size_t> by_id_;
    std::unordered_map<std::string, int32_t> feature_ordinals_;
};

namespace detail {

inline std::vector<std::string_view> split_tsv(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

inline std::optional<int64_t> parse_i64(std::string_view s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    bool neg = false;
    if (s[0] == '-') { neg = true; i = 1; }
    if (i >= s.size()) return std::nullopt;
    int64_t v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
}

inline std::optional<double> parse_f64(std::string_view s) {
    if (s.empty()) return std::nullopt;
    try {
        size_t pos = 0;
        double v = std::stod(std::string(s), &pos);
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline void add_synonym(GeoEntry& e, std::string name) {
    if (name.empty()) return;
    for (const auto& s : e.synonyms) {
        if (s == name) return;
    }
    e.synonyms.push_back(std::move(name));
}

inline bool getline_any(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace detail

// Parses the 19-column GeoNames main table plus the alternate-names table
// and a two-column adjectival map. Malformed rows are counted and skipped.
// feature_codes, when given, fixes the type inventory (one code per line,
// optionally class-qualified as "A.ADM1"); codes seen only in the data are
// appended in first-occurrence order.
inline Gazetteer parse_gazetteer(std::istream& main_table,
                                 std::istream* alternate_names = nullptr,
                                 std::istream* adjectival_map = nullptr,
                                 std::istream* feature_codes = nullptr) {
    if (!main_table.good()) throw IngestError("cannot read gazetteer main table");

    Gazetteer g;
    std::unordered_map<std::string, int32_t> ordinals;
    auto ordinal_of = [&](std::string_view code, bool may_append) -> int32_t {
        auto it = ordinals.find(std::string(code));
        if (it != ordinals.end()) return it->second;
        if (!may_append) return -1;
        int32_t ord = static_cast<int32_t>(g.feature_inventory.size());
        g.feature_inventory.emplace_back(code);
        ordinals.emplace(std::string(code), ord);
        return ord;
    };

    if (feature_codes != nullptr) {
        if (!feature_codes->good()) throw IngestError("cannot read feature-code list");
        std::string line;
        while (detail::getline_any(*feature_codes, line)) {
            if (line.empty()) continue;
            auto cols = detail::split_tsv(line);
            std::string_view code = cols[0];
            size_t dot = code.find('.');
            if (dot != std::string_view::npos) code = code.substr(dot + 1);
            if (!code.empty()) ordinal_of(code, true);
        }
    }

    std::unordered_map<int64_t, size_t> seen_ids;
    std::string line;
    while (detail::getline_any(main_table, line)) {
        if (line.empty()) continue;
        ++g.stats.main_rows;
        auto cols = detail::split_tsv(line);
        if (cols.size() != 19) { ++g.stats.main_skipped; continue; }
        auto id = detail::parse_i64(cols[0]);
        auto lat = detail::parse_f64(cols[4]);
        auto lon = detail::parse_f64(cols[5]);
        if (!id || *id <= 0 || cols[1].empty() || !lat || !lon ||
            *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0 ||
            seen_ids.count(*id) != 0) {
            ++g.stats.main_skipped;
            continue;
        }
        GeoEntry e;
        e.id = *id;
        e.canonical_name = std::string(cols[1]);
        e.latitude = *lat;
        e.longitude = *lon;
        e.feature_class = std::string(cols[6]);
        e.feature_code = std::string(cols[7]);
        e.country_code = std::string(cols[8]);
        e.admin1_code = std::string(cols[10]);
        e.admin2_code = std::string(cols[11]);
        e.admin3_code = std::string(cols[12]);
        auto pop = detail::parse_i64(cols[14]);
        e.population = (pop && *pop > 0) ? *pop : 0;
        e.feature_ordinal = ordinal_of(e.feature_code, true);

        // Inline alternate names, comma separated.
        std::string_view alts = cols[3];
        size_t start = 0;
        while (start <= alts.size() && !alts.empty()) {
            size_t comma = alts.find(',', start);
            std::string_view one = (comma == std::string_view::npos)
                                       ? alts.substr(start)
                                       : alts.substr(start, comma - start);
            detail::add_synonym(e, trim(one));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }

        seen_ids.emplace(e.id, g.entries.size());
        g.entries.push_back(std::move(e));
        ++g.stats.main_accepted;
    }

    if (alternate_names != nullptr) {
        if (!alternate_names->good()) throw IngestError("cannot read alternate names");
        while (detail::getline_any(*alternate_names, line)) {
            if (line.empty()) continue;
            ++g.stats.alt_rows;
            auto cols = detail::split_tsv(line);
            if (cols.size() < 4) { ++g.stats.alt_skipped; continue; }
            auto id = detail::parse_i64(cols[1]);
            std::string name = trim(cols[3]);
            auto it = id ? seen_ids.find(*id) : seen_ids.end();
            if (!id || name.empty() || it == seen_ids.end()) {
                ++g.stats.alt_skipped;
                continue;
            }
            detail::add_synonym(g.entries[it->second], std::move(name));
            ++g.stats.alt_accepted;
        }
    }

    if (adjectival_map != nullptr) {
        if (!adjectival_map->good()) throw IngestError("cannot read adjectival map");
        while (detail::getline_any(*adjectival_map, line)) {
            if (line.empty()) continue;
            ++g.stats.adj_rows;
            auto cols = detail::split_tsv(line);
            std::string form = cols.empty() ? std::string() : trim(cols[0]);
            auto id = cols.size() >= 2 ? detail::parse_i64(cols[1]) : std::nullopt;
            auto it = id ? seen_ids.find(*id) : seen_ids.end();
            // Adjectival forms attach to country-class entries only.
            if (form.empty() || !id || it == seen_ids.end() ||
                !g.entries[it->second].is_country()) {
                ++g.stats.adj_skipped;
                continue;
            }
            detail::add_synonym(g.entries[it->second], form);
            g.adjectival_forms.emplace_back(std::move(form), *id);
            ++g.stats.adj_accepted;
        }
        std::sort(g.adjectival_forms.begin(), g.adjectival_forms.end());
        g.adjectival_forms.erase(
            std::unique(g.adjectival_forms.begin(), g.adjectival_forms.end()),
            g.adjectival_forms.end());
    }

    std::sort(g.entries.begin(), g.entries.end(),
              [](const GeoEntry& a, const GeoEntry& b) { return a.id < b.id; });
    g.reindex();
    return g;
}

// Administrative code chain [country, admin1, admin2, admin3] with absent
// levels omitted; a country entry contributes only its country code.
inline std::vector<std::string> admin_chain(const Gazetteer&, const GeoEntry& e) {
    std::vector<std::string> chain;
    if (e.is_country()) {
        if (!e.country_code.empty()) chain.push_back(e.country_code);
        return chain;
    }
    if (!e.country_code.empty()) chain.push_back(e.country_code);
    if (!e.admin1_code.empty()) chain.push_back(e.admin1_code);
    if (!e.admin2_code.empty()) chain.push_back(e.admin2_code);
    if (!e.admin3_code.empty()) chain.push_back(e.admin3_code);
    return chain;
}

// The single code identifying an entry at its own administrative level;
// defined for country-class and ADM1-3 entries.
inline std::optional<std::string> context_code(const GeoEntry& e) {
    std::string_view code;
    if (e.is_country()) code = e.country_code;
    else if (e.feature_code == "ADM1") code = e.admin1_code;
    else if (e.feature_code == "ADM2") code = e.admin2_code;
    else if (e.feature_code == "ADM3") code = e.admin3_code;
    else return std::nullopt;
    if (code.empty()) return std::nullopt;
    return std::string(code);
}

} // namespace topores
