// String primitives shared by the name index and the reranker features:
// UTF-8 decoding, casefolding, tokenization, character trigrams, and
// Levenshtein edit distance.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace topores {

namespace detail {

inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

} // namespace detail

// Decodes UTF-8. Invalid bytes are passed through as their Latin-1 value
// rather than dropped, so malformed gazetteer rows stay searchable.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            i += 1;
        } else if ((b0 >> 5) == 0x06 && i + 1 < s.size() &&
                   detail::is_continuation(s[i + 1])) {
            out.push_back(((b0 & 0x1Fu) << 6) |
                          (static_cast<unsigned char>(s[i + 1]) & 0x3Fu));
            i += 2;
        } else if ((b0 >> 4) == 0x0E && i + 2 < s.size() &&
                   detail::is_continuation(s[i + 1]) &&
                   detail::is_continuation(s[i + 2])) {
            out.push_back(((b0 & 0x0Fu) << 12) |
                          ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
                          (static_cast<unsigned char>(s[i + 2]) & 0x3Fu));
            i += 3;
        } else if ((b0 >> 3) == 0x1E && i + 3 < s.size() &&
                   detail::is_continuation(s[i + 1]) &&
                   detail::is_continuation(s[i + 2]) &&
                   detail::is_continuation(s[i + 3])) {
            out.push_back(((b0 & 0x07u) << 18) |
                          ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12) |
                          ((static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6) |
                          (static_cast<unsigned char>(s[i + 3]) & 0x3Fu));
            i += 4;
        } else {
            out.push_back(b0);
            i += 1;
        }
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

// Lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic; codepoints outside those ranges pass through unchanged.
inline char32_t fold_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp >= 0x139 && cp <= 0x147) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
    if (cp == 0x386) return 0x3AC;
    if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
    if (cp == 0x38C) return 0x3CC;
    if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
    if ((cp >= 0x391 && cp <= 0x3A1) || (cp >= 0x3A3 && cp <= 0x3AB)) {
        return cp + 0x20;
    }
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    return cp;
}

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0xA0: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

inline std::string casefold(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    for (char32_t& cp : cps) cp = fold_codepoint(cp);
    return encode_utf8(cps);
}

// Casefolded form with all whitespace removed; the comparison key for the
// Exact and Fuzzy match tiers.
inline std::u32string normalize_name_cps(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (!is_space_cp(cp)) out.push_back(fold_codepoint(cp));
    }
    return out;
}

inline std::string normalize_name(std::string_view s) {
    return encode_utf8(normalize_name_cps(s));
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

namespace detail {

inline bool is_token_cp(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
               (cp >= U'A' && cp <= U'Z');
    }
    return !is_space_cp(cp);
}

inline void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace detail

// Splits on any non-alphanumeric codepoint and casefolds; returns the token
// set (sorted, unique). Approximates a standard word tokenizer.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    std::vector<std::string> out;
    std::string cur;
    for (char32_t cp : cps) {
        if (detail::is_token_cp(cp)) {
            append_utf8(cur, fold_codepoint(cp));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    detail::sort_unique(out);
    return out;
}

// Character 3-grams of the casefolded string, unpadded: strings shorter than
// three codepoints yield no trigrams.
inline std::vector<std::string> trigram_set(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    for (char32_t& cp : cps) cp = fold_codepoint(cp);
    std::vector<std::string> out;
    if (cps.size() >= 3) {
        out.reserve(cps.size() - 2);
        for (size_t i = 0; i + 3 <= cps.size(); ++i) {
            out.push_back(encode_utf8(std::u32string_view(cps).substr(i, 3)));
        }
    }
    detail::sort_unique(out);
    return out;
}

// Concatenation of the capital letters of the original-case string.
// A codepoint counts as capital when casefolding changes it.
inline std::string capitals_key(std::string_view s) {
    std::string out;
    for (char32_t cp : decode_utf8(s)) {
        if (fold_codepoint(cp) != cp) append_utf8(out, cp);
    }
    return out;
}

inline size_t capitals_count(std::string_view s) {
    size_t n = 0;
    for (char32_t cp : decode_utf8(s)) {
        if (fold_codepoint(cp) != cp) ++n;
    }
    return n;
}

// Plain full-matrix Levenshtein distance over codepoints.
inline size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> row(n + 1);
    std::iota(row.begin(), row.end(), size_t{0});
    for (size_t j = 1; j <= m; ++j) {
        size_t diag = row[0];
        row[0] = j;
        for (size_t i = 1; i <= n; ++i) {
            size_t up = row[i];
            size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
            row[i] = std::min({row[i - 1] + 1, up + 1, diag + cost});
            diag = up;
        }
    }
    return row[n];
}

inline size_t levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(std::u32string_view(decode_utf8(a)),
                       std::u32string_view(decode_utf8(b)));
}

// Early-exit variant: returns the distance when it is <= max_d, otherwise
// max_d + 1. Used by the fuzzy tier scan over length buckets.
inline size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b,
                                  size_t max_d) {
    const size_t n = a.size(), m = b.size();
    const size_t big = max_d + 1;
    if (n > m) return levenshtein_bounded(b, a, max_d);
    if (m - n > max_d) return big;
    if (n == 0) return m <= max_d ? m : big;
    std::vector<size_t> row(n + 1);
    std::iota(row.begin(), row.end(), size_t{0});
    for (size_t j = 1; j <= m; ++j) {
        size_t diag = row[0];
        row[0] = j;
        size_t row_min = row[0];
        for (size_t i = 1; i <= n; ++i) {
            size_t up = row[i];
            size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
            row[i] = std::min({row[i - 1] + 1, up + 1, diag + cost});
            diag = up;
            row_min = std::min(row_min, row[i]);
        }
        if (row_min > max_d) return big;
    }
    return row[n] <= max_d ? row[n] : big;
}

inline bool sorted_intersects(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else return true;
    }
    return false;
}

inline double jaccard(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else { ++inter; ++ia; ++ib; }
    }
    return static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size() - inter);
}

} // namespace topores
