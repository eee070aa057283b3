// Shared fixture loading and synthetic corpus builders for the test suites.
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "topores/corpus.hpp"
#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/reranker.hpp"

#ifndef TOPORES_FIXTURE_DIR
#error "TOPORES_FIXTURE_DIR must be defined by the build"
#endif

namespace topores::test {

inline std::string fixture_path(const std::string& rel) {
    return std::string(TOPORES_FIXTURE_DIR) + "/" + rel;
}

inline std::ifstream open_fixture(const std::string& rel) {
    std::ifstream in(fixture_path(rel), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture: " + rel);
    return in;
}

inline Gazetteer load_mini_gazetteer(bool with_feature_codes = true) {
    std::ifstream main_in = open_fixture("mini/geonames.tsv");
    std::ifstream alt_in = open_fixture("mini/alternates.tsv");
    std::ifstream adj_in = open_fixture("mini/adjectival.tsv");
    if (with_feature_codes) {
        std::ifstream fc_in = open_fixture("mini/feature_codes.tsv");
        return parse_gazetteer(main_in, &alt_in, &adj_in, &fc_in);
    }
    return parse_gazetteer(main_in, &alt_in, &adj_in, nullptr);
}

inline std::vector<AnnotatedDocument> load_docs_fixture(const std::string& rel,
                                                        LoadStats* stats = nullptr) {
    std::ifstream in = open_fixture(rel);
    return load_canonical(in, stats);
}

// Minimal programmatic gazetteer rows for constructed corpora.
struct EntrySpec {
    int64_t id;
    std::string name;
    std::string feature_class;
    std::string feature_code;
    std::string country;
    std::string admin1;
    std::string admin2;
    int64_t population;
    double lat = 0.0;
    double lon = 0.0;
    std::vector<std::string> synonyms;
};

inline Gazetteer make_gazetteer(const std::vector<EntrySpec>& specs) {
    Gazetteer g;
    std::vector<std::string> inventory;
    auto ordinal = [&](const std::string& code) {
        for (size_t i = 0; i < inventory.size(); ++i) {
            if (inventory[i] == code) return static_cast<int32_t>(i);
        }
        inventory.push_back(code);
        return static_cast<int32_t>(inventory.size() - 1);
    };
    for (const EntrySpec& s : specs) {
        GeoEntry e;
        e.id = s.id;
        e.canonical_name = s.name;
        e.synonyms = s.synonyms;
        e.latitude = s.lat;
        e.longitude = s.lon;
        e.population = s.population;
        e.feature_class = s.feature_class;
        e.feature_code = s.feature_code;
        e.feature_ordinal = ordinal(s.feature_code);
        e.country_code = s.country;
        e.admin1_code = s.admin1;
        e.admin2_code = s.admin2;
        g.entries.push_back(std::move(e));
    }
    g.feature_inventory = inventory;
    std::sort(g.entries.begin(), g.entries.end(),
              [](const GeoEntry& a, const GeoEntry& b) { return a.id < b.id; });
    g.reindex();
    return g;
}

// Ambiguity corpus: n_groups place names, each shared by four entries whose
// populations descend; the gold entry is the one with feature code PPLA,
// planted at population rank (group % 4). A population-only baseline gets
// roughly a quarter of them right; a reranker that reads the type feature
// can get them all.
struct AmbiguityCorpus {
    Gazetteer gazetteer;
    std::vector<AnnotatedDocument> docs;  // one doc per group, one mention
};

inline AmbiguityCorpus make_ambiguity_corpus(size_t n_groups) {
    std::vector<EntrySpec> specs;
    std::vector<AnnotatedDocument> docs;
    const int64_t pops[4] = {1000000, 400000, 90000, 20000};
    for (size_t gi = 0; gi < n_groups; ++gi) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "Granton%03zu", gi);
        std::string name(buf);
        const size_t gold_rank = gi % 4;
        int64_t gold_id = 0;
        for (size_t r = 0; r < 4; ++r) {
            EntrySpec s;
            s.id = static_cast<int64_t>(100000 + gi * 10 + r);
            s.name = name;
            s.feature_class = "P";
            s.feature_code = (r == gold_rank) ? "PPLA" : "PPL";
            s.country = "XX";
            s.population = pops[r];
            s.lat = static_cast<double>(gi % 90);
            s.lon = static_cast<double>(r);
            specs.push_back(std::move(s));
            if (r == gold_rank) gold_id = 100000 + static_cast<int64_t>(gi) * 10 + r;
        }
        AnnotatedDocument doc;
        doc.doc_id = "amb" + std::to_string(gi);
        doc.text = name + " hosted the fair.";
        MentionAnnotation m;
        m.start = 0;
        m.end = name.size();
        m.surface = name;
        m.gold_id = gold_id;
        doc.mentions.push_back(std::move(m));
        docs.push_back(std::move(doc));
    }
    AmbiguityCorpus out;
    out.gazetteer = make_gazetteer(specs);
    out.docs = std::move(docs);
    return out;
}

// Context corpus: ten uniquely named states under country XX and one city
// name ("Riverton") shared by a city in every state. The city in state 07
// dominates by population; every document pairs a state mention with a
// Riverton mention whose gold is the city in that state. Context resolves
// it; population alone picks state 07's city.
struct ContextCorpus {
    Gazetteer gazetteer;
    std::vector<AnnotatedDocument> docs;
    static constexpr size_t kStates = 10;
    static constexpr size_t kDominant = 7;  // 1-based state number
};

inline int64_t context_state_id(size_t state_no) { return 200000 + static_cast<int64_t>(state_no); }
inline int64_t context_city_id(size_t state_no) { return 300000 + static_cast<int64_t>(state_no); }

inline ContextCorpus make_context_corpus() {
    static const char* state_names[ContextCorpus::kStates] = {
        "Arlenshire", "Bordovia", "Carminia", "Dunharrow", "Elmsworth",
        "Farrowdale", "Gavelton", "Harrowgate", "Ilvermont", "Jorvikland"};
    std::vector<EntrySpec> specs;
    {
        EntrySpec country;
        country.id = 199999;
        country.name = "Xanadu";
        country.feature_class = "A";
        country.feature_code = "PCLI";
        country.country = "XX";
        country.population = 20000000;
        specs.push_back(std::move(country));
    }
    for (size_t s = 1; s <= ContextCorpus::kStates; ++s) {
        char code[3];
        std::snprintf(code, sizeof(code), "%02zu", s);
        EntrySpec st;
        st.id = context_state_id(s);
        st.name = state_names[s - 1];
        st.feature_class = "A";
        st.feature_code = "ADM1";
        st.country = "XX";
        st.admin1 = code;
        st.population = 1000000 + static_cast<int64_t>(s);
        specs.push_back(std::move(st));

        EntrySpec city;
        city.id = context_city_id(s);
        city.name = "Riverton";
        city.feature_class = "P";
        city.feature_code = "PPL";
        city.country = "XX";
        city.admin1 = code;
        city.population = (s == ContextCorpus::kDominant) ? 800000
                                                          : static_cast<int64_t>(1000 * s);
        specs.push_back(std::move(city));
    }
    ContextCorpus out;
    out.gazetteer = make_gazetteer(specs);
    for (size_t s = 1; s <= ContextCorpus::kStates; ++s) {
        if (s == ContextCorpus::kDominant) continue;  // gold must be population-dominated
        AnnotatedDocument doc;
        doc.doc_id = "ctx" + std::to_string(s);
        std::string state(state_names[s - 1]);
        doc.text = "Crews in " + state + " repaired the bridge at Riverton overnight.";
        MentionAnnotation ms;
        ms.start = 9;
        ms.end = 9 + state.size();
        ms.surface = state;
        ms.gold_id = context_state_id(s);
        doc.mentions.push_back(std::move(ms));
        MentionAnnotation mc;
        mc.start = doc.text.find("Riverton");
        mc.end = mc.start + 8;
        mc.surface = "Riverton";
        mc.gold_id = context_city_id(s);
        doc.mentions.push_back(std::move(mc));
        out.docs.push_back(std::move(doc));
    }
    return out;
}

} // namespace topores::test
