// Annotated corpus handling: the line-delimited JSON interchange format,
// document-level train/dev/test splitting, and assembly of reranker
// training instances from generator output.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/metrics.hpp"
#include "topores/pipeline.hpp"
#include "topores/reranker.hpp"
#include "topores/rng.hpp"

namespace topores {

struct MentionAnnotation {
    size_t start = 0;  // byte offsets into the document text
    size_t end = 0;
    std::string surface;
    std::optional<int64_t> gold_id;
    std::optional<GeoPoint> gold_point;
};

struct AnnotatedDocument {
    std::string doc_id;
    std::string text;
    std::vector<MentionAnnotation> mentions;
};

struct LoadStats {
    size_t docs_loaded = 0;
    size_t docs_skipped = 0;
    size_t mentions_loaded = 0;
    size_t mentions_skipped = 0;
    std::vector<std::string> diagnostics;
};

// One JSON document per line:
//   {"doc_id": str, "text": str, "mentions": [{"start": int, "end": int,
//    "surface": str, "gold_id": int|null, "lat": float|null, "lon": float|null}]}
// Mentions whose span does not reproduce the surface, or which overlap an
// earlier accepted mention, are skipped with a diagnostic.
inline std::vector<AnnotatedDocument> load_canonical(std::istream& in,
                                                     LoadStats* stats = nullptr) {
    LoadStats local;
    LoadStats& st = stats != nullptr ? *stats : local;
    std::vector<AnnotatedDocument> docs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text")) {
            ++st.docs_skipped;
            st.diagnostics.push_back("line " + std::to_string(line_no) +
                                     ": unparseable document record");
            continue;
        }
        AnnotatedDocument doc;
        std::vector<std::pair<size_t, size_t>> taken;
        try {
            doc.doc_id = j.value("doc_id", "doc" + std::to_string(line_no));
            doc.text = j.value("text", "");
            for (const auto& jm : j.value("mentions", nlohmann::json::array())) {
                MentionAnnotation m;
                bool ok = jm.is_object() && jm.value("start", nlohmann::json()).is_number_unsigned() &&
                          jm.value("end", nlohmann::json()).is_number_unsigned() &&
                          jm.value("surface", nlohmann::json()).is_string();
                if (ok) {
                    m.start = jm["start"].get<size_t>();
                    m.end = jm["end"].get<size_t>();
                    m.surface = jm["surface"].get<std::string>();
                    if (jm.contains("gold_id") && jm["gold_id"].is_number()) {
                        m.gold_id = jm["gold_id"].get<int64_t>();
                    }
                    if (jm.contains("lat") && jm["lat"].is_number() &&
                        jm.contains("lon") && jm["lon"].is_number()) {
                        m.gold_point =
                            GeoPoint{jm["lat"].get<double>(), jm["lon"].get<double>()};
                    }
                    ok = m.start <= m.end && m.end <= doc.text.size() &&
                         doc.text.compare(m.start, m.end - m.start, m.surface) == 0;
                }
                if (ok) {
                    for (const auto& [s, e] : taken) {
                        if (m.start < e && s < m.end) { ok = false; break; }
                    }
                }
                if (!ok) {
                    ++st.mentions_skipped;
                    st.diagnostics.push_back(doc.doc_id + ": mention '" + m.surface +
                                             "' span invalid or overlapping, skipped");
                    continue;
                }
                taken.emplace_back(m.start, m.end);
                doc.mentions.push_back(std::move(m));
                ++st.mentions_loaded;
            }
        } catch (const nlohmann::json::exception&) {
            ++st.docs_skipped;
            st.diagnostics.push_back("line " + std::to_string(line_no) +
                                     ": malformed document record");
            continue;
        }
        docs.push_back(std::move(doc));
        ++st.docs_loaded;
    }
    return docs;
}

inline nlohmann::json document_to_json(const AnnotatedDocument& doc) {
    nlohmann::json j;
    j["doc_id"] = doc.doc_id;
    j["text"] = doc.text;
    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& m : doc.mentions) {
        nlohmann::json jm;
        jm["start"] = m.start;
        jm["end"] = m.end;
        jm["surface"] = m.surface;
        jm["gold_id"] = m.gold_id ? nlohmann::json(*m.gold_id) : nlohmann::json();
        jm["lat"] = m.gold_point ? nlohmann::json(m.gold_point->latitude) : nlohmann::json();
        jm["lon"] = m.gold_point ? nlohmann::json(m.gold_point->longitude) : nlohmann::json();
        mentions.push_back(std::move(jm));
    }
    j["mentions"] = std::move(mentions);
    return j;
}

inline void save_canonical(std::ostream& out,
                           const std::vector<AnnotatedDocument>& docs) {
    for (const auto& doc : docs) out << document_to_json(doc).dump() << "\n";
}

struct SplitResult {
    std::vector<AnnotatedDocument> train, dev, test;
};

// Document-level split. Sizes are floor(train_ratio*N) and floor(dev_ratio*N)
// with the test set taking the remainder, which reproduces the published
// 411/58/119, 140/20/40 and 82/11/25 splits for corpora of 588, 200 and 118
// articles at ratios 0.7/0.1/0.2.
inline SplitResult split_corpus(std::vector<AnnotatedDocument> docs,
                                std::array<double, 3> ratios, uint64_t seed) {
    if (docs.size() < 3) {
        throw std::invalid_argument("need at least 3 documents to split");
    }
    for (double r : ratios) {
        if (r <= 0.0) throw std::invalid_argument("split ratios must be positive");
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw std::invalid_argument("split ratios must sum to 1");
    }
    std::mt19937_64 rng(seed);
    shuffle_deterministic(docs, rng);
    const size_t n = docs.size();
    const size_t n_train = static_cast<size_t>(std::floor(ratios[0] * static_cast<double>(n)));
    const size_t n_dev = static_cast<size_t>(std::floor(ratios[1] * static_cast<double>(n)));
    SplitResult out;
    out.train.assign(docs.begin(), docs.begin() + n_train);
    out.dev.assign(docs.begin() + n_train, docs.begin() + n_train + n_dev);
    out.test.assign(docs.begin() + n_train + n_dev, docs.end());
    return out;
}

// Splits by explicit doc-id lists (one id per line per split file), for
// reproducing externally published split memberships.
inline SplitResult split_by_lists(const std::vector<AnnotatedDocument>& docs,
                                  const std::vector<std::string>& train_ids,
                                  const std::vector<std::string>& dev_ids,
                                  const std::vector<std::string>& test_ids) {
    SplitResult out;
    auto in_list = [](const std::vector<std::string>& ids, const std::string& id) {
        return std::find(ids.begin(), ids.end(), id) != ids.end();
    };
    for (const auto& doc : docs) {
        if (in_list(train_ids, doc.doc_id)) out.train.push_back(doc);
        else if (in_list(dev_ids, doc.doc_id)) out.dev.push_back(doc);
        else if (in_list(test_ids, doc.doc_id)) out.test.push_back(doc);
    }
    return out;
}

struct InstanceStats {
    size_t mentions = 0;
    size_t instances = 0;
    size_t excluded_no_gold_id = 0;
    size_t excluded_gold_not_generated = 0;

    size_t excluded() const { return excluded_no_gold_id + excluded_gold_not_generated; }
};

// Builds one training instance per mention whose gold entry was generated.
// With ContextMode::TwoStage, every instance carries the document context
// assembled from the gold country/ADM1-3 mentions of its document, mirroring
// the context available to the second resolution stage.
inline std::vector<RerankInstance> to_training_instances(
    const std::vector<AnnotatedDocument>& docs, const NameIndex& idx,
    const Gazetteer& g, size_t k, ContextMode mode = ContextMode::None,
    InstanceStats* stats = nullptr) {
    InstanceStats local;
    InstanceStats& st = stats != nullptr ? *stats : local;
    std::vector<RerankInstance> out;

    for (const auto& doc : docs) {
        ContextString doc_context;
        if (mode == ContextMode::TwoStage) {
            struct Code { int level; size_t first; std::string code; };
            std::vector<Code> collected;
            for (size_t i = 0; i < doc.mentions.size(); ++i) {
                const auto& m = doc.mentions[i];
                const GeoEntry* e = m.gold_id ? g.lookup(*m.gold_id) : nullptr;
                if (e == nullptr || !(e->is_country() || e->is_admin123())) continue;
                if (auto code = context_code(*e)) {
                    collected.push_back({detail::context_level(*e), i, std::move(*code)});
                }
            }
            std::stable_sort(collected.begin(), collected.end(),
                             [](const Code& a, const Code& b) {
                                 if (a.level != b.level) return a.level < b.level;
                                 return a.first < b.first;
                             });
            for (auto& c : collected) doc_context.add(std::move(c.code));
        }

        for (const auto& m : doc.mentions) {
            ++st.mentions;
            if (!m.gold_id) { ++st.excluded_no_gold_id; continue; }
            GenerationResult gen = generate(idx, g, m.surface, k);
            std::optional<size_t> gold_index;
            for (size_t i = 0; i < gen.candidates.size(); ++i) {
                if (gen.candidates[i].entry->id == *m.gold_id) { gold_index = i; break; }
            }
            if (!gold_index) { ++st.excluded_gold_not_generated; continue; }
            RerankInstance inst;
            inst.mention = m.surface;
            inst.candidates = std::move(gen.candidates);
            if (mode == ContextMode::TwoStage) inst.context = doc_context;
            inst.gold_index = gold_index;
            out.push_back(std::move(inst));
            ++st.instances;
        }
    }
    return out;
}

} // namespace topores
