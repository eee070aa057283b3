// Prediction records: the line-delimited JSON emitted by resolution and
// consumed by evaluation, plus assembly of the full evaluation report.
#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "topores/corpus.hpp"
#include "topores/gazetteer.hpp"
#include "topores/metrics.hpp"
#include "topores/pipeline.hpp"

namespace topores {

struct PredictionRecord {
    size_t start = 0;
    size_t end = 0;
    std::string surface;
    std::optional<int64_t> pred_id;
    std::optional<GeoPoint> pred_point;
    int stage = 2;
    std::vector<std::pair<int64_t, double>> candidates;  // (entry id, probability)
};

struct PredictedDocument {
    std::string doc_id;
    std::vector<PredictionRecord> mentions;
};

inline PredictedDocument make_predicted_document(
    const AnnotatedDocument& doc, const std::vector<ResolutionResult>& results) {
    PredictedDocument out;
    out.doc_id = doc.doc_id;
    out.mentions.resize(results.size());
    for (size_t i = 0; i < results.size(); ++i) {
        const ResolutionResult& r = results[i];
        PredictionRecord& p = out.mentions[i];
        if (i < doc.mentions.size()) {
            p.start = doc.mentions[i].start;
            p.end = doc.mentions[i].end;
        }
        p.surface = r.mention;
        p.stage = r.stage;
        if (r.predicted != nullptr) {
            p.pred_id = r.predicted->id;
            p.pred_point = GeoPoint{r.predicted->latitude, r.predicted->longitude};
        }
        p.candidates.reserve(r.candidate_probabilities.size());
        for (const auto& [entry, prob] : r.candidate_probabilities) {
            p.candidates.emplace_back(entry->id, prob);
        }
    }
    return out;
}

inline nlohmann::json predicted_document_to_json(const PredictedDocument& doc) {
    nlohmann::json j;
    j["doc_id"] = doc.doc_id;
    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& m : doc.mentions) {
        nlohmann::json jm;
        jm["start"] = m.start;
        jm["end"] = m.end;
        jm["surface"] = m.surface;
        jm["pred_id"] = m.pred_id ? nlohmann::json(*m.pred_id) : nlohmann::json();
        jm["lat"] = m.pred_point ? nlohmann::json(m.pred_point->latitude) : nlohmann::json();
        jm["lon"] = m.pred_point ? nlohmann::json(m.pred_point->longitude) : nlohmann::json();
        jm["stage"] = m.stage;
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& [id, prob] : m.candidates) {
            cands.push_back({{"id", id}, {"prob", prob}});
        }
        jm["candidates"] = std::move(cands);
        mentions.push_back(std::move(jm));
    }
    j["mentions"] = std::move(mentions);
    return j;
}

inline PredictedDocument predicted_document_from_json(const nlohmann::json& j) {
    PredictedDocument doc;
    doc.doc_id = j.value("doc_id", "");
    for (const auto& jm : j.value("mentions", nlohmann::json::array())) {
        PredictionRecord m;
        m.start = jm.value("start", size_t{0});
        m.end = jm.value("end", size_t{0});
        m.surface = jm.value("surface", "");
        if (jm.contains("pred_id") && jm["pred_id"].is_number()) {
            m.pred_id = jm["pred_id"].get<int64_t>();
        }
        if (jm.contains("lat") && jm["lat"].is_number() && jm.contains("lon") &&
            jm["lon"].is_number()) {
            m.pred_point = GeoPoint{jm["lat"].get<double>(), jm["lon"].get<double>()};
        }
        m.stage = jm.value("stage", 2);
        for (const auto& jc : jm.value("candidates", nlohmann::json::array())) {
            if (jc.contains("id") && jc["id"].is_number()) {
                m.candidates.emplace_back(jc["id"].get<int64_t>(),
                                          jc.value("prob", 0.0));
            }
        }
        doc.mentions.push_back(std::move(m));
    }
    return doc;
}

inline void save_predictions(std::ostream& out,
                             const std::vector<PredictedDocument>& docs) {
    for (const auto& doc : docs) out << predicted_document_to_json(doc).dump() << "\n";
}

inline std::vector<PredictedDocument> load_predictions(std::istream& in) {
    std::vector<PredictedDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error("unparseable prediction line");
        }
        docs.push_back(predicted_document_from_json(j));
    }
    return docs;
}

// Joins gold documents with predictions by doc_id (mentions match by
// position) and computes the full report. Gold coordinates fall back to the
// gazetteer entry of the gold id when the annotation has no explicit point.
inline EvalReport build_eval_report(const std::vector<AnnotatedDocument>& gold_docs,
                                    const std::vector<PredictedDocument>& pred_docs,
                                    const Gazetteer& g,
                                    const std::vector<size_t>& ks = {1, 5, 10, 20}) {
    std::map<std::string, const PredictedDocument*> by_id;
    for (const auto& p : pred_docs) by_id[p.doc_id] = &p;

    EvalReport report;
    std::vector<std::optional<int64_t>> pred_ids, gold_ids;
    std::vector<std::optional<double>> errors;       // slot per mention with a known gold point
    std::vector<double> made_errors;                 // errors of made predictions
    std::map<size_t, size_t> recall_hits;
    size_t recall_total = 0;

    for (const auto& doc : gold_docs) {
        auto it = by_id.find(doc.doc_id);
        const PredictedDocument* pd = it == by_id.end() ? nullptr : it->second;
        if (pd != nullptr && pd->mentions.size() != doc.mentions.size()) {
            throw std::runtime_error("prediction/gold mention count mismatch in document '" +
                                     doc.doc_id + "'");
        }
        for (size_t i = 0; i < doc.mentions.size(); ++i) {
            const MentionAnnotation& gm = doc.mentions[i];
            const PredictionRecord* pm =
                pd != nullptr && i < pd->mentions.size() ? &pd->mentions[i] : nullptr;
            ++report.n;
            gold_ids.push_back(gm.gold_id);
            pred_ids.push_back(pm != nullptr ? pm->pred_id : std::nullopt);
            if (pm == nullptr || !pm->pred_id) ++report.absent_predictions;

            std::optional<GeoPoint> gold_pt = gm.gold_point;
            if (!gold_pt && gm.gold_id) {
                if (const GeoEntry* e = g.lookup(*gm.gold_id)) {
                    gold_pt = GeoPoint{e->latitude, e->longitude};
                }
            }
            if (!gold_pt) {
                ++report.missing_gold_points;
            } else if (pm != nullptr && pm->pred_point) {
                double err = haversine_km(*pm->pred_point, *gold_pt);
                errors.push_back(err);
                made_errors.push_back(err);
            } else {
                errors.push_back(std::nullopt);
            }

            if (gm.gold_id && pm != nullptr) {
                ++recall_total;
                for (size_t k : ks) {
                    bool hit = false;
                    for (size_t c = 0; c < pm->candidates.size() && c < k; ++c) {
                        if (pm->candidates[c].first == *gm.gold_id) { hit = true; break; }
                    }
                    if (hit) ++recall_hits[k];
                }
            }
        }
    }

    report.accuracy = accuracy(pred_ids, gold_ids);
    report.accuracy_at_161 = accuracy_at_161(errors);
    report.mean_error_km = mean_error_km(errors);
    if (!made_errors.empty()) {
        report.auc = auc_error(made_errors);
        report.auc_raw = auc_error_raw(made_errors);
    }
    report.per_type = per_type_report(pred_ids, gold_ids, g);
    if (recall_total > 0) {
        for (size_t k : ks) {
            report.recall_at_k[k] = static_cast<double>(recall_hits[k]) /
                                    static_cast<double>(recall_total);
        }
    }
    return report;
}

} // namespace topores
