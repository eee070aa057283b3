// HTTP resolve service. Index, gazetteer and model are loaded once and
// shared immutably across request threads.
//
//   GET  /healthz  -> {"status": "ready"}
//   POST /resolve  -> canonical document in, predictions with per-candidate
//                     probabilities out
#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "topores/corpus.hpp"
#include "topores/pipeline.hpp"
#include "topores/predictions.hpp"

namespace topores {

struct ServiceState {
    const Gazetteer* gazetteer = nullptr;
    const NameIndex* index = nullptr;
    const RerankerModel* model = nullptr;  // null: generator-only
    size_t k = 20;
    ContextMode mode = ContextMode::TwoStage;
};

inline void register_routes(httplib::Server& server, const ServiceState& state) {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"status\":\"ready\"}", "application/json");
    });

    server.Post("/resolve", [state](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            res.status = 400;
            res.set_content("{\"error\":\"body must be a canonical document\"}",
                            "application/json");
            return;
        }
        AnnotatedDocument doc;
        doc.doc_id = j.value("doc_id", "request");
        doc.text = j.value("text", "");
        std::vector<std::string> mentions;
        for (const auto& jm : j.value("mentions", nlohmann::json::array())) {
            MentionAnnotation m;
            m.start = jm.value("start", size_t{0});
            m.end = jm.value("end", size_t{0});
            m.surface = jm.value("surface", "");
            doc.mentions.push_back(m);
            mentions.push_back(doc.mentions.back().surface);
        }
        auto results = resolve_document(*state.index, *state.gazetteer, state.model,
                                        mentions, state.k, state.mode);
        PredictedDocument pred = make_predicted_document(doc, results);
        res.set_content(predicted_document_to_json(pred).dump(), "application/json");
    });
}

} // namespace topores
