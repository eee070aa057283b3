// End-to-end resolution: candidate generation, reranking, and the
// two-stage document pass. Stage one resolves every mention context-free
// and accepts predictions whose feature type is a country or an ADM1-3
// district; their codes form the context for stage two, which re-resolves
// the remaining mentions.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topores/context.hpp"
#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/reranker.hpp"

namespace topores {

enum class ContextMode { None, TwoStage };

inline std::optional<ContextMode> parse_context_mode(std::string_view s) {
    if (s == "none") return ContextMode::None;
    if (s == "2stage") return ContextMode::TwoStage;
    return std::nullopt;
}

struct ResolutionResult {
    size_t mention_index = 0;
    std::string mention;
    const GeoEntry* predicted = nullptr;
    int stage = 2;
    std::vector<std::pair<const GeoEntry*, double>> candidate_probabilities;
    bool empty_mention = false;
};

// Scores an instance to a probability vector. The default wraps the model;
// the bridge module substitutes an external process.
using ScoreFn = std::function<std::vector<double>(const RerankInstance&)>;

inline ScoreFn model_scorer(const RerankerModel* model) {
    return [model](const RerankInstance& inst) -> std::vector<double> {
        if (model == nullptr) {
            // Generator-only mode: uniform scores keep population order.
            return std::vector<double>(inst.candidates.size(),
                                       1.0 / static_cast<double>(inst.candidates.size()));
        }
        return score(*model, inst);
    };
}

inline ResolutionResult resolve_mention(const NameIndex& idx, const Gazetteer& g,
                                        const ScoreFn& scorer,
                                        std::string_view mention,
                                        const ContextString& context, size_t k) {
    ResolutionResult res;
    res.mention = std::string(mention);
    GenerationResult gen = generate(idx, g, mention, k);
    res.empty_mention = gen.empty_mention;
    if (gen.candidates.empty()) return res;

    RerankInstance inst{res.mention, std::move(gen.candidates), context, std::nullopt};
    std::vector<double> probs = scorer(inst);
    std::vector<size_t> order(inst.candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return probs[a] > probs[b]; });
    res.predicted = inst.candidates[order[0]].entry;
    res.candidate_probabilities.reserve(order.size());
    for (size_t i : order) {
        res.candidate_probabilities.emplace_back(inst.candidates[i].entry, probs[i]);
    }
    return res;
}

inline ResolutionResult resolve_mention(const NameIndex& idx, const Gazetteer& g,
                                        const RerankerModel* model,
                                        std::string_view mention,
                                        const ContextString& context, size_t k) {
    return resolve_mention(idx, g, model_scorer(model), mention, context, k);
}

namespace detail {

inline int context_level(const GeoEntry& e) {
    if (e.is_country()) return 0;
    if (e.feature_code == "ADM1") return 1;
    if (e.feature_code == "ADM2") return 2;
    return 3;
}

} // namespace detail

// All mentions belong to one document. Results cover every mention; each is
// resolved in exactly one stage.
inline std::vector<ResolutionResult> resolve_document(
    const NameIndex& idx, const Gazetteer& g, const ScoreFn& scorer,
    const std::vector<std::string>& mentions, size_t k, ContextMode mode) {
    std::vector<ResolutionResult> results(mentions.size());
    const ContextString no_context;

    if (mode == ContextMode::None) {
        for (size_t i = 0; i < mentions.size(); ++i) {
            results[i] = resolve_mention(idx, g, scorer, mentions[i], no_context, k);
            results[i].mention_index = i;
        }
        return results;
    }

    // Stage 1: context-free; accept countries and ADM1-3 districts.
    struct CollectedCode {
        int level;
        size_t first_index;
        std::string code;
    };
    std::vector<CollectedCode> collected;
    std::vector<bool> accepted(mentions.size(), false);
    for (size_t i = 0; i < mentions.size(); ++i) {
        ResolutionResult r = resolve_mention(idx, g, scorer, mentions[i], no_context, k);
        r.mention_index = i;
        const GeoEntry* e = r.predicted;
        if (e != nullptr && (e->is_country() || e->is_admin123())) {
            r.stage = 1;
            accepted[i] = true;
            if (auto code = context_code(*e)) {
                collected.push_back({detail::context_level(*e), i, std::move(*code)});
            }
            results[i] = std::move(r);
        }
    }

    // Context codes ordered by level (countries first), then first mention.
    std::stable_sort(collected.begin(), collected.end(),
                     [](const CollectedCode& a, const CollectedCode& b) {
                         if (a.level != b.level) return a.level < b.level;
                         return a.first_index < b.first_index;
                     });
    ContextString context;
    for (auto& c : collected) context.add(std::move(c.code));

    // Stage 2: re-resolve everything not accepted, with context.
    for (size_t i = 0; i < mentions.size(); ++i) {
        if (accepted[i]) continue;
        results[i] = resolve_mention(idx, g, scorer, mentions[i], context, k);
        results[i].mention_index = i;
        results[i].stage = 2;
    }
    return results;
}

inline std::vector<ResolutionResult> resolve_document(
    const NameIndex& idx, const Gazetteer& g, const RerankerModel* model,
    const std::vector<std::string>& mentions, size_t k, ContextMode mode) {
    return resolve_document(idx, g, model_scorer(model), mentions, k, mode);
}

} // namespace topores
