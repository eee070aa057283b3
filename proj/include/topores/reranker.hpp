// Trainable candidate reranker. Each candidate is encoded as a feature
// vector b = phi ++ [log(pop+1)] ++ type-one-hot, scored with two weight
// matrices (c = W2 (W1 b), no nonlinearity in between), and the per-mention
// scores are normalized with a softmax. Training minimizes mean
// cross-entropy with mini-batch gradient descent.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topores/context.hpp"
#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/rng.hpp"
#include "topores/text.hpp"

namespace topores {

// Lexical/context feature layout inside phi.
enum PhiFeature : size_t {
    kPhiLevenshteinSim = 0,  // best 1 - dist/max_len over entry names
    kPhiExactMatch = 1,
    kPhiTokenJaccard = 2,
    kPhiTrigramJaccard = 3,
    kPhiTierBase = 4,        // 6 dims, one per match tier
    kPhiCountryInContext = 10,
    kPhiAdmin1InContext = 11,
    kPhiAdmin2InContext = 12,
    kPhiContextEmpty = 13,
    kPhiDims = 14,
};

struct FeatureConfig {
    int32_t phi_dims = kPhiDims;
    int32_t type_dims = 0;    // T, size of the gazetteer feature inventory
    int32_t hidden_dims = 150;

    int32_t total_dims() const { return phi_dims + 1 + type_dims; }
    bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
    std::vector<double> phi;
    double log_pop = 0.0;
    int32_t type_ordinal = -1;  // -1 encodes an all-zero one-hot
    int32_t type_dims = 0;

    // Dense layout [phi..., log_pop, one-hot...]; used by serialization-free
    // consumers such as the recomputation oracle in the tests.
    std::vector<double> dense() const {
        std::vector<double> out(phi);
        out.push_back(log_pop);
        out.resize(phi.size() + 1 + static_cast<size_t>(type_dims), 0.0);
        if (type_ordinal >= 0 && type_ordinal < type_dims) {
            out[phi.size() + 1 + static_cast<size_t>(type_ordinal)] = 1.0;
        }
        return out;
    }
};

struct TrainConfig {
    double learning_rate = 1e-2;
    int epochs = 200;
    int batch_size = 32;
    double momentum = 0.0;
    uint64_t seed = 13;
};

struct RerankerModel {
    FeatureConfig config;
    std::vector<double> w1;  // hidden x total, row major
    std::vector<double> w2;  // hidden
    TrainConfig meta;

    double w1_at(int32_t row, int32_t col) const {
        return w1[static_cast<size_t>(row) * config.total_dims() + col];
    }
};

struct RerankInstance {
    std::string mention;
    std::vector<Candidate> candidates;
    ContextString context;
    std::optional<size_t> gold_index;  // training only
};

// Serialization of mention + candidate names consumed by external rerankers
// over the bridge protocol; the built-in feature model never sees it.
inline std::string to_input_string(std::string_view mention, const GeoEntry& e,
                                   const ContextString& context) {
    std::string s = "[CLS] ";
    s += mention;
    for (const auto& code : context.codes()) {
        s += " | ";
        s += code;
    }
    s += " [SEP] ";
    s += e.canonical_name;
    for (const auto& syn : e.synonyms) {
        s += " [SEP] ";
        s += syn;
    }
    s += " [SEP]";
    return s;
}

inline FeatureVector featurize(std::string_view mention, const Candidate& cand,
                               const ContextString& context, int32_t type_dims) {
    const GeoEntry& e = *cand.entry;
    FeatureVector fv;
    fv.phi.assign(kPhiDims, 0.0);
    fv.type_dims = type_dims;
    fv.type_ordinal = e.feature_ordinal;
    fv.log_pop = std::log(static_cast<double>(e.population) + 1.0);

    const std::u32string m_cps = normalize_name_cps(mention);
    const auto m_tokens = tokenize(mention);
    const auto m_trigrams = trigram_set(mention);

    double best_sim = 0.0, best_tok = 0.0, best_tri = 0.0;
    bool exact = false;
    auto consider = [&](std::string_view name) {
        std::u32string n_cps = normalize_name_cps(name);
        size_t max_len = std::max(m_cps.size(), n_cps.size());
        double sim = max_len == 0
                         ? 1.0
                         : 1.0 - static_cast<double>(levenshtein(m_cps, n_cps)) /
                                     static_cast<double>(max_len);
        best_sim = std::max(best_sim, sim);
        if (n_cps == m_cps && !m_cps.empty()) exact = true;
        best_tok = std::max(best_tok, jaccard(m_tokens, tokenize(name)));
        best_tri = std::max(best_tri, jaccard(m_trigrams, trigram_set(name)));
    };
    consider(e.canonical_name);
    for (const auto& syn : e.synonyms) consider(syn);

    fv.phi[kPhiLevenshteinSim] = best_sim;
    fv.phi[kPhiExactMatch] = exact ? 1.0 : 0.0;
    fv.phi[kPhiTokenJaccard] = best_tok;
    fv.phi[kPhiTrigramJaccard] = best_tri;
    fv.phi[kPhiTierBase + static_cast<size_t>(cand.matched_tier)] = 1.0;
    if (context.empty()) {
        fv.phi[kPhiContextEmpty] = 1.0;
    } else {
        if (!e.country_code.empty() && context.contains(e.country_code)) {
            fv.phi[kPhiCountryInContext] = 1.0;
        }
        if (!e.admin1_code.empty() && context.contains(e.admin1_code)) {
            fv.phi[kPhiAdmin1InContext] = 1.0;
        }
        if (!e.admin2_code.empty() && context.contains(e.admin2_code)) {
            fv.phi[kPhiAdmin2InContext] = 1.0;
        }
    }
    return fv;
}

namespace detail {

// h = W1 b, exploiting the sparse tail of b (one-hot type block).
inline std::vector<double> hidden_activation(const RerankerModel& model,
                                             const FeatureVector& fv) {
    const int32_t total = model.config.total_dims();
    const int32_t hidden = model.config.hidden_dims;
    const int32_t F = model.config.phi_dims;
    std::vector<double> h(static_cast<size_t>(hidden), 0.0);
    for (int32_t j = 0; j < hidden; ++j) {
        const double* row = &model.w1[static_cast<size_t>(j) * total];
        double acc = 0.0;
        for (int32_t f = 0; f < F; ++f) acc += row[f] * fv.phi[f];
        acc += row[F] * fv.log_pop;
        if (fv.type_ordinal >= 0 && fv.type_ordinal < fv.type_dims) {
            acc += row[F + 1 + fv.type_ordinal];
        }
        h[static_cast<size_t>(j)] = acc;
    }
    return h;
}

inline void softmax_inplace(std::vector<double>& v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

struct Forward {
    std::vector<FeatureVector> features;
    std::vector<std::vector<double>> hidden;
    std::vector<double> scores;
    std::vector<double> probs;
};

inline Forward forward(const RerankerModel& model, const RerankInstance& inst) {
    if (inst.candidates.empty()) {
        throw std::invalid_argument("nothing to rank: empty candidate list");
    }
    Forward fwd;
    fwd.features.reserve(inst.candidates.size());
    fwd.hidden.reserve(inst.candidates.size());
    fwd.scores.reserve(inst.candidates.size());
    for (const Candidate& cand : inst.candidates) {
        FeatureVector fv =
            featurize(inst.mention, cand, inst.context, model.config.type_dims);
        if (static_cast<int32_t>(fv.phi.size()) != model.config.phi_dims) {
            throw std::invalid_argument("feature configuration mismatch");
        }
        std::vector<double> h = hidden_activation(model, fv);
        double c = 0.0;
        for (int32_t j = 0; j < model.config.hidden_dims; ++j) {
            c += model.w2[static_cast<size_t>(j)] * h[static_cast<size_t>(j)];
        }
        fwd.features.push_back(std::move(fv));
        fwd.hidden.push_back(std::move(h));
        fwd.scores.push_back(c);
    }
    fwd.probs = fwd.scores;
    softmax_inplace(fwd.probs);
    return fwd;
}

} // namespace detail

// Probability distribution over the instance's candidates.
inline std::vector<double> score(const RerankerModel& model,
                                 const RerankInstance& inst) {
    return detail::forward(model, inst).probs;
}

// Cross-entropy -ln(p[gold]); non-negative, zero iff the gold candidate
// takes all the probability mass.
inline double loss(const RerankerModel& model, const RerankInstance& inst) {
    if (!inst.gold_index.has_value()) {
        throw std::invalid_argument("loss requires a gold candidate index");
    }
    if (*inst.gold_index >= inst.candidates.size()) {
        throw std::invalid_argument("gold index out of bounds");
    }
    std::vector<double> probs = score(model, inst);
    return -std::log(std::max(probs[*inst.gold_index], 1e-300));
}

struct Gradients {
    std::vector<double> w1;
    std::vector<double> w2;
};

// Gradient of the mean cross-entropy over the given instances.
inline Gradients mean_loss_gradient(const RerankerModel& model,
                                    const std::vector<RerankInstance>& batch,
                                    double* mean_loss_out = nullptr) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const int32_t total = model.config.total_dims();
    const int32_t hidden = model.config.hidden_dims;
    const int32_t F = model.config.phi_dims;
    Gradients g;
    g.w1.assign(model.w1.size(), 0.0);
    g.w2.assign(model.w2.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss_acc = 0.0;

    for (const RerankInstance& inst : batch) {
        if (!inst.gold_index || *inst.gold_index >= inst.candidates.size()) {
            throw std::invalid_argument("training instance without valid gold index");
        }
        detail::Forward fwd = detail::forward(model, inst);
        loss_acc += -std::log(std::max(fwd.probs[*inst.gold_index], 1e-300));
        for (size_t i = 0; i < inst.candidates.size(); ++i) {
            const double delta =
                (fwd.probs[i] - (i == *inst.gold_index ? 1.0 : 0.0)) * inv_n;
            if (delta == 0.0) continue;
            const FeatureVector& fv = fwd.features[i];
            for (int32_t j = 0; j < hidden; ++j) {
                g.w2[static_cast<size_t>(j)] += delta * fwd.hidden[i][static_cast<size_t>(j)];
                const double dh = delta * model.w2[static_cast<size_t>(j)];
                double* grow = &g.w1[static_cast<size_t>(j) * total];
                for (int32_t f = 0; f < F; ++f) grow[f] += dh * fv.phi[f];
                grow[F] += dh * fv.log_pop;
                if (fv.type_ordinal >= 0 && fv.type_ordinal < fv.type_dims) {
                    grow[F + 1 + fv.type_ordinal] += dh;
                }
            }
        }
    }
    if (mean_loss_out != nullptr) *mean_loss_out = loss_acc * inv_n;
    return g;
}

// Weights drawn uniformly from [-0.05, 0.05], deterministic in the seed.
inline RerankerModel init_model(const FeatureConfig& config, uint64_t seed) {
    RerankerModel model;
    model.config = config;
    model.meta.seed = seed;
    std::mt19937_64 rng(seed);
    const size_t w1_size =
        static_cast<size_t>(config.hidden_dims) * config.total_dims();
    model.w1.resize(w1_size);
    model.w2.resize(static_cast<size_t>(config.hidden_dims));
    for (double& w : model.w1) w = (uniform_unit(rng) - 0.5) * 0.1;
    for (double& w : model.w2) w = (uniform_unit(rng) - 0.5) * 0.1;
    return model;
}

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    size_t instances = 0;
};

// Mini-batch gradient descent with optional momentum; instance order is
// reshuffled each epoch from the run seed. Zero epochs returns the model
// unchanged.
inline RerankerModel train(RerankerModel model,
                           const std::vector<RerankInstance>& instances,
                           const TrainConfig& config,
                           TrainReport* report = nullptr) {
    if (instances.empty()) {
        throw std::invalid_argument("empty training set");
    }
    for (const auto& inst : instances) {
        if (!inst.gold_index || *inst.gold_index >= inst.candidates.size()) {
            throw std::invalid_argument("training instance without valid gold index");
        }
    }
    model.meta = config;
    if (report != nullptr) {
        report->instances = instances.size();
        report->epoch_mean_loss.clear();
    }

    std::mt19937_64 rng(config.seed);
    std::vector<size_t> order(instances.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> vel_w1(model.w1.size(), 0.0);
    std::vector<double> vel_w2(model.w2.size(), 0.0);
    const size_t batch_size =
        config.batch_size > 0 ? static_cast<size_t>(config.batch_size) : instances.size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_deterministic(order, rng);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += batch_size) {
            const size_t stop = std::min(order.size(), start + batch_size);
            std::vector<RerankInstance> batch;
            batch.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) batch.push_back(instances[order[i]]);
            double batch_loss = 0.0;
            Gradients grad = mean_loss_gradient(model, batch, &batch_loss);
            epoch_loss += batch_loss;
            ++batches;
            for (size_t i = 0; i < model.w1.size(); ++i) {
                vel_w1[i] = config.momentum * vel_w1[i] - config.learning_rate * grad.w1[i];
                model.w1[i] += vel_w1[i];
            }
            for (size_t i = 0; i < model.w2.size(); ++i) {
                vel_w2[i] = config.momentum * vel_w2[i] - config.learning_rate * grad.w2[i];
                model.w2[i] += vel_w2[i];
            }
        }
        if (report != nullptr && batches > 0) {
            report->epoch_mean_loss.push_back(epoch_loss / static_cast<double>(batches));
        }
    }
    return model;
}

// Candidates sorted by descending probability; ties keep generator order.
inline std::vector<Candidate> rerank(const RerankerModel& model,
                                     const RerankInstance& inst) {
    std::vector<double> probs = score(model, inst);
    std::vector<size_t> order(inst.candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return probs[a] > probs[b]; });
    std::vector<Candidate> out;
    out.reserve(order.size());
    for (size_t i : order) out.push_back(inst.candidates[i]);
    return out;
}

} // namespace topores
