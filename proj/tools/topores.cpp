// topores command line: build-index, resolve, train, evaluate, split, serve.
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topores/bridge.hpp"
#include "topores/corpus.hpp"
#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/metrics.hpp"
#include "topores/pipeline.hpp"
#include "topores/predictions.hpp"
#include "topores/reranker.hpp"
#include "topores/service.hpp"
#include "topores/snapshot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

topores::Snapshot load_snapshot_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return topores::load_snapshot(in);
}

topores::ContextMode parse_mode_or_throw(const std::string& s) {
    auto mode = topores::parse_context_mode(s);
    if (!mode) throw ConfigError("unknown context mode: " + s + " (use none or 2stage)");
    return *mode;
}

std::vector<topores::AnnotatedDocument> load_corpus_file(const std::string& path,
                                                         bool log_diags = true) {
    std::ifstream in = open_input(path);
    topores::LoadStats stats;
    auto docs = topores::load_canonical(in, &stats);
    if (log_diags) {
        for (const auto& d : stats.diagnostics) std::cerr << "note: " << d << "\n";
        std::cerr << "loaded " << stats.docs_loaded << " documents, "
                  << stats.mentions_loaded << " mentions";
        if (stats.docs_skipped + stats.mentions_skipped > 0) {
            std::cerr << " (skipped " << stats.docs_skipped << " docs, "
                      << stats.mentions_skipped << " mentions)";
        }
        std::cerr << "\n";
    }
    return docs;
}

int cmd_build_index(const std::string& gazetteer_path, const std::string& alternates_path,
                    const std::string& adjectival_path, const std::string& feature_codes_path,
                    const std::string& out_path) {
    std::ifstream main_in = open_input(gazetteer_path);
    std::unique_ptr<std::ifstream> alt_in, adj_in, fc_in;
    if (!alternates_path.empty()) alt_in = std::make_unique<std::ifstream>(open_input(alternates_path));
    if (!adjectival_path.empty()) adj_in = std::make_unique<std::ifstream>(open_input(adjectival_path));
    if (!feature_codes_path.empty()) fc_in = std::make_unique<std::ifstream>(open_input(feature_codes_path));

    topores::Gazetteer g = topores::parse_gazetteer(main_in, alt_in.get(), adj_in.get(), fc_in.get());
    std::cerr << "gazetteer: " << g.entries.size() << " entries, "
              << g.feature_inventory.size() << " feature types, "
              << g.stats.main_skipped << " rows skipped\n";
    topores::NameIndex idx = topores::build_index(g);
    std::cerr << "index: " << idx.records.size() << " name records\n";

    std::ofstream out = open_output(out_path);
    topores::save_snapshot(out, g, idx);
    out.close();
    std::cerr << "snapshot written to " << out_path << "\n";
    return kExitOk;
}

int cmd_resolve(const std::string& snapshot_path, const std::string& model_path,
                const std::string& input_path, const std::string& mentions_path,
                const std::string& output_path, size_t k, const std::string& context,
                const std::string& bridge_cmd, double bridge_timeout) {
    topores::Snapshot snap = load_snapshot_file(snapshot_path);
    std::unique_ptr<topores::RerankerModel> model;
    if (!model_path.empty()) {
        std::ifstream in = open_input(model_path);
        model = std::make_unique<topores::RerankerModel>(topores::load_model(in));
        if (model->config.type_dims !=
            static_cast<int32_t>(snap.gazetteer.feature_inventory.size())) {
            throw topores::SnapshotError("model type dimension does not match gazetteer");
        }
    }
    topores::ContextMode mode = parse_mode_or_throw(context);

    std::vector<topores::AnnotatedDocument> docs;
    if (!input_path.empty()) {
        docs = load_corpus_file(input_path);
    } else if (!mentions_path.empty()) {
        // Plain mention list: one mention per line, treated as one document.
        std::ifstream in = open_input(mentions_path);
        topores::AnnotatedDocument doc;
        doc.doc_id = "mentions";
        std::string line;
        while (std::getline(in, line)) {
            std::string m = topores::trim(line);
            if (m.empty()) continue;
            topores::MentionAnnotation ann;
            ann.start = doc.text.size();
            doc.text += m;
            ann.end = doc.text.size();
            doc.text += "\n";
            ann.surface = m;
            doc.mentions.push_back(std::move(ann));
        }
        docs.push_back(std::move(doc));
    } else {
        throw ConfigError("resolve needs --input or --mentions");
    }

    std::unique_ptr<topores::ExternalReranker> bridge;
    topores::ScoreFn scorer = topores::model_scorer(model.get());
    if (!bridge_cmd.empty()) {
        bridge = std::make_unique<topores::ExternalReranker>(bridge_cmd, bridge_timeout);
        scorer = topores::bridge_scorer(*bridge, topores::model_scorer(model.get()));
    }

    std::vector<topores::PredictedDocument> out_docs;
    out_docs.reserve(docs.size());
    for (const auto& doc : docs) {
        std::vector<std::string> mentions;
        mentions.reserve(doc.mentions.size());
        for (const auto& m : doc.mentions) mentions.push_back(m.surface);
        auto results = topores::resolve_document(snap.index, snap.gazetteer, scorer,
                                                 mentions, k, mode);
        out_docs.push_back(topores::make_predicted_document(doc, results));
    }

    if (output_path.empty() || output_path == "-") {
        topores::save_predictions(std::cout, out_docs);
    } else {
        std::ofstream out = open_output(output_path);
        topores::save_predictions(out, out_docs);
    }
    return kExitOk;
}

int cmd_train(const std::string& snapshot_path, const std::string& train_path,
              const std::string& dev_path, const std::string& out_path, size_t k,
              const std::string& context, const topores::TrainConfig& config) {
    topores::Snapshot snap = load_snapshot_file(snapshot_path);
    topores::ContextMode mode = parse_mode_or_throw(context);

    auto train_docs = load_corpus_file(train_path);
    topores::InstanceStats stats;
    auto instances = topores::to_training_instances(train_docs, snap.index,
                                                    snap.gazetteer, k, mode, &stats);
    std::cerr << "training instances: " << stats.instances << " of " << stats.mentions
              << " mentions (" << stats.excluded_gold_not_generated
              << " gold-not-generated, " << stats.excluded_no_gold_id
              << " without gold id)\n";
    if (instances.empty()) throw std::runtime_error("no usable training instances");

    topores::FeatureConfig fc;
    fc.type_dims = static_cast<int32_t>(snap.gazetteer.feature_inventory.size());
    topores::RerankerModel model = topores::init_model(fc, config.seed);
    topores::TrainReport report;
    model = topores::train(std::move(model), instances, config, &report);
    if (!report.epoch_mean_loss.empty()) {
        std::cerr << "loss: first epoch " << report.epoch_mean_loss.front()
                  << ", last epoch " << report.epoch_mean_loss.back() << "\n";
    }

    if (!dev_path.empty()) {
        auto dev_docs = load_corpus_file(dev_path);
        topores::InstanceStats dev_stats;
        auto dev_instances = topores::to_training_instances(
            dev_docs, snap.index, snap.gazetteer, k, mode, &dev_stats);
        size_t correct = 0;
        for (const auto& inst : dev_instances) {
            auto ranked = topores::rerank(model, inst);
            if (!ranked.empty() &&
                ranked[0].entry->id == inst.candidates[*inst.gold_index].entry->id) {
                ++correct;
            }
        }
        if (!dev_instances.empty()) {
            std::cerr << "dev rank-1 accuracy (gold-generated instances): "
                      << static_cast<double>(correct) / dev_instances.size() << "\n";
        }
    }

    std::ofstream out = open_output(out_path);
    topores::save_model(out, model);
    std::cerr << "model written to " << out_path << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& snapshot_path, const std::string& predictions_path,
                 const std::string& gold_path, const std::string& report_path) {
    topores::Snapshot snap = load_snapshot_file(snapshot_path);
    auto gold_docs = load_corpus_file(gold_path);
    std::ifstream pred_in = open_input(predictions_path);
    auto pred_docs = topores::load_predictions(pred_in);
    topores::EvalReport report =
        topores::build_eval_report(gold_docs, pred_docs, snap.gazetteer);
    std::cout << topores::render_table(report);
    if (!report_path.empty()) {
        std::ofstream out = open_output(report_path);
        out << topores::report_to_json(report).dump(2) << "\n";
    }
    return kExitOk;
}

std::vector<std::string> read_id_list(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        std::string id = topores::trim(line);
        if (!id.empty()) ids.push_back(id);
    }
    return ids;
}

int cmd_split(const std::string& input_path, const std::string& out_prefix,
              const std::vector<double>& ratios, uint64_t seed,
              const std::vector<std::string>& split_files) {
    auto docs = load_corpus_file(input_path);
    topores::SplitResult split;
    if (!split_files.empty()) {
        if (split_files.size() != 3) {
            throw ConfigError("--split-files needs exactly three paths (train, dev, test)");
        }
        split = topores::split_by_lists(docs, read_id_list(split_files[0]),
                                        read_id_list(split_files[1]),
                                        read_id_list(split_files[2]));
    } else {
        if (ratios.size() != 3) throw ConfigError("--ratios needs three values");
        split = topores::split_corpus(std::move(docs), {ratios[0], ratios[1], ratios[2]}, seed);
    }

    struct Part { const char* name; const std::vector<topores::AnnotatedDocument>* docs; };
    for (const Part& part : {Part{"train", &split.train}, Part{"dev", &split.dev},
                             Part{"test", &split.test}}) {
        std::ofstream jsonl = open_output(out_prefix + "." + part.name + ".jsonl");
        topores::save_canonical(jsonl, *part.docs);
        std::ofstream ids = open_output(out_prefix + "." + part.name + ".ids");
        for (const auto& doc : *part.docs) ids << doc.doc_id << "\n";
        std::cerr << part.name << ": " << part.docs->size() << " documents\n";
    }
    return kExitOk;
}

int cmd_serve(const std::string& snapshot_path, const std::string& model_path,
              const std::string& host, int port, size_t k, const std::string& context) {
    topores::Snapshot snap = load_snapshot_file(snapshot_path);
    std::unique_ptr<topores::RerankerModel> model;
    if (!model_path.empty()) {
        std::ifstream in = open_input(model_path);
        model = std::make_unique<topores::RerankerModel>(topores::load_model(in));
    }
    topores::ServiceState state;
    state.gazetteer = &snap.gazetteer;
    state.index = &snap.index;
    state.model = model.get();
    state.k = k;
    state.mode = parse_mode_or_throw(context);

    httplib::Server server;
    topores::register_routes(server, state);
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        throw ConfigError("failed to bind " + host + ":" + std::to_string(port));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toponym resolution toolkit"};
    app.require_subcommand(1);

    // build-index
    std::string gazetteer_path, alternates_path, adjectival_path, feature_codes_path;
    std::string snapshot_out;
    auto* build = app.add_subcommand("build-index", "parse a gazetteer and write an index snapshot");
    build->add_option("--gazetteer", gazetteer_path, "GeoNames-format main table (19 columns, TSV)")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_GAZETTEER");
    build->add_option("--alternates", alternates_path, "alternate names table (TSV)")
        ->check(CLI::ExistingFile)->envname("TOPORES_ALTERNATES");
    build->add_option("--adjectival", adjectival_path, "adjectival forms map (form<TAB>id)")
        ->check(CLI::ExistingFile)->envname("TOPORES_ADJECTIVAL");
    build->add_option("--feature-codes", feature_codes_path, "feature code inventory file")
        ->check(CLI::ExistingFile)->envname("TOPORES_FEATURE_CODES");
    build->add_option("--out", snapshot_out, "snapshot output path")
        ->required()->envname("TOPORES_SNAPSHOT_OUT");

    // shared options
    std::string snapshot_path, model_path, input_path, mentions_path, output_path;
    std::string context = "2stage";
    std::string bridge_cmd;
    double bridge_timeout = 10.0;
    size_t k = 20;

    auto* resolve = app.add_subcommand("resolve", "resolve mentions to gazetteer entries");
    resolve->add_option("--snapshot", snapshot_path, "index snapshot")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_SNAPSHOT");
    resolve->add_option("--model", model_path, "reranker model (omit for generator-only)")
        ->check(CLI::ExistingFile)->envname("TOPORES_MODEL");
    resolve->add_option("--input", input_path, "canonical corpus (JSONL)")
        ->check(CLI::ExistingFile)->envname("TOPORES_INPUT");
    resolve->add_option("--mentions", mentions_path, "plain mention list, one per line (treated as one document)")
        ->check(CLI::ExistingFile)->envname("TOPORES_MENTIONS");
    resolve->add_option("--output", output_path, "predictions output (JSONL; default stdout)")
        ->envname("TOPORES_OUTPUT");
    resolve->add_option("--k", k, "candidates per mention")->check(CLI::PositiveNumber)
        ->envname("TOPORES_K");
    resolve->add_option("--context", context, "context mode: none or 2stage")
        ->envname("TOPORES_CONTEXT");
    resolve->add_option("--bridge-cmd", bridge_cmd, "external reranker command (line-delimited JSON over stdio)")
        ->envname("TOPORES_BRIDGE_CMD");
    resolve->add_option("--bridge-timeout", bridge_timeout, "seconds to wait for a bridge response")
        ->envname("TOPORES_BRIDGE_TIMEOUT");

    std::string train_path, dev_path, model_out;
    topores::TrainConfig train_config;
    auto* train = app.add_subcommand("train", "train the feature reranker");
    train->add_option("--snapshot", snapshot_path, "index snapshot")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_SNAPSHOT");
    train->add_option("--train", train_path, "training corpus (canonical JSONL)")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_TRAIN");
    train->add_option("--dev", dev_path, "development corpus for a post-training report")
        ->check(CLI::ExistingFile)->envname("TOPORES_DEV");
    train->add_option("--out", model_out, "model output path")
        ->required()->envname("TOPORES_MODEL_OUT");
    train->add_option("--k", k, "candidates per mention")->check(CLI::PositiveNumber)
        ->envname("TOPORES_K");
    train->add_option("--context", context, "context mode: none or 2stage")
        ->envname("TOPORES_CONTEXT");
    train->add_option("--lr", train_config.learning_rate, "learning rate")
        ->envname("TOPORES_LR");
    train->add_option("--epochs", train_config.epochs, "training epochs")
        ->envname("TOPORES_EPOCHS");
    train->add_option("--batch-size", train_config.batch_size, "mini-batch size")
        ->envname("TOPORES_BATCH_SIZE");
    train->add_option("--momentum", train_config.momentum, "momentum coefficient")
        ->envname("TOPORES_MOMENTUM");
    train->add_option("--seed", train_config.seed, "run seed")
        ->envname("TOPORES_SEED");

    std::string predictions_path, gold_path, report_path;
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold annotations");
    evaluate->add_option("--snapshot", snapshot_path, "index snapshot")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_SNAPSHOT");
    evaluate->add_option("--predictions", predictions_path, "predictions JSONL from resolve")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_PREDICTIONS");
    evaluate->add_option("--gold", gold_path, "gold corpus (canonical JSONL)")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_GOLD");
    evaluate->add_option("--report", report_path, "machine-readable report output (JSON)")
        ->envname("TOPORES_REPORT");

    std::string split_input, out_prefix;
    std::vector<double> ratios{0.7, 0.1, 0.2};
    uint64_t split_seed = 13;
    std::vector<std::string> split_files;
    auto* split = app.add_subcommand("split", "split a corpus into train/dev/test");
    split->add_option("--input", split_input, "canonical corpus (JSONL)")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_INPUT");
    split->add_option("--out-prefix", out_prefix, "output prefix for .train/.dev/.test files")
        ->required()->envname("TOPORES_OUT_PREFIX");
    split->add_option("--ratios", ratios, "train dev test ratios")->expected(3)
        ->envname("TOPORES_RATIOS");
    split->add_option("--seed", split_seed, "shuffle seed")->envname("TOPORES_SEED");
    split->add_option("--split-files", split_files,
                      "three doc-id list files to reproduce an external split")
        ->expected(3)->envname("TOPORES_SPLIT_FILES");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "run the HTTP resolve service");
    serve->add_option("--snapshot", snapshot_path, "index snapshot")
        ->required()->check(CLI::ExistingFile)->envname("TOPORES_SNAPSHOT");
    serve->add_option("--model", model_path, "reranker model")
        ->check(CLI::ExistingFile)->envname("TOPORES_MODEL");
    serve->add_option("--host", host, "bind address")->envname("TOPORES_HOST");
    serve->add_option("--port", port, "bind port")->envname("TOPORES_PORT");
    serve->add_option("--k", k, "candidates per mention")->check(CLI::PositiveNumber)
        ->envname("TOPORES_K");
    serve->add_option("--context", context, "context mode: none or 2stage")
        ->envname("TOPORES_CONTEXT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (build->parsed()) {
            return cmd_build_index(gazetteer_path, alternates_path, adjectival_path,
                                   feature_codes_path, snapshot_out);
        }
        if (resolve->parsed()) {
            return cmd_resolve(snapshot_path, model_path, input_path, mentions_path,
                               output_path, k, context, bridge_cmd, bridge_timeout);
        }
        if (train->parsed()) {
            return cmd_train(snapshot_path, train_path, dev_path, model_out, k, context,
                             train_config);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(snapshot_path, predictions_path, gold_path, report_path);
        }
        if (split->parsed()) {
            return cmd_split(split_input, out_prefix, ratios, split_seed, split_files);
        }
        if (serve->parsed()) {
            return cmd_serve(snapshot_path, model_path, host, port, k, context);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}
