#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "topores/corpus.hpp"

using namespace topores;
using topores::test::load_mini_gazetteer;

namespace {

std::vector<AnnotatedDocument> synthetic_docs(size_t n) {
    std::vector<AnnotatedDocument> docs;
    for (size_t i = 0; i < n; ++i) {
        AnnotatedDocument d;
        d.doc_id = "d" + std::to_string(i);
        d.text = "x";
        docs.push_back(std::move(d));
    }
    return docs;
}

} // namespace

TEST_CASE("load_canonical: empty stream gives an empty list") {
    std::istringstream in("");
    CHECK(load_canonical(in).empty());
}

TEST_CASE("load_canonical: fixture counts match") {
    LoadStats stats;
    auto docs = topores::test::load_docs_fixture("docs/small_corpus.jsonl", &stats);
    REQUIRE(docs.size() == 2);
    CHECK(stats.docs_loaded == 2);
    CHECK(stats.mentions_loaded == 5);
    CHECK(docs[0].mentions.size() == 3);
    CHECK(docs[1].mentions.size() == 2);
    CHECK(docs[0].mentions[0].surface == "Minnesota");
    CHECK(docs[0].mentions[0].gold_id == 5037779);
    REQUIRE(docs[0].mentions[0].gold_point.has_value());
    CHECK(docs[0].mentions[0].gold_point->latitude == Catch::Approx(46.25));
}

TEST_CASE("load_canonical: bad spans and overlaps are skipped with diagnostics") {
    LoadStats stats;
    auto docs = topores::test::load_docs_fixture("docs/defects.jsonl", &stats);
    REQUIRE(docs.size() == 1);  // the unparseable line is dropped
    CHECK(stats.docs_skipped == 1);
    CHECK(docs[0].mentions.size() == 2);  // Paris + London survive
    CHECK(stats.mentions_skipped == 3);   // surface mismatch + overlap + bad type
    CHECK(stats.diagnostics.size() == 4);
    CHECK(docs[0].mentions[0].surface == "Paris");
    CHECK(docs[0].mentions[1].surface == "London");
}

TEST_CASE("canonical round trip") {
    auto docs = topores::test::load_docs_fixture("docs/small_corpus.jsonl");
    std::ostringstream out;
    save_canonical(out, docs);
    std::istringstream in(out.str());
    LoadStats stats;
    auto again = load_canonical(in, &stats);
    REQUIRE(again.size() == docs.size());
    CHECK(stats.mentions_skipped == 0);
    for (size_t i = 0; i < docs.size(); ++i) {
        CHECK(again[i].doc_id == docs[i].doc_id);
        CHECK(again[i].text == docs[i].text);
        REQUIRE(again[i].mentions.size() == docs[i].mentions.size());
        for (size_t m = 0; m < docs[i].mentions.size(); ++m) {
            CHECK(again[i].mentions[m].surface == docs[i].mentions[m].surface);
            CHECK(again[i].mentions[m].gold_id == docs[i].mentions[m].gold_id);
        }
    }
}

TEST_CASE("split sizes reproduce the reference corpus splits") {
    // 588 -> 411/58/119, 200 -> 140/20/40, 118 -> 82/11/25
    struct Case { size_t n, train, dev, test; };
    for (const Case& c : {Case{588, 411, 58, 119}, Case{200, 140, 20, 40},
                          Case{118, 82, 11, 25}}) {
        auto split = split_corpus(synthetic_docs(c.n), {0.7, 0.1, 0.2}, 13);
        CHECK(split.train.size() == c.train);
        CHECK(split.dev.size() == c.dev);
        CHECK(split.test.size() == c.test);
    }
}

TEST_CASE("split is a deterministic partition") {
    auto docs = synthetic_docs(50);
    auto s1 = split_corpus(docs, {0.7, 0.1, 0.2}, 13);
    for (int i = 0; i < 10; ++i) {
        auto s2 = split_corpus(docs, {0.7, 0.1, 0.2}, 13);
        auto ids = [](const std::vector<AnnotatedDocument>& v) {
            std::vector<std::string> out;
            for (const auto& d : v) out.push_back(d.doc_id);
            return out;
        };
        CHECK(ids(s2.train) == ids(s1.train));
        CHECK(ids(s2.dev) == ids(s1.dev));
        CHECK(ids(s2.test) == ids(s1.test));
    }
    // partition: union of all parts is the doc set, pairwise disjoint
    std::set<std::string> seen;
    size_t total = 0;
    for (const auto* part : {&s1.train, &s1.dev, &s1.test}) {
        for (const auto& d : *part) {
            CHECK(seen.insert(d.doc_id).second);
            ++total;
        }
    }
    CHECK(total == docs.size());
    // different seed gives a different shuffle (overwhelmingly likely)
    auto s3 = split_corpus(docs, {0.7, 0.1, 0.2}, 14);
    bool any_diff = false;
    for (size_t i = 0; i < s1.train.size(); ++i) {
        if (s1.train[i].doc_id != s3.train[i].doc_id) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("split guards") {
    CHECK_THROWS_AS(split_corpus(synthetic_docs(2), {0.7, 0.1, 0.2}, 13),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_corpus(synthetic_docs(10), {1.0, 0.0, 0.0}, 13),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_corpus(synthetic_docs(10), {0.5, 0.2, 0.2}, 13),
                    std::invalid_argument);
}

TEST_CASE("split_by_lists reproduces an explicit membership") {
    auto docs = synthetic_docs(6);
    auto split = split_by_lists(docs, {"d0", "d3"}, {"d1"}, {"d2", "d4", "d5"});
    REQUIRE(split.train.size() == 2);
    CHECK(split.train[0].doc_id == "d0");
    CHECK(split.dev.size() == 1);
    CHECK(split.test.size() == 3);
}

TEST_CASE("to_training_instances: gold rank and exclusion accounting") {
    Gazetteer g = load_mini_gazetteer();
    NameIndex idx = build_index(g);
    auto docs = topores::test::load_docs_fixture("docs/small_corpus.jsonl");
    // Add a mention whose gold id is not in the gazetteer, and one without
    // any gold id.
    AnnotatedDocument extra;
    extra.doc_id = "extra";
    extra.text = "Canada and Paris.";
    extra.mentions.push_back({0, 6, "Canada", 12345678, std::nullopt});
    extra.mentions.push_back({11, 16, "Paris", std::nullopt, std::nullopt});
    docs.push_back(extra);

    InstanceStats stats;
    auto instances = to_training_instances(docs, idx, g, 20, ContextMode::None, &stats);
    CHECK(stats.mentions == 7);
    CHECK(stats.excluded_no_gold_id == 1);
    CHECK(stats.excluded_gold_not_generated == 1);
    CHECK(stats.instances == instances.size());
    CHECK(stats.instances + stats.excluded() == stats.mentions);

    for (const auto& inst : instances) {
        REQUIRE(inst.gold_index.has_value());
        CHECK(*inst.gold_index < inst.candidates.size());
        CHECK(inst.context.empty());
    }
    // Mention whose gold is generator rank 1: Minnesota is a unique exact hit.
    bool checked = false;
    for (const auto& inst : instances) {
        if (inst.mention == "Minnesota") {
            CHECK(*inst.gold_index == 0);
            checked = true;
        }
    }
    CHECK(checked);
}

TEST_CASE("to_training_instances: two-stage mode attaches gold document context") {
    Gazetteer g = load_mini_gazetteer();
    NameIndex idx = build_index(g);
    auto docs = topores::test::load_docs_fixture("docs/alberta_budget.jsonl");
    InstanceStats stats;
    auto instances =
        to_training_instances(docs, idx, g, 20, ContextMode::TwoStage, &stats);
    REQUIRE(stats.instances == 3);
    // country code first, then the admin1 code
    for (const auto& inst : instances) {
        CHECK(inst.context.rendered() == "CA||01");
    }
    // a document without admin/country golds yields empty contexts
    auto plain = topores::test::load_docs_fixture("docs/small_corpus.jsonl");
    plain.erase(plain.begin());  // keep only the Vienna/Tucson document
    auto plain_instances = to_training_instances(plain, idx, g, 20,
                                                 ContextMode::TwoStage);
    REQUIRE_FALSE(plain_instances.empty());
    for (const auto& inst : plain_instances) CHECK(inst.context.empty());
}
