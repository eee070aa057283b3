#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "support/fixtures.hpp"
#include "topores/gazetteer.hpp"

using namespace topores;
using topores::test::load_mini_gazetteer;

TEST_CASE("parse accepts well-formed rows and skips malformed ones") {
    Gazetteer g = load_mini_gazetteer();
    // 35 input rows: 31 valid, 4 malformed (bad id, wrong column count,
    // latitude out of range, duplicate id).
    CHECK(g.stats.main_rows == 35);
    CHECK(g.stats.main_accepted == 31);
    CHECK(g.stats.main_skipped == 4);
    CHECK(g.stats.main_accepted + g.stats.main_skipped == g.stats.main_rows);
    CHECK(g.entries.size() == 31);
}

TEST_CASE("well-known entry: Austria") {
    Gazetteer g = load_mini_gazetteer();
    const GeoEntry* e = g.lookup(2782113);
    REQUIRE(e != nullptr);
    CHECK(e->canonical_name == "Austria");
    CHECK(e->feature_code == "PCLI");
    CHECK(e->is_country());
    CHECK(e->country_code == "AT");
}

TEST_CASE("lookup of unknown id signals absence") {
    Gazetteer g = load_mini_gazetteer();
    CHECK(g.lookup(999999999) == nullptr);
}

TEST_CASE("lookup succeeds for every accepted id") {
    Gazetteer g = load_mini_gazetteer();
    for (const GeoEntry& e : g.entries) {
        REQUIRE(g.lookup(e.id) == &e);
    }
}

TEST_CASE("synonyms merge inline column with alternate-names table") {
    Gazetteer g = load_mini_gazetteer();
    const GeoEntry* austria = g.lookup(2782113);
    REQUIRE(austria != nullptr);
    // inline: Republic of Austria, Oesterreich; table: Austria (dup of canonical)
    CHECK(std::count(austria->synonyms.begin(), austria->synonyms.end(),
                     "Republic of Austria") == 1);
    CHECK(std::count(austria->synonyms.begin(), austria->synonyms.end(),
                     "Oesterreich") == 1);

    const GeoEntry* canada = g.lookup(6251999);
    REQUIRE(canada != nullptr);
    CHECK(std::count(canada->synonyms.begin(), canada->synonyms.end(), "Kanadaa") == 1);

    const GeoEntry* vienna = g.lookup(2761369);
    REQUIRE(vienna != nullptr);
    CHECK(std::count(vienna->synonyms.begin(), vienna->synonyms.end(), "Wien") == 1);
    CHECK(std::count(vienna->synonyms.begin(), vienna->synonyms.end(), "Вена") == 1);

    CHECK(g.stats.alt_skipped == 2);  // unknown id + malformed row
}

TEST_CASE("empty alternate stream leaves inline synonyms only") {
    std::ifstream main_in = topores::test::open_fixture("mini/geonames.tsv");
    Gazetteer g = parse_gazetteer(main_in, nullptr, nullptr, nullptr);
    const GeoEntry* austria = g.lookup(2782113);
    REQUIRE(austria != nullptr);
    CHECK(austria->synonyms ==
          std::vector<std::string>{"Republic of Austria", "Oesterreich"});
}

TEST_CASE("adjectival forms become searchable synonyms of countries only") {
    Gazetteer g = load_mini_gazetteer();
    const GeoEntry* austria = g.lookup(2782113);
    REQUIRE(austria != nullptr);
    CHECK(std::count(austria->synonyms.begin(), austria->synonyms.end(),
                     "Austrian") == 1);
    bool mapped = false;
    for (const auto& [form, id] : g.adjectival_forms) {
        if (form == "Austrian") {
            mapped = true;
            CHECK(id == 2782113);
        }
        const GeoEntry* target = g.lookup(id);
        REQUIRE(target != nullptr);
        CHECK(target->is_country());
    }
    CHECK(mapped);
    // "Kentuckian" (ADM1 target) and "Martian" (unknown id) are rejected.
    CHECK(g.stats.adj_skipped == 2);
    const GeoEntry* kentucky = g.lookup(6254925);
    REQUIRE(kentucky != nullptr);
    CHECK(std::count(kentucky->synonyms.begin(), kentucky->synonyms.end(),
                     "Kentuckian") == 0);
}

TEST_CASE("feature inventory from the code file, stable across parses") {
    Gazetteer g1 = load_mini_gazetteer();
    Gazetteer g2 = load_mini_gazetteer();
    CHECK(g1.feature_inventory == g2.feature_inventory);
    CHECK(g1.feature_inventory.size() == 9);  // fixture file line count
    for (const GeoEntry& e : g1.entries) {
        REQUIRE(e.feature_ordinal >= 0);
        CHECK(g1.feature_inventory[e.feature_ordinal] == e.feature_code);
        CHECK(g2.lookup(e.id)->feature_ordinal == e.feature_ordinal);
    }
}

TEST_CASE("feature inventory from observed codes when no file given") {
    Gazetteer g = load_mini_gazetteer(false);
    CHECK(!g.feature_inventory.empty());
    // First occurrence order: the first row is Austria (PCLI).
    CHECK(g.feature_inventory[0] == "PCLI");
    for (const GeoEntry& e : g.entries) {
        CHECK(g.feature_inventory[e.feature_ordinal] == e.feature_code);
    }
}

TEST_CASE("admin chain") {
    Gazetteer g = load_mini_gazetteer();
    const GeoEntry* canada = g.lookup(6251999);
    CHECK(admin_chain(g, *canada) == std::vector<std::string>{"CA"});
    const GeoEntry* alberta = g.lookup(5883102);
    CHECK(admin_chain(g, *alberta) == std::vector<std::string>{"CA", "01"});
    const GeoEntry* clay_mn = g.lookup(910003);
    CHECK(admin_chain(g, *clay_mn) == std::vector<std::string>{"US", "MN", "027"});
    const GeoEntry* south_pole = g.lookup(930001);
    CHECK(admin_chain(g, *south_pole).empty());
}

TEST_CASE("context code picks the level of the entry itself") {
    Gazetteer g = load_mini_gazetteer();
    CHECK(context_code(*g.lookup(6251999)) == "CA");   // country
    CHECK(context_code(*g.lookup(5883102)) == "01");   // admin1
    CHECK(context_code(*g.lookup(910003)) == "027");   // admin2
    CHECK(!context_code(*g.lookup(5946768)).has_value());  // city
}

TEST_CASE("latitude and longitude within bounds") {
    Gazetteer g = load_mini_gazetteer();
    for (const GeoEntry& e : g.entries) {
        CHECK(e.latitude >= -90.0);
        CHECK(e.latitude <= 90.0);
        CHECK(e.longitude >= -180.0);
        CHECK(e.longitude <= 180.0);
        CHECK(!e.canonical_name.empty());
        CHECK(e.population >= 0);
    }
}

TEST_CASE("unreadable stream raises an ingestion error") {
    std::ifstream missing("/nonexistent/gazetteer.tsv");
    CHECK_THROWS_AS(parse_gazetteer(missing), IngestError);
}

TEST_CASE("round trip: every indexed name resolves to its entry") {
    Gazetteer g = load_mini_gazetteer();
    for (const GeoEntry& e : g.entries) {
        const GeoEntry* back = g.lookup(e.id);
        REQUIRE(back != nullptr);
        CHECK(back->canonical_name == e.canonical_name);
        for (const auto& s : e.synonyms) {
            bool found = back->canonical_name == s ||
                         std::count(back->synonyms.begin(), back->synonyms.end(), s) > 0;
            CHECK(found);
        }
    }
}
