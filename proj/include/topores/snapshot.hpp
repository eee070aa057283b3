// Versioned binary serialization for gazetteer, name index, and reranker
// models. Little-endian, length-prefixed, with an FNV-1a checksum trailer;
// byte-identical output for identical inputs.
#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topores/gazetteer.hpp"
#include "topores/index.hpp"
#include "topores/reranker.hpp"

namespace topores {

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSnapshotMagic = "TOPORES.SNAP";
inline constexpr std::string_view kGazetteerMagic = "TOPORES.GAZT";
inline constexpr std::string_view kModelMagic = "TOPORES.MODL";
inline constexpr uint32_t kSnapshotVersion = 1;
inline constexpr uint32_t kGazetteerVersion = 1;
inline constexpr uint32_t kModelVersion = 1;

namespace detail {

inline constexpr uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

class BinWriter {
public:
    explicit BinWriter(std::ostream& out) : out_(out) {}

    void bytes(const void* data, size_t n) {
        const char* p = static_cast<const char*>(data);
        out_.write(p, static_cast<std::streamsize>(n));
        for (size_t i = 0; i < n; ++i) {
            hash_ ^= static_cast<unsigned char>(p[i]);
            hash_ *= kFnvPrime;
        }
    }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u32(uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        bytes(b, 4);
    }
    void u64(uint64_t v) {
        u32(static_cast<uint32_t>(v));
        u32(static_cast<uint32_t>(v >> 32));
    }
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    // Writes the running checksum; excluded from the hash itself.
    void checksum() {
        uint64_t h = hash_;
        u64(h);
    }

private:
    std::ostream& out_;
    uint64_t hash_ = kFnvOffset;
};

class BinReader {
public:
    explicit BinReader(std::istream& in) : in_(in) {}

    void bytes(void* data, size_t n) {
        char* p = static_cast<char*>(data);
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw SnapshotError("truncated snapshot");
        }
        for (size_t i = 0; i < n; ++i) {
            hash_ ^= static_cast<unsigned char>(p[i]);
            hash_ *= kFnvPrime;
        }
    }
    uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
    uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    }
    uint64_t u64() {
        uint64_t lo = u32();
        uint64_t hi = u32();
        return lo | (hi << 32);
    }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        std::string s(n, '\0');
        if (n > 0) bytes(s.data(), n);
        return s;
    }
    void verify_checksum() {
        uint64_t expected = hash_;
        uint64_t stored = u64();
        if (stored != expected) throw SnapshotError("snapshot checksum mismatch");
    }

private:
    std::istream& in_;
    uint64_t hash_ = kFnvOffset;
};

inline void write_gazetteer_block(BinWriter& w, const Gazetteer& g) {
    w.u64(g.entries.size());
    for (const GeoEntry& e : g.entries) {
        w.i64(e.id);
        w.str(e.canonical_name);
        w.u32(static_cast<uint32_t>(e.synonyms.size()));
        for (const auto& s : e.synonyms) w.str(s);
        w.f64(e.latitude);
        w.f64(e.longitude);
        w.i64(e.population);
        w.str(e.feature_class);
        w.str(e.feature_code);
        w.i32(e.feature_ordinal);
        w.str(e.country_code);
        w.str(e.admin1_code);
        w.str(e.admin2_code);
        w.str(e.admin3_code);
    }
    w.u32(static_cast<uint32_t>(g.feature_inventory.size()));
    for (const auto& code : g.feature_inventory) w.str(code);
    w.u32(static_cast<uint32_t>(g.adjectival_forms.size()));
    for (const auto& [form, id] : g.adjectival_forms) {
        w.str(form);
        w.i64(id);
    }
    const uint64_t stats[9] = {g.stats.main_rows, g.stats.main_accepted,
                               g.stats.main_skipped, g.stats.alt_rows,
                               g.stats.alt_accepted, g.stats.alt_skipped,
                               g.stats.adj_rows, g.stats.adj_accepted,
                               g.stats.adj_skipped};
    for (uint64_t v : stats) w.u64(v);
}

inline Gazetteer read_gazetteer_block(BinReader& r) {
    Gazetteer g;
    uint64_t n = r.u64();
    g.entries.resize(n);
    for (GeoEntry& e : g.entries) {
        e.id = r.i64();
        e.canonical_name = r.str();
        uint32_t syn = r.u32();
        e.synonyms.resize(syn);
        for (auto& s : e.synonyms) s = r.str();
        e.latitude = r.f64();
        e.longitude = r.f64();
        e.population = r.i64();
        e.feature_class = r.str();
        e.feature_code = r.str();
        e.feature_ordinal = r.i32();
        e.country_code = r.str();
        e.admin1_code = r.str();
        e.admin2_code = r.str();
        e.admin3_code = r.str();
    }
    uint32_t inv = r.u32();
    g.feature_inventory.resize(inv);
    for (auto& code : g.feature_inventory) code = r.str();
    uint32_t adj = r.u32();
    g.adjectival_forms.resize(adj);
    for (auto& [form, id] : g.adjectival_forms) {
        form = r.str();
        id = r.i64();
    }
    uint64_t* stats[9] = {&g.stats.main_rows, &g.stats.main_accepted,
                          &g.stats.main_skipped, &g.stats.alt_rows,
                          &g.stats.alt_accepted, &g.stats.alt_skipped,
                          &g.stats.adj_rows, &g.stats.adj_accepted,
                          &g.stats.adj_skipped};
    for (uint64_t* v : stats) *v = r.u64();
    g.reindex();
    return g;
}

inline void write_postings(
    BinWriter& w,
    const std::unordered_map<std::string, std::vector<uint32_t>>& m) {
    std::map<std::string_view, const std::vector<uint32_t>*> sorted;
    for (const auto& [key, ids] : m) sorted.emplace(key, &ids);
    w.u32(static_cast<uint32_t>(sorted.size()));
    for (const auto& [key, ids] : sorted) {
        w.str(key);
        w.u32(static_cast<uint32_t>(ids->size()));
        for (uint32_t id : *ids) w.u32(id);
    }
}

inline void read_postings(BinReader& r,
                          std::unordered_map<std::string, std::vector<uint32_t>>& m) {
    uint32_t keys = r.u32();
    m.reserve(keys);
    for (uint32_t i = 0; i < keys; ++i) {
        std::string key = r.str();
        uint32_t n = r.u32();
        std::vector<uint32_t> ids(n);
        for (auto& id : ids) id = r.u32();
        m.emplace(std::move(key), std::move(ids));
    }
}

inline void write_index_block(BinWriter& w, const NameIndex& idx) {
    w.u64(idx.records.size());
    for (const NameRecord& rec : idx.records) {
        w.str(rec.name);
        w.u32(rec.entry_index);
    }
    write_postings(w, idx.exact_map);
    write_postings(w, idx.trigram_postings);
    write_postings(w, idx.token_postings);
    write_postings(w, idx.abbreviation_map);
    write_postings(w, idx.country_code_map);
}

inline NameIndex read_index_block(BinReader& r) {
    NameIndex idx;
    uint64_t n = r.u64();
    idx.records.resize(n);
    for (NameRecord& rec : idx.records) {
        rec.name = r.str();
        rec.entry_index = r.u32();
        rec.norm_cps = normalize_name_cps(rec.name);
        rec.normalized = encode_utf8(rec.norm_cps);
    }
    read_postings(r, idx.exact_map);
    read_postings(r, idx.trigram_postings);
    read_postings(r, idx.token_postings);
    read_postings(r, idx.abbreviation_map);
    read_postings(r, idx.country_code_map);
    for (uint32_t rid = 0; rid < idx.records.size(); ++rid) {
        size_t len = idx.records[rid].norm_cps.size();
        if (len == 0) continue;
        if (idx.length_buckets.size() <= len) idx.length_buckets.resize(len + 1);
        idx.length_buckets[len].push_back(rid);
    }
    return idx;
}

inline void check_magic(BinReader& r, std::string_view magic) {
    std::string got(magic.size(), '\0');
    r.bytes(got.data(), got.size());
    if (got != magic) throw SnapshotError("not a recognized snapshot file");
}

} // namespace detail

struct Snapshot {
    Gazetteer gazetteer;
    NameIndex index;
};

// Gazetteer-only snapshot, for pipelines that rebuild the index themselves.
inline void save_gazetteer(std::ostream& out, const Gazetteer& g) {
    detail::BinWriter w(out);
    w.bytes(kGazetteerMagic.data(), kGazetteerMagic.size());
    w.u32(kGazetteerVersion);
    detail::write_gazetteer_block(w, g);
    w.checksum();
    if (!out) throw SnapshotError("failed writing gazetteer snapshot");
}

inline Gazetteer load_gazetteer(std::istream& in) {
    if (!in.good()) throw SnapshotError("cannot open gazetteer snapshot");
    detail::BinReader r(in);
    detail::check_magic(r, kGazetteerMagic);
    uint32_t version = r.u32();
    if (version != kGazetteerVersion) {
        throw SnapshotError("unsupported gazetteer snapshot version " +
                            std::to_string(version));
    }
    Gazetteer g = detail::read_gazetteer_block(r);
    r.verify_checksum();
    return g;
}

inline void save_snapshot(std::ostream& out, const Gazetteer& g,
                          const NameIndex& idx) {
    detail::BinWriter w(out);
    w.bytes(kSnapshotMagic.data(), kSnapshotMagic.size());
    w.u32(kSnapshotVersion);
    detail::write_gazetteer_block(w, g);
    detail::write_index_block(w, idx);
    w.checksum();
    if (!out) throw SnapshotError("failed writing snapshot");
}

inline Snapshot load_snapshot(std::istream& in) {
    if (!in.good()) throw SnapshotError("cannot open snapshot");
    detail::BinReader r(in);
    detail::check_magic(r, kSnapshotMagic);
    uint32_t version = r.u32();
    if (version != kSnapshotVersion) {
        throw SnapshotError("unsupported snapshot version " + std::to_string(version));
    }
    Snapshot snap;
    snap.gazetteer = detail::read_gazetteer_block(r);
    snap.index = detail::read_index_block(r);
    r.verify_checksum();
    return snap;
}

inline void save_model(std::ostream& out, const RerankerModel& model) {
    detail::BinWriter w(out);
    w.bytes(kModelMagic.data(), kModelMagic.size());
    w.u32(kModelVersion);
    w.i32(model.config.phi_dims);
    w.i32(model.config.type_dims);
    w.i32(model.config.hidden_dims);
    w.u64(model.w1.size());
    for (double v : model.w1) w.f64(v);
    w.u64(model.w2.size());
    for (double v : model.w2) w.f64(v);
    w.f64(model.meta.learning_rate);
    w.i32(model.meta.epochs);
    w.i32(model.meta.batch_size);
    w.f64(model.meta.momentum);
    w.u64(model.meta.seed);
    w.checksum();
    if (!out) throw SnapshotError("failed writing model");
}

inline RerankerModel load_model(std::istream& in) {
    if (!in.good()) throw SnapshotError("cannot open model file");
    detail::BinReader r(in);
    detail::check_magic(r, kModelMagic);
    uint32_t version = r.u32();
    if (version != kModelVersion) {
        throw SnapshotError("unsupported model version " + std::to_string(version));
    }
    RerankerModel model;
    model.config.phi_dims = r.i32();
    model.config.type_dims = r.i32();
    model.config.hidden_dims = r.i32();
    uint64_t n1 = r.u64();
    model.w1.resize(n1);
    for (double& v : model.w1) v = r.f64();
    uint64_t n2 = r.u64();
    model.w2.resize(n2);
    for (double& v : model.w2) v = r.f64();
    model.meta.learning_rate = r.f64();
    model.meta.epochs = r.i32();
    model.meta.batch_size = r.i32();
    model.meta.momentum = r.f64();
    model.meta.seed = r.u64();
    r.verify_checksum();
    const size_t expect_w1 = static_cast<size_t>(model.config.hidden_dims) *
                             static_cast<size_t>(model.config.total_dims());
    if (model.w1.size() != expect_w1 ||
        model.w2.size() != static_cast<size_t>(model.config.hidden_dims)) {
        throw SnapshotError("model weight shapes inconsistent with configuration");
    }
    return model;
}

} // namespace topores
