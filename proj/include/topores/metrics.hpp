// Evaluation metrics: exact-id accuracy, accuracy@161km, mean geodesic
// error, log-scaled error AUC, and a per-feature-class precision/recall
// breakdown. Distances use the spherical haversine formula, R = 6371 km.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topores/gazetteer.hpp"

namespace topores {

struct GeoPoint {
    double latitude = 0.0;
    double longitude = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;
// Half the maximum circumference; normalizes the error AUC.
inline constexpr double kMaxErrorKm = 20039.0;
inline constexpr double kCloseThresholdKm = 161.0;

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg2rad = 3.14159265358979323846 / 180.0;
    const double lat1 = a.latitude * deg2rad;
    const double lat2 = b.latitude * deg2rad;
    const double dlat = (b.latitude - a.latitude) * deg2rad;
    const double dlon = (b.longitude - a.longitude) * deg2rad;
    const double sa = std::sin(dlat / 2.0);
    const double sb = std::sin(dlon / 2.0);
    double h = sa * sa + std::cos(lat1) * std::cos(lat2) * sb * sb;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// Correct-id fraction over all mentions; absent predictions count as wrong.
inline double accuracy(const std::vector<std::optional<int64_t>>& preds,
                       const std::vector<std::optional<int64_t>>& golds) {
    if (golds.empty()) return 0.0;
    size_t correct = 0;
    for (size_t i = 0; i < golds.size(); ++i) {
        if (preds[i] && golds[i] && *preds[i] == *golds[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(golds.size());
}

// Fraction of errors strictly below the threshold; slots without an error
// (absent prediction) count as failures.
inline double fraction_below(const std::vector<std::optional<double>>& errors_km,
                             double threshold_km) {
    if (errors_km.empty()) return 0.0;
    size_t hit = 0;
    for (const auto& e : errors_km) {
        if (e && *e < threshold_km) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(errors_km.size());
}

inline double accuracy_at_161(const std::vector<std::optional<double>>& errors_km) {
    return fraction_below(errors_km, kCloseThresholdKm);
}

// Mean over mentions that have a prediction; the absent count is reported
// separately by the caller.
inline std::optional<double> mean_error_km(
    const std::vector<std::optional<double>>& errors_km) {
    double sum = 0.0;
    size_t n = 0;
    for (const auto& e : errors_km) {
        if (e) { sum += *e; ++n; }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

// Log-scaled normalized area under the error curve: mean of
// ln(err+1)/ln(MAX+1), clamped at MAX. 0 when all errors are zero, 1 when
// every error reaches MAX.
inline double auc_error(const std::vector<double>& errors_km) {
    if (errors_km.empty()) return 0.0;
    const double denom = std::log(kMaxErrorKm + 1.0);
    double sum = 0.0;
    for (double e : errors_km) {
        sum += std::log(std::min(std::max(e, 0.0), kMaxErrorKm) + 1.0) / denom;
    }
    return sum / static_cast<double>(errors_km.size());
}

// Unscaled variant, emitted alongside the log-scaled one in reports.
inline double auc_error_raw(const std::vector<double>& errors_km) {
    if (errors_km.empty()) return 0.0;
    double sum = 0.0;
    for (double e : errors_km) {
        sum += std::min(std::max(e, 0.0), kMaxErrorKm) / kMaxErrorKm;
    }
    return sum / static_cast<double>(errors_km.size());
}

// Feature-class grouping for the per-type breakdown.
inline const char* type_group(const GeoEntry& e) {
    if (e.is_country()) return "Country";
    if (e.feature_code == "ADM1") return "State";
    if (e.feature_code == "ADM2") return "County";
    return "Other";
}

struct GroupPR {
    std::optional<double> precision;  // absent when nothing predicted in group
    std::optional<double> recall;
    uint64_t gold_count = 0;
    uint64_t pred_count = 0;
    uint64_t correct = 0;
};

// Groups golds by the gold entry's feature type and predictions by the
// predicted entry's; precision = correct/predicted-in-group, recall =
// correct/gold-in-group.
inline std::map<std::string, GroupPR> per_type_report(
    const std::vector<std::optional<int64_t>>& preds,
    const std::vector<std::optional<int64_t>>& golds, const Gazetteer& g) {
    std::map<std::string, GroupPR> groups;
    for (const char* name : {"Country", "State", "County", "Other"}) {
        groups[name] = GroupPR{};
    }
    for (size_t i = 0; i < golds.size(); ++i) {
        const GeoEntry* gold_e = golds[i] ? g.lookup(*golds[i]) : nullptr;
        const GeoEntry* pred_e = (i < preds.size() && preds[i]) ? g.lookup(*preds[i]) : nullptr;
        if (gold_e != nullptr) ++groups[type_group(*gold_e)].gold_count;
        if (pred_e != nullptr) {
            GroupPR& gp = groups[type_group(*pred_e)];
            ++gp.pred_count;
            if (gold_e != nullptr && gold_e->id == pred_e->id) ++gp.correct;
        }
    }
    for (auto& [name, gp] : groups) {
        if (gp.pred_count > 0) {
            gp.precision = static_cast<double>(gp.correct) / static_cast<double>(gp.pred_count);
        }
        if (gp.gold_count > 0) {
            gp.recall = static_cast<double>(gp.correct) / static_cast<double>(gp.gold_count);
        }
    }
    return groups;
}

struct EvalReport {
    size_t n = 0;
    double accuracy = 0.0;
    double accuracy_at_161 = 0.0;
    std::optional<double> mean_error_km;
    std::optional<double> auc;      // log scaled
    std::optional<double> auc_raw;
    size_t absent_predictions = 0;
    size_t missing_gold_points = 0;
    std::map<std::string, GroupPR> per_type;
    std::map<size_t, double> recall_at_k;
};

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["accuracy"] = r.accuracy;
    j["accuracy_at_161"] = r.accuracy_at_161;
    j["mean_error_km"] =
        r.mean_error_km ? nlohmann::json(*r.mean_error_km) : nlohmann::json();
    j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json();
    j["auc_raw"] = r.auc_raw ? nlohmann::json(*r.auc_raw) : nlohmann::json();
    j["absent_predictions"] = r.absent_predictions;
    j["missing_gold_points"] = r.missing_gold_points;
    nlohmann::json types = nlohmann::json::object();
    for (const auto& [name, gp] : r.per_type) {
        nlohmann::json t;
        t["precision"] = gp.precision ? nlohmann::json(*gp.precision) : nlohmann::json();
        t["recall"] = gp.recall ? nlohmann::json(*gp.recall) : nlohmann::json();
        t["gold_count"] = gp.gold_count;
        t["pred_count"] = gp.pred_count;
        t["correct"] = gp.correct;
        types[name] = std::move(t);
    }
    j["per_type"] = std::move(types);
    nlohmann::json rk = nlohmann::json::object();
    for (const auto& [k, v] : r.recall_at_k) rk[std::to_string(k)] = v;
    j["recall_at_k"] = std::move(rk);
    return j;
}

inline std::string render_table(const EvalReport& r) {
    std::ostringstream os;
    auto opt = [](const std::optional<double>& v, const char* fmt) {
        char buf[64];
        if (!v) return std::string("-");
        std::snprintf(buf, sizeof(buf), fmt, *v);
        return std::string(buf);
    };
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %10s %8s %8s\n", "mentions",
                  "Acc", "A161", "Err(km)", "AUC", "absent");
    os << line;
    std::snprintf(line, sizeof(line), "%-10zu %8.3f %8.3f %10s %8s %8zu\n", r.n,
                  r.accuracy, r.accuracy_at_161,
                  opt(r.mean_error_km, "%.1f").c_str(), opt(r.auc, "%.3f").c_str(),
                  r.absent_predictions);
    os << line;
    if (!r.recall_at_k.empty()) {
        os << "recall@k:";
        for (const auto& [k, v] : r.recall_at_k) {
            std::snprintf(line, sizeof(line), "  R@%zu=%.3f", k, v);
            os << line;
        }
        os << "\n";
    }
    os << "per-type (precision/recall):\n";
    for (const auto& [name, gp] : r.per_type) {
        std::snprintf(line, sizeof(line), "  %-8s %8s %8s  (gold %llu, pred %llu)\n",
                      name.c_str(), opt(gp.precision, "%.3f").c_str(),
                      opt(gp.recall, "%.3f").c_str(),
                      static_cast<unsigned long long>(gp.gold_count),
                      static_cast<unsigned long long>(gp.pred_count));
        os << line;
    }
    return os.str();
}

} // namespace topores
