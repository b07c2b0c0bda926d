#pragma once

// Rating-level and pairwise evaluation metrics.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace reviewkit {

inline constexpr const char* kMetricsSchemaVersion = "1";

double mse(std::span<const double> predicted, std::span<const double> truth);

/// 1-based ranks; tied values share the average of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of fractional ranks. Throws UndefinedMetric when
/// either vector is constant.
double spearman(std::span<const double> predicted, std::span<const double> truth);

/// 1 when sgn(s1 - s2) == sgn(t1 - t2), else 0.
double pair_relation(double s1, double s2, double t1, double t2);

/// 1 for zero total deviation, 0.6 for a total deviation of at most 2, else 0.
double pair_absolute(double s1, double s2, double t1, double t2);

/// 1 when |s1 - s2| >= |t1 - t2|, else 0.
double pair_confidence(double s1, double s2, double t1, double t2);

/// Harrell-style C-index over truth-distinguishable pairs, predicted ties
/// credited 0.5. O(n log n). Throws UndefinedMetric without comparable pairs.
double concordance_index(std::span<const double> predicted, std::span<const double> truth);

struct PairPolicy {
    enum class Kind { AllPairs, Sampled, Auto };

    Kind kind = Kind::Auto;
    std::uint64_t sample_size = 0;
    std::uint64_t seed = 0;

    static PairPolicy all_pairs() { return {Kind::AllPairs, 0, 0}; }
    static PairPolicy sampled(std::uint64_t n, std::uint64_t seed) { return {Kind::Sampled, n, seed}; }
    /// all_pairs up to 1000 records, otherwise sampled(100 * n, seed).
    static PairPolicy automatic(std::uint64_t seed = 0) { return {Kind::Auto, 0, seed}; }

    /// Accepts "all", "auto", "auto:SEED" and "sampled:N:SEED".
    static PairPolicy parse(const std::string& text);

    /// Concrete policy for a record count (never Auto).
    PairPolicy resolve(std::size_t n_records) const;
    std::string describe() const;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Unordered pairs (i < j) over n items, sorted. Sampled policies draw
/// distinct pairs; a request above C(n, 2) yields every pair.
std::vector<IndexPair> select_pairs(std::size_t n, const PairPolicy& policy);

struct RunRecord {
    /// Absent when the model's rating could not be parsed.
    std::optional<double> predicted;
    double truth = 0.0;
};

struct MetricsReport {
    std::size_t n_records = 0;
    std::size_t n_usable = 0;
    std::size_t n_excluded = 0;
    std::string pair_policy;
    std::size_t n_pairs = 0;
    double mse = 0.0;
    std::optional<double> spearman;
    double pair_relation = 0.0;
    double pair_absolute = 0.0;
    double pair_confidence = 0.0;
    std::optional<double> concordance;
    /// metric name -> reason it could not be computed
    std::map<std::string, std::string> errors;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

/// Throws InvalidInput when fewer than two records have a usable prediction.
MetricsReport evaluate_run(std::span<const RunRecord> records, const PairPolicy& policy);

} // namespace reviewkit
