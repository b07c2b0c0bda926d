#include "reviewkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "reviewkit/error.hpp"
#include "reviewkit/rng.hpp"

namespace reviewkit {

namespace {

void check_paired(std::span<const double> a, std::span<const double> b, std::size_t min_size) {
    if (a.size() != b.size()) {
        fail(ErrorKind::InvalidInput,
             fmt::format("length mismatch: {} predictions vs {} truths", a.size(), b.size()));
    }
    if (a.size() < min_size) {
        fail(ErrorKind::InvalidInput,
             fmt::format("need at least {} values, got {}", min_size, a.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            fail(ErrorKind::InvalidInput, fmt::format("non-finite value at index {}", i));
        }
    }
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Fenwick tree over compressed prediction ranks.
class CountTree {
public:
    explicit CountTree(std::size_t n) : tree_(n + 1, 0) {}

    void add(std::size_t index) {
        for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }

    /// Count of inserted indices < index.
    std::uint64_t count_below(std::size_t index) const {
        std::uint64_t total = 0;
        for (std::size_t i = index; i > 0; i -= i & (~i + 1)) total += tree_[i];
        return total;
    }

private:
    std::vector<std::uint64_t> tree_;
};

} // namespace

double mse(std::span<const double> predicted, std::span<const double> truth) {
    check_paired(predicted, truth, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - truth[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predicted.size());
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) share rank mean((i+1)..(j+1)).
        const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> predicted, std::span<const double> truth) {
    check_paired(predicted, truth, 2);
    const auto rp = fractional_ranks(predicted);
    const auto rt = fractional_ranks(truth);
    const double n = static_cast<double>(rp.size());
    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) {
        mp += rp[i];
        mt += rt[i];
    }
    mp /= n;
    mt /= n;
    double cov = 0.0, vp = 0.0, vt = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) {
        const double dp = rp[i] - mp;
        const double dt = rt[i] - mt;
        cov += dp * dt;
        vp += dp * dp;
        vt += dt * dt;
    }
    if (vp == 0.0 || vt == 0.0) {
        fail(ErrorKind::UndefinedMetric, "spearman correlation is undefined for a constant vector");
    }
    return std::clamp(cov / std::sqrt(vp * vt), -1.0, 1.0);
}

double pair_relation(double s1, double s2, double t1, double t2) {
    return sgn(s1 - s2) == sgn(t1 - t2) ? 1.0 : 0.0;
}

double pair_absolute(double s1, double s2, double t1, double t2) {
    const double deviation = std::abs(s1 - t1) + std::abs(s2 - t2);
    if (deviation == 0.0) return 1.0;
    if (deviation <= 2.0) return 0.6;
    return 0.0;
}

double pair_confidence(double s1, double s2, double t1, double t2) {
    return std::abs(s1 - s2) >= std::abs(t1 - t2) ? 1.0 : 0.0;
}

double concordance_index(std::span<const double> predicted, std::span<const double> truth) {
    check_paired(predicted, truth, 2);
    const std::size_t n = predicted.size();

    std::vector<double> levels(predicted.begin(), predicted.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto level_of = [&](double p) {
        return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), p) -
                                        levels.begin());
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return truth[a] < truth[b]; });

    // Sweep truth groups in ascending order. Every earlier element has a
    // strictly smaller truth, so the pair is concordant iff its prediction
    // is smaller too.
    CountTree tree(levels.size());
    std::uint64_t comparable = 0, concordant = 0, tied = 0, inserted = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && truth[order[j]] == truth[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            const std::size_t level = level_of(predicted[order[k]]);
            const std::uint64_t below = tree.count_below(level);
            const std::uint64_t at_or_below = tree.count_below(level + 1);
            concordant += below;
            tied += at_or_below - below;
            comparable += inserted;
        }
        for (std::size_t k = i; k < j; ++k) tree.add(level_of(predicted[order[k]]));
        inserted += j - i;
        i = j;
    }
    if (comparable == 0) {
        fail(ErrorKind::UndefinedMetric, "concordance index needs at least one pair with distinct truths");
    }
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           static_cast<double>(comparable);
}

PairPolicy PairPolicy::parse(const std::string& text) {
    if (text == "all" || text == "all_pairs") return all_pairs();
    if (text == "auto") return automatic();
    auto parse_u64 = [&](const std::string& s) -> std::uint64_t {
        if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
            fail(ErrorKind::InvalidInput, fmt::format("invalid pair policy '{}'", text));
        }
        return std::stoull(s);
    };
    if (text.rfind("auto:", 0) == 0) return automatic(parse_u64(text.substr(5)));
    if (text.rfind("sampled:", 0) == 0) {
        const auto rest = text.substr(8);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) {
            fail(ErrorKind::InvalidInput, fmt::format("invalid pair policy '{}'", text));
        }
        return sampled(parse_u64(rest.substr(0, colon)), parse_u64(rest.substr(colon + 1)));
    }
    fail(ErrorKind::InvalidInput,
         fmt::format("invalid pair policy '{}' (expected all, auto[:SEED] or sampled:N:SEED)", text));
}

PairPolicy PairPolicy::resolve(std::size_t n_records) const {
    if (kind != Kind::Auto) return *this;
    if (n_records <= 1000) return all_pairs();
    return sampled(100 * static_cast<std::uint64_t>(n_records), seed);
}

std::string PairPolicy::describe() const {
    switch (kind) {
    case Kind::AllPairs: return "all_pairs";
    case Kind::Sampled: return fmt::format("sampled(n={}, seed={})", sample_size, seed);
    case Kind::Auto: return fmt::format("auto(seed={})", seed);
    }
    return "";
}

std::vector<IndexPair> select_pairs(std::size_t n, const PairPolicy& policy) {
    const PairPolicy p = policy.resolve(n);
    const std::uint64_t total = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::vector<IndexPair> pairs;
    if (p.kind == PairPolicy::Kind::AllPairs || p.sample_size >= total) {
        pairs.reserve(total);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
        return pairs;
    }
    Rng rng(p.seed);
    std::set<IndexPair> chosen;
    while (chosen.size() < p.sample_size) {
        auto a = static_cast<std::size_t>(uniform_index(rng, n));
        auto b = static_cast<std::size_t>(uniform_index(rng, n));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        chosen.emplace(a, b);
    }
    return {chosen.begin(), chosen.end()};
}

MetricsReport evaluate_run(std::span<const RunRecord> records, const PairPolicy& policy) {
    std::vector<double> predicted, truth;
    for (const auto& r : records) {
        if (!std::isfinite(r.truth)) fail(ErrorKind::InvalidInput, "truth ratings must be finite");
        if (r.predicted && std::isfinite(*r.predicted)) {
            predicted.push_back(*r.predicted);
            truth.push_back(r.truth);
        }
    }
    if (predicted.size() < 2) {
        fail(ErrorKind::InvalidInput,
             fmt::format("need at least 2 records with a usable prediction, got {}", predicted.size()));
    }

    MetricsReport report;
    report.n_records = records.size();
    report.n_usable = predicted.size();
    report.n_excluded = records.size() - predicted.size();
    const PairPolicy resolved = policy.resolve(predicted.size());
    report.pair_policy = resolved.describe();
    report.mse = mse(predicted, truth);

    try {
        report.spearman = spearman(predicted, truth);
    } catch (const Error& e) {
        report.errors["spearman"] = e.what();
    }
    try {
        report.concordance = concordance_index(predicted, truth);
    } catch (const Error& e) {
        report.errors["concordance"] = e.what();
    }

    const auto pairs = select_pairs(predicted.size(), resolved);
    report.n_pairs = pairs.size();
    double relation = 0.0, absolute = 0.0, confidence = 0.0;
    for (const auto& [i, j] : pairs) {
        relation += pair_relation(predicted[i], predicted[j], truth[i], truth[j]);
        absolute += pair_absolute(predicted[i], predicted[j], truth[i], truth[j]);
        confidence += pair_confidence(predicted[i], predicted[j], truth[i], truth[j]);
    }
    const double count = static_cast<double>(pairs.size());
    report.pair_relation = relation / count;
    report.pair_absolute = absolute / count;
    report.pair_confidence = confidence / count;
    return report;
}

nlohmann::json MetricsReport::to_json() const {
    auto optional_number = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json j = {
        {"schema_version", kMetricsSchemaVersion},
        {"n_records", n_records},
        {"n_usable", n_usable},
        {"n_excluded", n_excluded},
        {"pair_policy", pair_policy},
        {"n_pairs", n_pairs},
        {"mse", mse},
        {"spearman", optional_number(spearman)},
        {"pair_relation", pair_relation},
        {"pair_absolute", pair_absolute},
        {"pair_confidence", pair_confidence},
        {"concordance", optional_number(concordance)},
        {"errors", errors},
    };
    return j;
}

std::string MetricsReport::to_table() const {
    std::string out;
    auto row = [&](std::string_view name, const std::string& value) {
        out += fmt::format("{:<18} {:>24}\n", name, value);
    };
    auto number = [](double v) { return fmt::format("{:.6f}", v); };
    auto optional_number = [&](const std::optional<double>& v) {
        return v ? number(*v) : std::string("n/a");
    };
    row("metric", "value");
    row("records", std::to_string(n_records));
    row("excluded", std::to_string(n_excluded));
    row("pair_policy", pair_policy);
    row("pairs", std::to_string(n_pairs));
    row("mse", number(mse));
    row("spearman", optional_number(spearman));
    row("pair_relation", number(pair_relation));
    row("pair_absolute", number(pair_absolute));
    row("pair_confidence", number(pair_confidence));
    row("concordance", optional_number(concordance));
    for (const auto& [metric, reason] : errors) out += fmt::format("# {}: {}\n", metric, reason);
    return out;
}

} // namespace reviewkit
