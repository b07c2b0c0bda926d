#pragma once

// Slow, obviously-correct reference computations the library is checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace reviewkit::oracle {

// exp(-2) and exp(-1/2) to 20 significant digits.
inline constexpr long double kExpMinus2 = 0.13533528323661269189L;
inline constexpr long double kExpMinusHalf = 0.60653065971263342360L;

inline double rating_reward(double s, double s_hat, double sigma) {
    const long double d = static_cast<long double>(s) - static_cast<long double>(s_hat);
    return static_cast<double>(std::exp(-(d * d) / (2.0L * sigma * sigma)));
}

inline double rule_reward(double rc, int missing_count, double alpha, double beta) {
    const double raw = alpha * rc + beta * -static_cast<double>(missing_count);
    if (raw < 0.0) return 0.0;
    if (raw > 1.0) return 1.0;
    return raw;
}

inline double final_reward(double rule, std::optional<int> judge, double gamma) {
    if (!judge) return rule;
    return gamma * rule + (1.0 - gamma) * static_cast<double>(*judge);
}

inline int sign(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

inline double relation(double s1, double s2, double t1, double t2) {
    return sign(s1 - s2) == sign(t1 - t2) ? 1.0 : 0.0;
}

inline double absolute(double s1, double s2, double t1, double t2) {
    const double deviation = std::fabs(s1 - t1) + std::fabs(s2 - t2);
    if (deviation == 0.0) return 1.0;
    if (deviation <= 2.0) return 0.6;
    return 0.0;
}

inline double confidence(double s1, double s2, double t1, double t2) {
    return std::fabs(s1 - s2) >= std::fabs(t1 - t2) ? 1.0 : 0.0;
}

/// Harrell's C over every pair with distinct truths; prediction ties count half.
inline std::optional<double> concordance(const std::vector<double>& pred, const std::vector<double>& truth) {
    double concordant = 0.0;
    long comparable = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (!(truth[i] < truth[j])) continue;
            ++comparable;
            if (pred[i] < pred[j]) concordant += 1.0;
            else if (pred[i] == pred[j]) concordant += 0.5;
        }
    }
    if (comparable == 0) return std::nullopt;
    return concordant / static_cast<double>(comparable);
}

/// Rank = 1 + (#smaller) + (#equal - 1) / 2.
inline std::vector<long double> average_ranks(const std::vector<double>& v) {
    std::vector<long double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        long smaller = 0, equal = 0;
        for (double x : v) {
            if (x < v[i]) ++smaller;
            else if (x == v[i]) ++equal;
        }
        ranks[i] = 1.0L + static_cast<long double>(smaller) + static_cast<long double>(equal - 1) / 2.0L;
    }
    return ranks;
}

inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const long double n = static_cast<long double>(a.size());
    long double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    long double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0 || sbb == 0) return std::nullopt;
    return static_cast<double>(sab / std::sqrt(saa * sbb));
}

} // namespace reviewkit::oracle
