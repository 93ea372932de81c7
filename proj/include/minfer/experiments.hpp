#ifndef MINFER_EXPERIMENTS_HPP
#define MINFER_EXPERIMENTS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "minfer/inference.hpp"
#include "minfer/rulebase.hpp"

namespace minfer::experiments {

using Rng = std::mt19937_64;

/// Uniform double in [0,1) from the raw 64-bit stream; avoids
/// std::uniform_real_distribution so seeded runs are byte-identical across
/// standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Random distribution of length l: uniform [0,1) elements divided by their sum.
inline std::vector<double> random_distribution(std::size_t l, Rng& rng) {
    if (l < 2) throw std::invalid_argument("random_distribution: l must be >= 2");
    std::vector<double> z(l);
    double sum = 0.0;
    for (double& x : z) {
        x = uniform01(rng);
        sum += x;
    }
    for (double& x : z) x /= sum;
    return z;
}

struct AgreementRecord {
    std::size_t length = 0;
    std::size_t trials = 0;
    double agreement = 0.0;
};

struct AgreementReport {
    std::vector<AgreementRecord> per_length;
    double pooled = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

// One pass over a fresh random distribution: sum of raw uniforms, their
// squares, and u*ln(u). With z = u/s this gives
//   sum z ln z = (sum u ln u)/s - ln s   and   ||z||^2 = (sum u^2)/s^2,
// enough to order two distributions by I(.) and by norm.
struct DistStats {
    double zlogz = 0.0;
    double norm_sq = 0.0;
};

// Sign-agreement with the tie rule: |delta| < 1e-14 counts as a tie, and a
// tie on one side agrees only with a tie on the other.
inline bool sign_agreement(double di, double dn) {
    const bool tie_i = std::abs(di) < 1e-14;
    const bool tie_n = std::abs(dn) < 1e-14;
    if (tie_i || tie_n) return tie_i && tie_n;
    return (di > 0.0) == (dn > 0.0);
}

inline DistStats draw_stats(std::size_t l, Rng& rng) {
    double s = 0.0, s2 = 0.0, slog = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
        const double u = uniform01(rng);
        s += u;
        s2 += u * u;
        if (u > 0.0) slog += u * std::log(u);
    }
    return {slog / s - std::log(s), s2 / (s * s)};
}

} // namespace detail

/// The sign-agreement simulation: for each length, draw pairs of random
/// distributions and count how often I(.) and the Euclidean norm order them
/// the same way. Ties (|delta| < 1e-14) agree only when both sides tie.
inline AgreementReport agreement_study(const std::vector<std::size_t>& lengths,
                                       std::size_t trials_per_length,
                                       std::uint64_t seed) {
    if (trials_per_length < 1) throw std::invalid_argument("agreement_study: trials must be >= 1");
    AgreementReport report;
    report.seed = seed;
    double pooled_hits = 0.0;
    for (std::size_t li = 0; li < lengths.size(); ++li) {
        const std::size_t l = lengths[li];
        Rng rng(seed + 0x9e3779b97f4a7c15ULL * (li + 1)); // per-length stream
        std::size_t hits = 0;
        for (std::size_t t = 0; t < trials_per_length; ++t) {
            const auto a = detail::draw_stats(l, rng);
            const auto b = detail::draw_stats(l, rng);
            // I(z) - I(y) up to a shared constant; norm^2 difference has the
            // same sign as ||z|| - ||y||.
            if (detail::sign_agreement(a.zlogz - b.zlogz, a.norm_sq - b.norm_sq)) ++hits;
        }
        report.per_length.push_back({l, trials_per_length,
                                     static_cast<double>(hits) / trials_per_length});
        pooled_hits += static_cast<double>(hits) / trials_per_length;
    }
    report.pooled = pooled_hits / lengths.size();
    return report;
}

// ----------------------------------------------------------------------------
// Noisy seven-segment LED digit benchmark.

/// Canonical segment patterns, segments a-g as attributes F1-F7.
inline const std::array<std::array<bool, 7>, 10>& led_patterns() {
    static const std::array<std::array<bool, 7>, 10> table = [] {
        const char* rows[10] = {"1111110", "0110000", "1101101", "1111001", "0110011",
                                "1011011", "1011111", "1110000", "1111111", "1111011"};
        std::array<std::array<bool, 7>, 10> t{};
        for (int d = 0; d < 10; ++d)
            for (int s = 0; s < 7; ++s) t[d][s] = rows[d][s] == '1';
        return t;
    }();
    return table;
}

/// Every conjunction of 5 of the 7 segment attributes, for every value
/// assignment: C(7,5) * 2^5 = 672 rules. Marginals are the analytic channel
/// probabilities prod(1-p or p); priors uniform over digits 0-9.
inline RuleBase led_rulebase(double noise_p) {
    if (!(noise_p >= 0.0 && noise_p <= 0.5))
        throw std::invalid_argument("led_rulebase: noise_p must lie in [0, 0.5]");
    RuleBase rb;
    for (int i = 1; i <= 7; ++i) rb.attributes.names.push_back("F" + std::to_string(i));
    for (int d = 0; d < 10; ++d) {
        rb.classes.classes.push_back(std::to_string(d));
        rb.classes.priors[std::to_string(d)] = 0.1;
    }
    const auto& pat = led_patterns();
    std::array<std::size_t, 5> subset{};
    // lexicographic 5-subsets of {0..6}
    for (subset[0] = 0; subset[0] < 7; ++subset[0])
        for (subset[1] = subset[0] + 1; subset[1] < 7; ++subset[1])
            for (subset[2] = subset[1] + 1; subset[2] < 7; ++subset[2])
                for (subset[3] = subset[2] + 1; subset[3] < 7; ++subset[3])
                    for (subset[4] = subset[3] + 1; subset[4] < 7; ++subset[4])
                        for (unsigned assign = 0; assign < 32; ++assign) {
                            Rule rule;
                            rule.id = "s";
                            for (std::size_t a : subset) rule.id += std::to_string(a + 1);
                            rule.id += "_v";
                            for (int t = 0; t < 5; ++t) {
                                const bool val = (assign >> (4 - t)) & 1;
                                rule.id += val ? '1' : '0';
                                rule.lhs.push_back({subset[static_cast<std::size_t>(t)], val});
                            }
                            for (int d = 0; d < 10; ++d) {
                                double m = 1.0;
                                for (const Literal& lit : rule.lhs)
                                    m *= (lit.polarity == pat[d][lit.attribute]) ? 1.0 - noise_p
                                                                                 : noise_p;
                                rule.marginals[std::to_string(d)] = m;
                            }
                            rb.rules.push_back(std::move(rule));
                        }
    return rb;
}

/// Pass a clean digit pattern through the bit-flip channel.
inline Evidence led_trial(int digit, double noise_p, Rng& rng) {
    const auto& pat = led_patterns();
    Evidence ev;
    ev.values.resize(7);
    for (int s = 0; s < 7; ++s) {
        const bool flip = uniform01(rng) < noise_p;
        ev.values[s] = pat[digit][s] ^ flip;
    }
    return ev;
}

/// Variant of led_rulebase with marginals estimated from `samples` noisy
/// patterns per digit instead of the analytic channel probabilities.
inline RuleBase led_rulebase_estimated(double noise_p, std::size_t samples, Rng& rng) {
    RuleBase rb = led_rulebase(noise_p);
    std::vector<std::vector<Evidence>> draws(10);
    for (int d = 0; d < 10; ++d)
        for (std::size_t s = 0; s < samples; ++s) draws[d].push_back(led_trial(d, noise_p, rng));
    for (Rule& rule : rb.rules)
        for (int d = 0; d < 10; ++d) {
            std::size_t hits = 0;
            for (const Evidence& ev : draws[d])
                if (satisfies(rule, ev)) ++hits;
            rule.marginals[std::to_string(d)] = static_cast<double>(hits) / samples;
        }
    return rb;
}

/// Exact optimum accuracy for the LED channel: enumerate all 128 noisy
/// patterns; the optimal classifier picks argmax_d p(v|d).
inline double led_bayes_optimal(double noise_p) {
    if (!(noise_p >= 0.0 && noise_p <= 0.5))
        throw std::invalid_argument("led_bayes_optimal: noise_p must lie in [0, 0.5]");
    const auto& pat = led_patterns();
    double total = 0.0;
    for (unsigned v = 0; v < 128; ++v) {
        double best = 0.0;
        for (int d = 0; d < 10; ++d) {
            double p = 1.0;
            for (int s = 0; s < 7; ++s) {
                const bool bit = (v >> (6 - s)) & 1;
                p *= (bit == pat[d][s]) ? 1.0 - noise_p : noise_p;
            }
            best = std::max(best, p);
        }
        total += best * 0.1;
    }
    return total;
}

struct LedBenchmarkReport {
    double noise_p = 0.0;
    std::size_t trials = 0;
    double accuracy = 0.0;
    std::array<std::array<std::size_t, 10>, 10> confusion{}; // [true][predicted]
    double bayes_optimal = 0.0;
    std::uint64_t seed = 0;
};

inline LedBenchmarkReport led_benchmark(std::size_t trials, double noise_p,
                                        std::uint64_t seed,
                                        LinalgTolerances tol = {},
                                        std::size_t estimate_from_samples = 0) {
    if (trials < 1) throw std::invalid_argument("led_benchmark: trials must be >= 1");
    LedBenchmarkReport report;
    report.noise_p = noise_p;
    report.trials = trials;
    report.seed = seed;
    report.bayes_optimal = led_bayes_optimal(noise_p);

    Rng rng(seed);
    const RuleBase rb = estimate_from_samples > 0
                            ? led_rulebase_estimated(noise_p, estimate_from_samples, rng)
                            : led_rulebase(noise_p);
    std::size_t correct = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const int digit = static_cast<int>(rng() % 10);
        const Evidence ev = led_trial(digit, noise_p, rng);
        Engine engine(rb, ev, tol);
        int predicted;
        try {
            predicted = std::stoi(engine.classify().argmax);
        } catch (const std::runtime_error&) {
            // every likelihood came out nonpositive; take the raw maximum
            // (uniform priors, so the likelihood order is the posterior order)
            predicted = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int d = 0; d < 10; ++d) {
                const double like = engine.likelihood(std::to_string(d));
                if (like > best) {
                    best = like;
                    predicted = d;
                }
            }
        }
        ++report.confusion[digit][predicted];
        if (predicted == digit) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / trials;
    return report;
}

inline nlohmann::json to_json(const AgreementReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["pooled_agreement"] = report.pooled;
    j["per_length"] = nlohmann::json::array();
    for (const auto& rec : report.per_length)
        j["per_length"].push_back({{"length", rec.length},
                                   {"trials", rec.trials},
                                   {"agreement", rec.agreement}});
    return j;
}

inline nlohmann::json to_json(const LedBenchmarkReport& report) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["noise_p"] = report.noise_p;
    j["trials"] = report.trials;
    j["accuracy"] = report.accuracy;
    j["bayes_optimal"] = report.bayes_optimal;
    j["confusion"] = report.confusion;
    return j;
}

} // namespace minfer::experiments

#endif
