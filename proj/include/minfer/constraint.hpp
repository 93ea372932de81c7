#ifndef MINFER_CONSTRAINT_HPP
#define MINFER_CONSTRAINT_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "minfer/matrix.hpp"
#include "minfer/rulebase.hpp"

namespace minfer {

/// Pairwise lhs-attribute overlap counts for the firing rules, plus the
/// all-zero normalization row (always last).
struct OverlapCounts {
    std::size_t r = 1; // firing rules + normalization row
    std::vector<std::vector<int>> m;

    int at(std::size_t i, std::size_t j) const { return m[i][j]; }
};

inline OverlapCounts overlap_counts(const std::vector<Rule>& firing) {
    const std::size_t nr = firing.size();
    OverlapCounts counts;
    counts.r = nr + 1;
    counts.m.assign(counts.r, std::vector<int>(counts.r, 0));
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = i; j < nr; ++j) {
            int common = 0;
            for (const Literal& a : firing[i].lhs) {
                for (const Literal& b : firing[j].lhs) {
                    if (a.attribute != b.attribute) continue;
                    // Genuinely firing rules agree on shared attributes.
                    if (a.polarity != b.polarity)
                        throw std::invalid_argument(
                            "rules '" + firing[i].id + "' and '" + firing[j].id +
                            "' disagree on a shared attribute; not a firing set");
                    ++common;
                }
            }
            counts.m[i][j] = common;
            counts.m[j][i] = common;
        }
    }
    return counts;
}

/// Gram matrix of the constraint rows: (C)_{i,j} = 2^(n - m_ii - m_jj + m_ij),
/// exact powers of two.
inline Matrix build_C(const OverlapCounts& counts, std::size_t n) {
    if (n > 1000) throw std::invalid_argument("build_C: n too large for exact powers of two");
    for (std::size_t i = 0; i + 1 < counts.r; ++i)
        if (static_cast<std::size_t>(counts.m[i][i]) > n)
            throw std::invalid_argument("build_C: rule lhs larger than attribute space");
    Matrix c(counts.r, counts.r);
    for (std::size_t i = 0; i < counts.r; ++i)
        for (std::size_t j = 0; j < counts.r; ++j) {
            const int exponent = static_cast<int>(n) - counts.m[i][i] - counts.m[j][j] + counts.m[i][j];
            c(i, j) = std::ldexp(1.0, exponent);
        }
    return c;
}

/// Right-hand side for one class: the firing rules' marginals, then 1 for the
/// normalization row.
inline Vector build_b(const std::vector<Rule>& firing, const std::string& cls) {
    Vector b(firing.size() + 1);
    for (std::size_t i = 0; i < firing.size(); ++i) b[i] = firing[i].marginal_for(cls);
    b.back() = 1.0;
    return b;
}

/// Image of the full-evidence selector: the last column of A, which is all
/// ones (every firing rule covers the full-evidence cell).
inline Vector build_w(std::size_t r) {
    return Vector(r, 1.0);
}

/// Assembled r x r system for one evidence: C, one b per class, w. Immutable
/// once built. When `normalize` is set, C is divided by 2^n and the scale is
/// tracked so likelihoods come out unchanged (useful for large n).
struct ConstraintSystem {
    std::size_t n = 0;
    std::size_t r = 1;
    Matrix C;
    std::map<std::string, Vector> b;
    Vector w;
    double likelihood_scale = 1.0; // multiply w^T lambda by this
};

inline ConstraintSystem build_system(const std::vector<Rule>& firing,
                                     const std::vector<std::string>& classes,
                                     std::size_t n, bool normalize = false) {
    ConstraintSystem sys;
    sys.n = n;
    sys.r = firing.size() + 1;
    sys.C = build_C(overlap_counts(firing), n);
    for (const auto& cls : classes) sys.b[cls] = build_b(firing, cls);
    sys.w = build_w(sys.r);
    if (normalize) {
        const double inv_scale = std::ldexp(1.0, -static_cast<int>(n));
        for (std::size_t i = 0; i < sys.r; ++i)
            for (std::size_t j = 0; j < sys.r; ++j) sys.C(i, j) *= inv_scale;
        sys.likelihood_scale = inv_scale;
    }
    return sys;
}

/// Bitmask of a firing rule's lhs attributes under the explicit indexing
/// convention: bit (n-1-k) set iff attribute k is constrained. An index
/// belongs to the rule's support iff all its mask bits are set.
inline std::uint64_t rule_mask(const Rule& rule, std::size_t n) {
    std::uint64_t mask = 0;
    for (const Literal& lit : rule.lhs) mask |= std::uint64_t{1} << (n - 1 - lit.attribute);
    return mask;
}

} // namespace minfer

#endif
