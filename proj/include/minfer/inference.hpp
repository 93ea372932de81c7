#ifndef MINFER_INFERENCE_HPP
#define MINFER_INFERENCE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "minfer/constraint.hpp"
#include "minfer/linalg.hpp"
#include "minfer/rulebase.hpp"

namespace minfer {

enum class Nonnegativity { verified, violated, unchecked };

inline const char* to_string(Nonnegativity s) {
    switch (s) {
        case Nonnegativity::verified: return "verified";
        case Nonnegativity::violated: return "violated";
        default: return "unchecked";
    }
}

struct Diagnostics {
    double condition_estimate = 0.0;
    Nonnegativity nonnegativity = Nonnegativity::unchecked;
    int clamp_iterations = 0;
    double consistency_residual = 0.0; // max over classes of ||C lambda - b||
    bool pseudo_inverse_used = false;
    bool likelihood_floored = false; // some likelihood was negative and floored in classify
    bool rebuild_fallback = false;   // a swap could not keep the maintained inverse
};

struct InferenceResult {
    std::map<std::string, double> likelihoods;
    std::map<std::string, double> posterior;
    std::string argmax;
    Diagnostics diagnostics;
};

struct NonnegativityViolation {
    std::uint64_t cell = 0; // explicit-distribution index
    double value = 0.0;
    std::string description; // e.g. "~F1 F2 F3"
};

struct NonnegativityReport {
    Nonnegativity status = Nonnegativity::unchecked;
    double min_value = 0.0;
    std::vector<NonnegativityViolation> violations;
};

struct ClampOutcome {
    double likelihood = 0.0;
    int iterations = 0;
    bool converged = true;
    double min_entry = 0.0;
};

/// Closed-form posterior from the odds ratio:
/// p(x|e) = L_x p(x) / (L_x p(x) + L_xbar (1 - p(x))).
inline double posterior_odds(double p_x, double like_x, double like_notx) {
    if (!(p_x > 0.0 && p_x < 1.0)) throw std::invalid_argument("prior must lie in (0,1)");
    if (like_x < 0.0 || like_notx < 0.0)
        throw std::invalid_argument("negative likelihood; resolve negativity first");
    const double num = like_x * p_x;
    const double den = num + like_notx * (1.0 - p_x);
    if (den == 0.0) throw std::runtime_error("both likelihoods zero; posterior undefined");
    return num / den;
}

/// Inference engine for one evidence: owns the constraint system and the
/// maintained inverse, computes p(e|class) = w^T C^-1 b per class, supports
/// O(r^2) rule exchange, negativity verification and clamp-and-resolve.
class Engine {
public:
    Engine(const RuleBase& rb, const Evidence& ev, LinalgTolerances tol = {},
           std::size_t n_limit = 20, bool normalize = false)
        : space_(rb.attributes), classes_(rb.classes), evidence_(ev), tol_(tol),
          n_limit_(n_limit) {
        if (ev.values.size() != space_.size())
            throw std::invalid_argument("evidence length does not match attribute space");
        for (std::size_t idx : firing_rules(rb.rules, ev)) firing_.push_back(rb.rules[idx]);
        sys_ = build_system(firing_, classes_.classes, space_.size(), normalize);
        try {
            inv_.emplace(sys_.C, tol_);
        } catch (const SingularMatrixError&) {
            inv_.reset(); // pseudo-inverse path
        }
    }

    const ConstraintSystem& system() const { return sys_; }
    const std::vector<Rule>& firing() const { return firing_; }
    const Evidence& evidence() const { return evidence_; }
    bool singular() const { return !inv_.has_value(); }
    bool rebuild_fallback() const { return rebuild_fallback_; }

    /// p(e|class) = w^T lambda. May fall outside [0,1] when constraints are
    /// inconsistent or the minimum-norm solution has negative cells; reported
    /// as-is (classify floors, this does not).
    double likelihood(const std::string& cls) const {
        return dot(sys_.w, solve_for(cls)) * sys_.likelihood_scale;
    }

    InferenceResult classify() const {
        if (classes_.classes.empty()) throw std::runtime_error("no classes");
        InferenceResult res;
        res.diagnostics.pseudo_inverse_used = singular();
        res.diagnostics.rebuild_fallback = rebuild_fallback_;
        res.diagnostics.condition_estimate =
            inv_ ? inv_->condition_estimate() : std::numeric_limits<double>::infinity();

        double total = 0.0, best = -1.0;
        for (const auto& cls : classes_.classes) {
            const Vector lambda = solve_for(cls);
            double like = dot(sys_.w, lambda) * sys_.likelihood_scale;
            res.diagnostics.consistency_residual =
                std::max(res.diagnostics.consistency_residual, residual(lambda, cls));
            res.likelihoods[cls] = like;
            if (like < 0.0) {
                like = 0.0;
                res.diagnostics.likelihood_floored = true;
            }
            const double score = like * classes_.prior_for(cls);
            res.posterior[cls] = score;
            total += score;
            if (score > best) {
                best = score;
                res.argmax = cls;
            }
        }
        if (total <= 0.0) throw std::runtime_error("all posterior scores zero");
        for (auto& [cls, p] : res.posterior) p /= total;
        return res;
    }

    /// Materializes z = A^T lambda cell by cell (n <= n_limit) and reports
    /// entries below -1e-12.
    NonnegativityReport verify_nonnegativity(const std::string& cls) const {
        NonnegativityReport rep;
        const std::size_t n = space_.size();
        if (n > n_limit_) return rep; // unchecked
        const Vector lambda = physical_lambda(solve_for(cls));
        const std::vector<std::uint64_t> masks = firing_masks();
        const std::uint64_t cells = std::uint64_t{1} << n;

        rep.min_value = std::numeric_limits<double>::infinity();
        for (std::uint64_t idx = 0; idx < cells; ++idx) {
            const double z = cell_value(idx, lambda, masks);
            if (z < rep.min_value) rep.min_value = z;
            if (z < -1e-12) rep.violations.push_back({idx, z, describe_cell(idx)});
        }
        rep.status = rep.violations.empty() ? Nonnegativity::verified : Nonnegativity::violated;
        return rep;
    }

    /// The paper's repair for negative cells: pin the most negative cell at
    /// zero via an appended unit constraint, re-solve, repeat. Requires the
    /// explicit representation (n <= n_limit).
    ClampOutcome clamp_resolve(const std::string& cls) const {
        const std::size_t n = space_.size();
        if (n > n_limit_) throw std::runtime_error("clamp_resolve requires n <= n_limit");
        const std::uint64_t cells = std::uint64_t{1} << n;
        const std::vector<std::uint64_t> masks = firing_masks();
        const std::size_t r = sys_.r;

        // Raw (unscaled) Gram matrix; the augmented system is built on it.
        Matrix base_c = build_C(overlap_counts(firing_), n);
        std::vector<std::uint64_t> clamped;
        ClampOutcome out;
        for (;;) {
            const std::size_t m = r + clamped.size();
            Matrix ca(m, m);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) ca(i, j) = base_c(i, j);
            for (std::size_t t = 0; t < clamped.size(); ++t) {
                for (std::size_t i = 0; i < r; ++i) {
                    const double aik = row_covers(i, clamped[t], masks) ? 1.0 : 0.0;
                    ca(i, r + t) = aik;
                    ca(r + t, i) = aik;
                }
                for (std::size_t u = 0; u < clamped.size(); ++u)
                    ca(r + t, r + u) = (t == u) ? 1.0 : 0.0;
            }
            Vector ba = build_b(firing_, cls);
            ba.resize(m, 0.0);

            const Vector lam = pseudo_solve(ca, ba, tol_);

            std::uint64_t worst = 0;
            double min_val = std::numeric_limits<double>::infinity();
            for (std::uint64_t idx = 0; idx < cells; ++idx) {
                double z = 0.0;
                for (std::size_t j = 0; j < r; ++j)
                    if (row_covers(j, idx, masks)) z += lam[j];
                for (std::size_t t = 0; t < clamped.size(); ++t)
                    if (clamped[t] == idx) z += lam[r + t];
                if (z < min_val) { min_val = z; worst = idx; }
                if (idx == cells - 1) out.likelihood = z;
            }
            out.min_entry = min_val;
            if (min_val >= -1e-12) return out;
            if (out.iterations >= static_cast<int>(cells)) {
                out.converged = false;
                return out;
            }
            clamped.push_back(worst);
            ++out.iterations;
        }
    }

    /// Exchange firing rule `index` for `new_rule` (which must fire on the
    /// current evidence) and return fresh results. O(r^2) via the maintained
    /// inverse when possible; flags a rebuild fallback otherwise.
    InferenceResult swap_rule(std::size_t index, const Rule& new_rule) {
        if (index >= firing_.size())
            throw std::invalid_argument("swap index addresses the normalization row or is out of range");
        if (!satisfies(new_rule, evidence_))
            throw std::invalid_argument("replacement rule does not fire on the current evidence");
        for (const auto& cls : classes_.classes) new_rule.marginal_for(cls); // validate up front

        firing_[index] = new_rule;

        // Recompute the exchanged Gram row from overlap counts: O(r * lhs).
        const std::size_t n = space_.size();
        const std::size_t r = sys_.r;
        Vector new_row(r);
        const int m_new = static_cast<int>(new_rule.lhs.size());
        for (std::size_t j = 0; j < firing_.size(); ++j) {
            int common = 0;
            for (const Literal& a : new_rule.lhs)
                for (const Literal& b : firing_[j].lhs)
                    if (a.attribute == b.attribute) ++common;
            const int m_jj = static_cast<int>(firing_[j].lhs.size());
            new_row[j] = std::ldexp(1.0, static_cast<int>(n) - m_new - m_jj + common) *
                         sys_.likelihood_scale;
        }
        new_row[r - 1] = std::ldexp(1.0, static_cast<int>(n) - m_new) * sys_.likelihood_scale;

        for (std::size_t j = 0; j < r; ++j) {
            sys_.C(index, j) = new_row[j];
            sys_.C(j, index) = new_row[j];
        }
        for (const auto& cls : classes_.classes)
            sys_.b[cls][index] = new_rule.marginal_for(cls);

        rebuild_fallback_ = false;
        if (inv_) {
            try {
                inv_->swap_row_col(index, new_row);
            } catch (const SingularMatrixError&) {
                inv_.reset();
                rebuild_fallback_ = true;
            }
        } else {
            // Previous system was singular; the exchange may have restored rank.
            try {
                inv_.emplace(sys_.C, tol_);
            } catch (const SingularMatrixError&) {
                rebuild_fallback_ = true;
            }
        }
        return classify();
    }

private:
    Vector solve_for(const std::string& cls) const {
        auto it = sys_.b.find(cls);
        if (it == sys_.b.end()) throw std::runtime_error("unknown class: " + cls);
        if (inv_) return inv_->apply(it->second);
        return pseudo_solve(sys_.C, it->second, tol_);
    }

    // Undo the C-normalization scale so lambda matches the raw system
    // (z = A^T lambda needs raw units).
    Vector physical_lambda(Vector lambda) const {
        for (double& x : lambda) x *= sys_.likelihood_scale;
        return lambda;
    }

    double residual(const Vector& lambda, const std::string& cls) const {
        Vector clam = matvec(sys_.C, lambda);
        const Vector& b = sys_.b.at(cls);
        for (std::size_t i = 0; i < clam.size(); ++i) clam[i] -= b[i];
        return norm2(clam);
    }

    std::vector<std::uint64_t> firing_masks() const {
        std::vector<std::uint64_t> masks;
        for (const Rule& rule : firing_) masks.push_back(rule_mask(rule, space_.size()));
        return masks;
    }

    // Does constraint row i (rule or normalization) cover explicit cell idx?
    bool row_covers(std::size_t i, std::uint64_t idx,
                    const std::vector<std::uint64_t>& masks) const {
        if (i == masks.size()) return true; // normalization row
        return (idx & masks[i]) == masks[i];
    }

    double cell_value(std::uint64_t idx, const Vector& lambda,
                      const std::vector<std::uint64_t>& masks) const {
        double z = 0.0;
        for (std::size_t j = 0; j < lambda.size(); ++j)
            if (row_covers(j, idx, masks)) z += lambda[j];
        return z;
    }

    std::string describe_cell(std::uint64_t idx) const {
        const std::size_t n = space_.size();
        std::string out;
        for (std::size_t k = 0; k < n; ++k) {
            const bool at_evidence = (idx >> (n - 1 - k)) & 1;
            const bool value = at_evidence ? (bool)evidence_.values[k] : !evidence_.values[k];
            if (!out.empty()) out += ' ';
            out += (value ? "" : "~") + space_.names[k];
        }
        return out;
    }

    AttributeSpace space_;
    ClassModel classes_;
    Evidence evidence_;
    LinalgTolerances tol_;
    std::size_t n_limit_;
    std::vector<Rule> firing_;
    ConstraintSystem sys_;
    std::optional<MaintainedInverse> inv_;
    bool rebuild_fallback_ = false;
};

inline nlohmann::json to_json(const InferenceResult& res) {
    nlohmann::json j;
    j["likelihoods"] = res.likelihoods;
    j["posterior"] = res.posterior;
    j["argmax"] = res.argmax;
    j["diagnostics"] = {
        {"condition_estimate", res.diagnostics.condition_estimate},
        {"nonnegativity", to_string(res.diagnostics.nonnegativity)},
        {"clamp_iterations", res.diagnostics.clamp_iterations},
        {"consistency_residual", res.diagnostics.consistency_residual},
        {"pseudo_inverse_used", res.diagnostics.pseudo_inverse_used},
        {"likelihood_floored", res.diagnostics.likelihood_floored},
        {"rebuild_fallback", res.diagnostics.rebuild_fallback},
    };
    return j;
}

} // namespace minfer

#endif
