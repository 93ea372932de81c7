#ifndef MINFER_ORACLE_HPP
#define MINFER_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "minfer/constraint.hpp"
#include "minfer/rulebase.hpp"

// Exponential-space ground truth. Materializes the full constraint matrix and
// distribution vector; used to validate the polynomial fast path at small n.

namespace minfer::oracle {

inline constexpr std::size_t kMaxExplicitN = 20;

/// Length-2^n explicit distribution. Index bit (n-1-k) is 1 iff attribute k
/// carries its evidence value, so index 2^n - 1 is the full-evidence cell.
using ExplicitDistribution = std::vector<double>;

/// Explicit r x 2^n constraint matrix: one 0/1 row per firing rule, the
/// all-ones normalization row last.
inline Eigen::MatrixXd materialize_A(const std::vector<Rule>& firing, std::size_t n) {
    if (n > kMaxExplicitN) throw std::invalid_argument("materialize_A: n over explicit limit");
    const std::size_t cells = std::size_t{1} << n;
    const std::size_t r = firing.size() + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, cells);
    for (std::size_t i = 0; i < firing.size(); ++i) {
        const std::uint64_t mask = rule_mask(firing[i], n);
        for (std::size_t idx = 0; idx < cells; ++idx)
            if ((idx & mask) == mask) a(i, idx) = 1.0;
    }
    a.row(r - 1).setOnes();
    return a;
}

/// Minimum-norm least-squares solution of A z = b.
inline ExplicitDistribution min_norm_solution(const Eigen::MatrixXd& a, const Vector& b) {
    if (static_cast<std::size_t>(a.rows()) != b.size())
        throw std::invalid_argument("min_norm_solution: dimension mismatch");
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    Eigen::VectorXd z = cod.solve(bv);
    return ExplicitDistribution(z.data(), z.data() + z.size());
}

/// Discrimination information from the equiprobable distribution,
/// I(z) = n ln 2 + sum z_i ln z_i, with 0 ln 0 = 0. Zero iff equiprobable.
inline double information_measure(const ExplicitDistribution& z) {
    const std::size_t l = z.size();
    if (l == 0 || (l & (l - 1)) != 0)
        throw std::invalid_argument("information_measure: length must be a power of two");
    double s = 0.0;
    for (double zi : z) {
        if (zi < 0.0) throw std::invalid_argument("information_measure: negative entry");
        if (zi > 0.0) s += zi * std::log(zi);
    }
    return std::log(static_cast<double>(l)) + s;
}

/// Shannon entropy in nats; H(z) + I(z) = n ln 2.
inline double entropy(const ExplicitDistribution& z) {
    double h = 0.0;
    for (double zi : z) {
        if (zi < 0.0) throw std::invalid_argument("entropy: negative entry");
        if (zi > 0.0) h -= zi * std::log(zi);
    }
    return h;
}

/// Ground-truth p(e|x): the full-evidence cell of the minimum-norm solution.
inline double exact_inference(const Eigen::MatrixXd& a, const Vector& b) {
    return min_norm_solution(a, b).back();
}

struct ClampResult {
    ExplicitDistribution z;
    int iterations = 0;
    bool converged = true;
};

/// Reference clamp loop: pin the most negative cell to zero via a unit
/// constraint row, re-solve, repeat until nonnegative.
inline ClampResult clamp_resolve_explicit(Eigen::MatrixXd a, Vector b,
                                          double floor_tol = 1e-12) {
    const auto cells = a.cols();
    ClampResult out;
    for (;;) {
        out.z = min_norm_solution(a, b);
        Eigen::Index worst = 0;
        double min_val = out.z[0];
        for (Eigen::Index i = 1; i < cells; ++i)
            if (out.z[i] < min_val) { min_val = out.z[i]; worst = i; }
        if (min_val >= -floor_tol) return out;
        if (out.iterations >= static_cast<int>(cells)) {
            out.converged = false;
            return out;
        }
        a.conservativeResize(a.rows() + 1, Eigen::NoChange);
        a.row(a.rows() - 1).setZero();
        a(a.rows() - 1, worst) = 1.0;
        b.push_back(0.0);
        ++out.iterations;
    }
}

} // namespace minfer::oracle

#endif
