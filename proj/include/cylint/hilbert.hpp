#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "cylint/detail/splitmix.hpp"
#include "cylint/errors.hpp"

namespace cylint {

/// Which truncated Hilbert space a coefficient vector lives in.
/// U is the noise space, V the state space.
enum class Space { U, V };

inline const char* space_name(Space s) noexcept {
    return s == Space::U ? "U" : "V";
}

/// Coefficient vector of an element of the truncated space against its
/// orthonormal basis. Immutable after construction; all entries finite.
class HVector {
public:
    HVector(Eigen::VectorXd coords, Space space)
        : coords_(std::move(coords)), space_(space) {
        if (!coords_.allFinite())
            throw invalid_input("HVector: non-finite coefficient");
    }

    static HVector zero(Eigen::Index dim, Space space) {
        return HVector(Eigen::VectorXd::Zero(dim), space);
    }

    /// k-th basis vector (0-based index).
    static HVector basis(Eigen::Index dim, Eigen::Index k, Space space) {
        if (k < 0 || k >= dim)
            throw invalid_input("HVector::basis: index out of range");
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
        c[k] = 1.0;
        return HVector(std::move(c), space);
    }

    const Eigen::VectorXd& coords() const noexcept { return coords_; }
    Space space() const noexcept { return space_; }
    Eigen::Index dim() const noexcept { return coords_.size(); }
    double operator[](Eigen::Index k) const { return coords_[k]; }

    double norm() const { return coords_.norm(); }

private:
    Eigen::VectorXd coords_;
    Space space_;
};

inline void require_same_space(const HVector& a, const HVector& b, const char* op) {
    if (a.space() != b.space() || a.dim() != b.dim())
        throw shape_error(std::string(op) + ": operands live in different spaces");
}

inline double inner(const HVector& a, const HVector& b) {
    require_same_space(a, b, "inner");
    return a.coords().dot(b.coords());
}

inline HVector operator+(const HVector& a, const HVector& b) {
    require_same_space(a, b, "operator+");
    return HVector(a.coords() + b.coords(), a.space());
}

inline HVector operator-(const HVector& a, const HVector& b) {
    require_same_space(a, b, "operator-");
    return HVector(a.coords() - b.coords(), a.space());
}

inline HVector operator*(double c, const HVector& v) {
    return HVector(c * v.coords(), v.space());
}

/// Dense coefficient matrix of a Hilbert-Schmidt operator between the
/// truncated spaces. Row j, column k holds the coefficient of f_j in the
/// image of e_k. Tracks domain and codomain so adjoints stay well-typed.
class HSOperator {
public:
    HSOperator(Eigen::MatrixXd entries, Space domain = Space::U, Space codomain = Space::V)
        : entries_(std::move(entries)), domain_(domain), codomain_(codomain) {
        if (!entries_.allFinite())
            throw invalid_input("HSOperator: non-finite entry");
    }

    static HSOperator zero(Eigen::Index rows, Eigen::Index cols,
                           Space domain = Space::U, Space codomain = Space::V) {
        return HSOperator(Eigen::MatrixXd::Zero(rows, cols), domain, codomain);
    }

    static HSOperator identity(Eigen::Index n,
                               Space domain = Space::U, Space codomain = Space::V) {
        return HSOperator(Eigen::MatrixXd::Identity(n, n), domain, codomain);
    }

    /// Rank-one operator v ⊗ u, sending e_col to value * f_row.
    static HSOperator rank_one(Eigen::Index rows, Eigen::Index cols,
                               Eigen::Index row, Eigen::Index col, double value,
                               Space domain = Space::U, Space codomain = Space::V) {
        if (row < 0 || row >= rows || col < 0 || col >= cols)
            throw invalid_input("HSOperator::rank_one: index out of range");
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
        m(row, col) = value;
        return HSOperator(std::move(m), domain, codomain);
    }

    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    Space domain() const noexcept { return domain_; }
    Space codomain() const noexcept { return codomain_; }
    Eigen::Index domain_dim() const noexcept { return entries_.cols(); }
    Eigen::Index codomain_dim() const noexcept { return entries_.rows(); }

private:
    Eigen::MatrixXd entries_;
    Space domain_;
    Space codomain_;
};

/// Hilbert-Schmidt norm: square root of the sum of squared entries,
/// equivalently of the squared image norms of the domain basis.
inline double hs_norm(const HSOperator& phi) {
    return phi.entries().norm();
}

inline double hs_norm_sq(const HSOperator& phi) {
    return phi.entries().squaredNorm();
}

/// Apply the operator to a domain vector.
inline HVector apply(const HSOperator& phi, const HVector& u) {
    if (u.space() != phi.domain() || u.dim() != phi.domain_dim())
        throw shape_error("apply: vector does not match operator domain");
    return HVector(phi.entries() * u.coords(), phi.codomain());
}

/// Adjoint: transposed entries, domain and codomain swapped.
inline HSOperator adjoint(const HSOperator& phi) {
    return HSOperator(phi.entries().transpose(), phi.codomain(), phi.domain());
}

/// Scalar product on the Hilbert-Schmidt space; hs_inner(φ,φ) = hs_norm(φ)².
inline double hs_inner(const HSOperator& phi, const HSOperator& psi) {
    if (phi.domain_dim() != psi.domain_dim() || phi.codomain_dim() != psi.codomain_dim())
        throw shape_error("hs_inner: operator shapes differ");
    return phi.entries().cwiseProduct(psi.entries()).sum();
}

inline HSOperator operator+(const HSOperator& a, const HSOperator& b) {
    if (a.domain_dim() != b.domain_dim() || a.codomain_dim() != b.codomain_dim())
        throw shape_error("HSOperator operator+: shapes differ");
    return HSOperator(a.entries() + b.entries(), a.domain(), a.codomain());
}

inline HSOperator operator-(const HSOperator& a, const HSOperator& b) {
    if (a.domain_dim() != b.domain_dim() || a.codomain_dim() != b.codomain_dim())
        throw shape_error("HSOperator operator-: shapes differ");
    return HSOperator(a.entries() - b.entries(), a.domain(), a.codomain());
}

inline HSOperator operator*(double c, const HSOperator& phi) {
    return HSOperator(c * phi.entries(), phi.domain(), phi.codomain());
}

/// Composition realized as a matrix product.
inline HSOperator compose(const HSOperator& phi, const HSOperator& psi) {
    if (psi.codomain() != phi.domain() || psi.codomain_dim() != phi.domain_dim())
        throw shape_error("compose: codomain of inner operator does not match");
    return HSOperator(phi.entries() * psi.entries(), psi.domain(), phi.codomain());
}

namespace detail {

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration, to a relative tolerance on successive Rayleigh quotients.
/// The start vector is a fixed pseudorandom direction so results are
/// reproducible. Throws numeric_error when the iteration cap is reached.
inline double power_iteration_sym(const Eigen::MatrixXd& a,
                                  double rel_tol = 1e-10,
                                  int max_iter = 10000) {
    const Eigen::Index n = a.rows();
    if (n == 0 || a.norm() == 0.0) return 0.0;

    Eigen::VectorXd v(n);
    std::uint64_t s = 0x5bd1e995u;
    for (Eigen::Index i = 0; i < n; ++i) {
        // generic dense start direction; exact orthogonality to the leading
        // eigenspace would need measure-zero alignment with these digits
        v[i] = 0.25 + 0.5 * (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
    }
    v.normalize();

    double lambda_prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = a * v;
        const double wn = w.norm();
        if (wn == 0.0) {
            // start vector fell in the kernel; nudge deterministically
            v[static_cast<Eigen::Index>(it % n)] += 1.0;
            v.normalize();
            continue;
        }
        v = w / wn;
        const double lambda = v.dot(a * v);
        if (std::abs(lambda - lambda_prev) <= rel_tol * std::max(std::abs(lambda), 1e-300))
            return lambda;
        lambda_prev = lambda;
    }
    throw numeric_error("power iteration did not converge");
}

} // namespace detail

/// Operator norm (largest singular value) via power iteration on φ*φ.
inline double operator_norm(const HSOperator& phi) {
    const Eigen::MatrixXd gram = phi.entries().transpose() * phi.entries();
    return std::sqrt(detail::power_iteration_sym(gram));
}

} // namespace cylint
