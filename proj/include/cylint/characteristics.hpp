#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"

namespace cylint {

/// Jump size distribution of one coordinate's compound Poisson component.
/// two_point places mass 1/2 on ±a; gauss draws centered normals with
/// standard deviation sigma. Both are symmetric, so their characteristic
/// functions are real and their means vanish.
enum class JumpKind { two_point, gauss };

struct JumpComponent {
    JumpKind kind = JumpKind::two_point;
    double param = 0.0;     // a for two_point, sigma for gauss
    double intensity = 0.0; // expected jump count per unit time

    static JumpComponent two_point(double a, double intensity) {
        return JumpComponent{JumpKind::two_point, a, intensity};
    }
    static JumpComponent gauss(double sigma, double intensity) {
        return JumpComponent{JumpKind::gauss, sigma, intensity};
    }
    static JumpComponent none() { return JumpComponent{JumpKind::two_point, 0.0, 0.0}; }

    /// Characteristic function of a single jump size at frequency z.
    [[nodiscard]] double chi(double z) const {
        switch (kind) {
        case JumpKind::two_point: return std::cos(param * z);
        case JumpKind::gauss: return std::exp(-0.5 * param * param * z * z);
        }
        throw invalid_input("JumpComponent: unknown kind");
    }

    /// Second moment of a single jump size.
    [[nodiscard]] double second_moment() const noexcept { return param * param; }
};

/// Characteristics (drift, Gaussian covariance, per-coordinate jumps) of a
/// cylindrical Lévy process on the truncated noise space. Jumps act
/// coordinatewise and are fully compensated, so the drift vector carries
/// the entire first moment and the process is a martingale exactly when
/// the drift vanishes.
class CylindricalCharacteristics {
public:
    CylindricalCharacteristics(Eigen::VectorXd drift,
                               Eigen::MatrixXd q,
                               std::vector<JumpComponent> jumps)
        : drift_(std::move(drift)), q_(std::move(q)), jumps_(std::move(jumps)) {
        const Eigen::Index n = drift_.size();
        if (n == 0)
            throw invalid_input("characteristics: dimension must be positive");
        if (!drift_.allFinite())
            throw invalid_input("characteristics: non-finite drift entry");
        if (q_.rows() != n || q_.cols() != n)
            throw shape_error("characteristics: covariance shape does not match drift");
        if (!q_.allFinite())
            throw invalid_input("characteristics: non-finite covariance entry");
        if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * std::max(1.0, q_.cwiseAbs().maxCoeff()))
            throw invalid_input("characteristics: covariance must be symmetric");
        if (jumps_.size() != static_cast<std::size_t>(n))
            throw shape_error("characteristics: one jump component per coordinate required");
        for (const auto& j : jumps_) {
            if (!std::isfinite(j.param) || !std::isfinite(j.intensity))
                throw invalid_input("characteristics: non-finite jump parameter");
            if (j.intensity < 0.0)
                throw invalid_input("characteristics: jump intensity must be nonnegative");
        }

        // symmetric PSD square root; also the PSD test. Negative eigenvalues
        // beyond roundoff are rejected, tiny ones are clamped to zero so the
        // factor stays exact for diagonal and identity covariances.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
            0.5 * (q_ + q_.transpose()));
        if (eig.info() != Eigen::Success)
            throw numeric_error("characteristics: covariance eigendecomposition failed");
        const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
        if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
            throw invalid_input("characteristics: covariance must be positive semidefinite");
        Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        q_sqrt_ = eig.eigenvectors() * roots.asDiagonal() *
                  eig.eigenvectors().transpose();

        jump_m2_.resize(n);
        for (Eigen::Index k = 0; k < n; ++k)
            jump_m2_[k] = jumps_[static_cast<std::size_t>(k)].intensity *
                          jumps_[static_cast<std::size_t>(k)].second_moment();
    }

    /// Purely Gaussian characteristics with covariance q.
    static CylindricalCharacteristics brownian(Eigen::MatrixXd q) {
        const Eigen::Index n = q.rows();
        return CylindricalCharacteristics(
            Eigen::VectorXd::Zero(n), std::move(q),
            std::vector<JumpComponent>(static_cast<std::size_t>(n), JumpComponent::none()));
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return drift_.size(); }
    [[nodiscard]] const Eigen::VectorXd& drift() const noexcept { return drift_; }
    [[nodiscard]] const Eigen::MatrixXd& q() const noexcept { return q_; }
    [[nodiscard]] const Eigen::MatrixXd& q_sqrt() const noexcept { return q_sqrt_; }
    [[nodiscard]] const std::vector<JumpComponent>& jumps() const noexcept { return jumps_; }

    /// Diagonal of the jump covariance contribution: intensity times jump
    /// second moment, per coordinate.
    [[nodiscard]] const Eigen::VectorXd& jump_diag() const noexcept { return jump_m2_; }

    [[nodiscard]] bool is_martingale() const noexcept { return drift_.isZero(0.0); }

    /// Same characteristics with the drift removed.
    [[nodiscard]] CylindricalCharacteristics martingale_part() const {
        return CylindricalCharacteristics(Eigen::VectorXd::Zero(dim()), q_, jumps_);
    }

    /// Covariance bilinear form of the martingale part at unit time:
    /// u' (Q + D) v with D the diagonal jump contribution.
    [[nodiscard]] double covariance_form(const HVector& u, const HVector& v) const {
        check_vector(u, "covariance_form");
        check_vector(v, "covariance_form");
        return u.coords().dot(q_ * v.coords()) +
               u.coords().dot(jump_m2_.cwiseProduct(v.coords()));
    }

    /// Second moment of the scalar marginal <Y(t), u>: the martingale part
    /// contributes linearly in t, the drift quadratically.
    [[nodiscard]] double second_moment(const HVector& u, double t) const {
        check_vector(u, "second_moment");
        check_time(t, "second_moment");
        const double mart = covariance_form(u, u);
        const double dr = t * drift_.dot(u.coords());
        return t * mart + dr * dr;
    }

    /// Characteristic function of <Y(t), u>. The jump laws are symmetric
    /// and fully compensated, so only the drift contributes a phase.
    [[nodiscard]] std::complex<double> char_function(const HVector& u, double t) const {
        check_vector(u, "char_function");
        check_time(t, "char_function");
        double real_part = -0.5 * u.coords().dot(q_ * u.coords());
        for (Eigen::Index k = 0; k < dim(); ++k) {
            const auto& j = jumps_[static_cast<std::size_t>(k)];
            if (j.intensity > 0.0)
                real_part += j.intensity * (j.chi(u[k]) - 1.0);
        }
        const double imag_part = drift_.dot(u.coords());
        return std::exp(std::complex<double>(t * real_part, t * imag_part));
    }

    /// Squared operator norm of the covariance operator of Y(t) on the
    /// noise space: the largest eigenvalue of t (Q + D) + t^2 p p' with p
    /// the drift. Grows linearly in t for martingales, quadratically with
    /// drift present.
    [[nodiscard]] double operator_norm_sq(double t) const {
        check_time(t, "operator_norm_sq");
        Eigen::MatrixXd m = t * (q_ + Eigen::MatrixXd(jump_m2_.asDiagonal()));
        m.noalias() += (t * t) * (drift_ * drift_.transpose());
        return detail::power_iteration_sym(m);
    }

    /// Integrand weight of the isometry: the expected squared norm growth
    /// rate E|psi dY|^2 = tr(psi (Q + D) psi') for an operator psi mapping
    /// the noise space into the state space.
    [[nodiscard]] double ito_weight(const HSOperator& psi) const {
        if (psi.domain() != Space::U || psi.domain_dim() != dim())
            throw shape_error("ito_weight: operator domain does not match noise space");
        double w = (psi.entries() * q_sqrt_).squaredNorm();
        for (Eigen::Index k = 0; k < dim(); ++k)
            w += jump_m2_[k] * psi.entries().col(k).squaredNorm();
        return w;
    }

private:
    void check_vector(const HVector& u, const char* op) const {
        if (u.space() != Space::U || u.dim() != dim())
            throw shape_error(std::string(op) + ": vector does not live in the noise space");
    }
    static void check_time(double t, const char* op) {
        if (!(t >= 0.0) || !std::isfinite(t))
            throw invalid_input(std::string(op) + ": time must be finite and nonnegative");
    }

    Eigen::VectorXd drift_;
    Eigen::MatrixXd q_;
    std::vector<JumpComponent> jumps_;
    Eigen::MatrixXd q_sqrt_;
    Eigen::VectorXd jump_m2_;
};

} // namespace cylint
