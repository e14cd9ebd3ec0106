#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cylint/characteristics.hpp"
#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/rng.hpp"

namespace cylint::fixtures {

/// Driftless Gaussian noise with covariance var * I.
inline CylindricalCharacteristics gaussian_iso(Eigen::Index n, double var = 1.0) {
    return CylindricalCharacteristics::brownian(
        var * Eigen::MatrixXd::Identity(n, n));
}

/// Pure compensated jump noise: no Gaussian part, identical two-point
/// jumps of size a at the given rate in every coordinate.
inline CylindricalCharacteristics jumps_two_point(Eigen::Index n, double a, double rate) {
    return CylindricalCharacteristics(
        Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n),
        std::vector<JumpComponent>(static_cast<std::size_t>(n),
                                   JumpComponent::two_point(a, rate)));
}

/// Pure compensated jump noise with centered Gaussian jump sizes.
inline CylindricalCharacteristics jumps_gauss(Eigen::Index n, double sigma, double rate) {
    return CylindricalCharacteristics(
        Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n),
        std::vector<JumpComponent>(static_cast<std::size_t>(n),
                                   JumpComponent::gauss(sigma, rate)));
}

/// Full-featured noise: nonzero drift, decaying diagonal covariance, and
/// alternating jump families. One deterministic fixture exercising every
/// term at once.
inline CylindricalCharacteristics mixed_with_drift(Eigen::Index n) {
    Eigen::VectorXd drift(n);
    Eigen::VectorXd qdiag(n);
    std::vector<JumpComponent> jumps;
    jumps.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mode = static_cast<double>(k + 1);
        drift[k] = 0.2 / mode;
        qdiag[k] = 1.0 / (mode * mode);
        if (k % 2 == 0)
            jumps.push_back(JumpComponent::two_point(0.5 / mode, 2.0));
        else
            jumps.push_back(JumpComponent::gauss(0.3 / mode, 1.5));
    }
    return CylindricalCharacteristics(std::move(drift),
                                      Eigen::MatrixXd(qdiag.asDiagonal()),
                                      std::move(jumps));
}

/// Same covariance structure, zero drift.
inline CylindricalCharacteristics mixed_martingale(Eigen::Index n) {
    return mixed_with_drift(n).martingale_part();
}

/// Deterministic family of test directions: the basis vectors first, then
/// pseudorandom unit vectors at alternating radii 1/2, 1, 2. The sequence
/// depends only on (n, count, space).
inline std::vector<HVector> direction_grid(Eigen::Index n, std::size_t count, Space space) {
    std::vector<HVector> out;
    out.reserve(count);
    for (Eigen::Index k = 0; k < n && out.size() < count; ++k)
        out.push_back(HVector::basis(n, k, space));
    RngStream rng(0xd1ec7104u, static_cast<std::uint64_t>(n));
    const double radii[3] = {0.5, 1.0, 2.0};
    std::size_t i = 0;
    while (out.size() < count) {
        Eigen::VectorXd v(n);
        for (Eigen::Index k = 0; k < n; ++k) v[k] = rng.normal();
        const double norm = v.norm();
        if (norm < 1e-9) continue;
        out.push_back(HVector(radii[i % 3] / norm * v, space));
        ++i;
    }
    return out;
}

/// Solver coefficient bundled with its stated Lipschitz constant.
struct DriftFixture {
    std::function<HVector(const HVector&)> fn;
    double lipschitz = 0.0;
};

inline DriftFixture drift_zero(Eigen::Index n) {
    return DriftFixture{
        [n](const HVector&) { return HVector::zero(n, Space::V); }, 0.0};
}

/// v maps to c * v.
inline DriftFixture drift_scale(double c) {
    if (!std::isfinite(c))
        throw invalid_input("drift_scale: factor must be finite");
    return DriftFixture{[c](const HVector& v) { return c * v; }, std::abs(c)};
}

struct NoiseFixture {
    std::function<HSOperator(const HVector&)> fn;
    double lipschitz = 0.0;
};

inline NoiseFixture noise_constant(HSOperator phi) {
    return NoiseFixture{[phi = std::move(phi)](const HVector&) { return phi; }, 0.0};
}

/// phi scaled by 1/(1 + |v|): globally Lipschitz with constant hs_norm(phi)
/// because the scalar factor has slope at most one in |v|.
inline NoiseFixture noise_saturating(HSOperator phi) {
    const double lip = hs_norm(phi);
    return NoiseFixture{[phi = std::move(phi)](const HVector& v) {
                            return (1.0 / (1.0 + v.norm())) * phi;
                        },
                        lip};
}

} // namespace cylint::fixtures
