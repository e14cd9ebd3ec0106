#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cylint/characteristics.hpp"
#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/rng.hpp"

namespace cylint {

/// One simulated increment of the noise over a window of length dt,
/// expressed in noise-space coordinates.
struct IncrementSample {
    double dt = 0.0;
    Eigen::VectorXd coords;

    [[nodiscard]] HVector vec() const { return HVector(coords, Space::U); }
};

/// Draw a single jump size.
inline double sample_jump(const JumpComponent& jump, RngStream& rng) {
    switch (jump.kind) {
    case JumpKind::two_point:
        return rng.uniform() < 0.5 ? jump.param : -jump.param;
    case JumpKind::gauss:
        return jump.param * rng.normal();
    }
    throw invalid_input("sample_jump: unknown kind");
}

/// Simulate one increment over [0, dt]. The draw order is part of the
/// contract: first the Gaussian block (dim normals, consumed even when the
/// covariance is zero), then per coordinate a Poisson jump count followed
/// immediately by that coordinate's jump sizes. The jump laws have zero
/// mean, so their compensator contributes nothing and the drift term is
/// exactly drift * dt.
inline IncrementSample sample_increment(const CylindricalCharacteristics& chars,
                                        double dt, RngStream& rng) {
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw invalid_input("sample_increment: dt must be finite and nonnegative");
    const Eigen::Index n = chars.dim();

    Eigen::VectorXd gauss(n);
    for (Eigen::Index k = 0; k < n; ++k) gauss[k] = rng.normal();

    Eigen::VectorXd coords = chars.drift() * dt;
    coords.noalias() += std::sqrt(dt) * (chars.q_sqrt() * gauss);

    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& jump = chars.jumps()[static_cast<std::size_t>(k)];
        const std::uint64_t count = rng.poisson(jump.intensity * dt);
        double sum = 0.0;
        for (std::uint64_t i = 0; i < count; ++i) sum += sample_jump(jump, rng);
        coords[k] += sum;
    }
    return IncrementSample{dt, std::move(coords)};
}

/// Simulate the increments of one path over an equidistant grid on [0, T].
inline std::vector<IncrementSample>
sample_path_increments(const CylindricalCharacteristics& chars,
                       double horizon, std::size_t steps, RngStream& rng) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw invalid_input("sample_path_increments: horizon must be finite and positive");
    if (steps == 0)
        throw invalid_input("sample_path_increments: at least one step required");
    const double dt = horizon / static_cast<double>(steps);
    std::vector<IncrementSample> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i)
        out.push_back(sample_increment(chars, dt, rng));
    return out;
}

/// Merge consecutive runs of `factor` increments into single increments,
/// summing both window lengths and coordinates. Produces the same path
/// observed on a grid coarsened by `factor`; the increment count must be
/// divisible by it.
inline std::vector<IncrementSample>
coarsen(const std::vector<IncrementSample>& fine, std::size_t factor) {
    if (factor == 0 || fine.size() % factor != 0)
        throw invalid_input("coarsen: increment count must be a multiple of the factor");
    std::vector<IncrementSample> out;
    out.reserve(fine.size() / factor);
    for (std::size_t i = 0; i < fine.size(); i += factor) {
        IncrementSample acc{fine[i].dt, fine[i].coords};
        for (std::size_t j = 1; j < factor; ++j) {
            acc.dt += fine[i + j].dt;
            acc.coords += fine[i + j].coords;
        }
        out.push_back(std::move(acc));
    }
    return out;
}

} // namespace cylint
