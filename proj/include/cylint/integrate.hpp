#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cylint/characteristics.hpp"
#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/mc.hpp"
#include "cylint/radonify.hpp"
#include "cylint/rng.hpp"
#include "cylint/sampler.hpp"

namespace cylint {

/// Equidistant grid 0 = t_0 < ... < t_steps = horizon.
inline std::vector<double> make_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw invalid_input("make_grid: horizon must be finite and positive");
    if (steps == 0)
        throw invalid_input("make_grid: at least one step required");
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    return times;
}

inline void check_grid(const std::vector<double>& times) {
    if (times.size() < 2)
        throw invalid_input("grid: need at least two time points");
    if (times.front() != 0.0)
        throw invalid_input("grid: must start at zero");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1]) || !std::isfinite(times[k + 1]))
            throw invalid_input("grid: times must be finite and strictly increasing");
}

/// Sample one increment per grid interval, in grid order.
inline std::vector<IncrementSample>
sample_grid_increments(const CylindricalCharacteristics& chars,
                       const std::vector<double>& times, RngStream& rng) {
    check_grid(times);
    std::vector<IncrementSample> out;
    out.reserve(times.size() - 1);
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        out.push_back(sample_increment(chars, times[k + 1] - times[k], rng));
    return out;
}

/// Operator-valued step process: one random operator per grid interval
/// (t_k, t_{k+1}]. Branch picks are independent of the noise, which makes
/// every piece measurable at its interval's left endpoint.
class SimpleProcess {
public:
    SimpleProcess(std::vector<double> times, std::vector<SimpleRandomOperator> ops)
        : times_(std::move(times)), ops_(std::move(ops)) {
        check_grid(times_);
        if (ops_.size() + 1 != times_.size())
            throw invalid_input("SimpleProcess: need one operator per interval");
        for (const auto& op : ops_) {
            if (op.domain_dim() != ops_[0].domain_dim() ||
                op.codomain_dim() != ops_[0].codomain_dim())
                throw shape_error("SimpleProcess: operator shapes differ across intervals");
        }
    }

    static SimpleProcess constant(HSOperator phi, double horizon) {
        std::vector<SimpleRandomOperator> ops;
        ops.push_back(SimpleRandomOperator::deterministic(std::move(phi)));
        return SimpleProcess({0.0, horizon}, std::move(ops));
    }

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<SimpleRandomOperator>& ops() const noexcept { return ops_; }
    [[nodiscard]] std::size_t intervals() const noexcept { return ops_.size(); }
    [[nodiscard]] double horizon() const noexcept { return times_.back(); }
    [[nodiscard]] Eigen::Index domain_dim() const noexcept { return ops_[0].domain_dim(); }
    [[nodiscard]] Eigen::Index codomain_dim() const noexcept { return ops_[0].codomain_dim(); }

private:
    std::vector<double> times_;
    std::vector<SimpleRandomOperator> ops_;
};

/// Predictable integrand given by a rule reading the time and the history
/// of increments strictly before it. Every value must stay within hs_bound
/// in Hilbert-Schmidt norm; violations surface as contract errors.
struct PredictableProcessSpec {
    std::function<HSOperator(double t, std::span<const IncrementSample> history)> evaluator;
    double hs_bound = 0.0;

    [[nodiscard]] HSOperator evaluate(double t,
                                      std::span<const IncrementSample> history) const {
        HSOperator op = evaluator(t, history);
        if (!(hs_norm(op) <= hs_bound * (1.0 + 1e-12) + 1e-12))
            throw contract_violation("predictable integrand exceeded its stated norm bound");
        return op;
    }
};

/// Right-continuous step path of partial integrals on a grid.
/// values[0] is the zero vector (integral over the empty interval).
struct PathSample {
    std::vector<double> times;
    std::vector<HVector> values;

    /// Value at the largest grid time not exceeding t.
    [[nodiscard]] const HVector& value_at(double t) const {
        if (times.empty() || t < times.front())
            throw invalid_input("PathSample::value_at: time precedes the grid");
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t idx = static_cast<std::size_t>(it - times.begin()) - 1;
        return values[idx];
    }
};

/// Pick one branch per interval, one uniform each, in grid order.
inline std::vector<HSOperator> realize_simple(const SimpleProcess& psi, RngStream& rng) {
    std::vector<HSOperator> out;
    out.reserve(psi.intervals());
    for (const auto& op : psi.ops()) out.push_back(op.realize(rng));
    return out;
}

inline void check_alignment(const SimpleProcess& psi,
                            const std::vector<HSOperator>& realized,
                            const std::vector<IncrementSample>& increments) {
    if (realized.size() != psi.intervals() || increments.size() != psi.intervals())
        throw invalid_input("integrate_simple: inputs do not align with the grid");
    for (std::size_t k = 0; k < increments.size(); ++k) {
        const double dt = psi.times()[k + 1] - psi.times()[k];
        if (std::abs(increments[k].dt - dt) > 1e-12 * std::max(1.0, dt))
            throw invalid_input("integrate_simple: increment windows do not match the grid");
        if (increments[k].coords.size() != psi.domain_dim())
            throw shape_error("integrate_simple: increment dimension mismatch");
    }
}

/// Integral of a step process against given realized branches and noise
/// increments: the sum of each interval's image of its increment.
inline HVector integrate_simple(const SimpleProcess& psi,
                                const std::vector<HSOperator>& realized,
                                const std::vector<IncrementSample>& increments) {
    check_alignment(psi, realized, increments);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(psi.codomain_dim());
    for (std::size_t k = 0; k < increments.size(); ++k)
        acc.noalias() += realized[k].entries() * increments[k].coords;
    return HVector(std::move(acc), Space::V);
}

/// Draw branches and increments interval by interval (branch first, so the
/// operator never peeks at its own window's noise), then integrate.
struct RealizedSimple {
    std::vector<HSOperator> ops;
    std::vector<IncrementSample> increments;
};

inline RealizedSimple realize_and_sample(const SimpleProcess& psi,
                                         const CylindricalCharacteristics& chars,
                                         RngStream& rng) {
    if (chars.dim() != psi.domain_dim())
        throw shape_error("realize_and_sample: noise dimension does not match integrand");
    RealizedSimple out;
    out.ops.reserve(psi.intervals());
    out.increments.reserve(psi.intervals());
    for (std::size_t k = 0; k < psi.intervals(); ++k) {
        out.ops.push_back(psi.ops()[k].realize(rng));
        out.increments.push_back(
            sample_increment(chars, psi.times()[k + 1] - psi.times()[k], rng));
    }
    return out;
}

/// Left-point Ito sum of a predictable integrand over a grid, sampling the
/// driving increments as it marches. The rule is always evaluated before
/// its window's increment is drawn.
struct IntegralResult {
    HVector value;
    std::vector<IncrementSample> increments;
};

inline IntegralResult integrate_predictable(const PredictableProcessSpec& spec,
                                            const std::vector<double>& grid,
                                            const CylindricalCharacteristics& chars,
                                            RngStream& rng) {
    check_grid(grid);
    std::vector<IncrementSample> history;
    history.reserve(grid.size() - 1);
    Eigen::VectorXd acc;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const HSOperator op = spec.evaluate(grid[k], history);
        if (op.domain_dim() != chars.dim())
            throw shape_error("integrate_predictable: integrand domain does not match noise");
        if (k == 0) acc = Eigen::VectorXd::Zero(op.codomain_dim());
        else if (op.codomain_dim() != acc.size())
            throw shape_error("integrate_predictable: integrand codomain changed along the grid");
        history.push_back(sample_increment(chars, grid[k + 1] - grid[k], rng));
        acc.noalias() += op.entries() * history.back().coords;
    }
    return IntegralResult{HVector(std::move(acc), Space::V), std::move(history)};
}

/// Same sum against externally supplied increments (used to couple nested
/// grids to one underlying noise realization).
inline HVector integrate_predictable_given(const PredictableProcessSpec& spec,
                                           const std::vector<double>& grid,
                                           const std::vector<IncrementSample>& increments) {
    check_grid(grid);
    if (increments.size() + 1 != grid.size())
        throw invalid_input("integrate_predictable_given: increments do not align with grid");
    Eigen::VectorXd acc;
    for (std::size_t k = 0; k < increments.size(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        if (std::abs(increments[k].dt - dt) > 1e-12 * std::max(1.0, dt))
            throw invalid_input("integrate_predictable_given: window lengths do not match grid");
        const HSOperator op =
            spec.evaluate(grid[k], std::span<const IncrementSample>(increments.data(), k));
        if (op.domain_dim() != increments[k].coords.size())
            throw shape_error("integrate_predictable_given: integrand domain mismatch");
        if (k == 0) acc = Eigen::VectorXd::Zero(op.codomain_dim());
        else if (op.codomain_dim() != acc.size())
            throw shape_error("integrate_predictable_given: integrand codomain changed");
        acc.noalias() += op.entries() * increments[k].coords;
    }
    return HVector(std::move(acc), Space::V);
}

/// Partial integrals of a step process at every grid time.
inline PathSample integral_path(const SimpleProcess& psi,
                                const std::vector<HSOperator>& realized,
                                const std::vector<IncrementSample>& increments) {
    check_alignment(psi, realized, increments);
    PathSample path;
    path.times = psi.times();
    path.values.reserve(psi.times().size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(psi.codomain_dim());
    path.values.push_back(HVector(acc, Space::V));
    for (std::size_t k = 0; k < increments.size(); ++k) {
        acc.noalias() += realized[k].entries() * increments[k].coords;
        path.values.push_back(HVector(acc, Space::V));
    }
    return path;
}

inline PathSample integral_path(const SimpleProcess& psi,
                                const CylindricalCharacteristics& chars,
                                RngStream& rng) {
    const RealizedSimple r = realize_and_sample(psi, chars, rng);
    return integral_path(psi, r.ops, r.increments);
}

inline PathSample integral_path(const PredictableProcessSpec& spec,
                                const std::vector<double>& grid,
                                const CylindricalCharacteristics& chars,
                                RngStream& rng) {
    check_grid(grid);
    PathSample path;
    path.times = grid;
    path.values.reserve(grid.size());
    std::vector<IncrementSample> history;
    history.reserve(grid.size() - 1);
    Eigen::VectorXd acc;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const HSOperator op = spec.evaluate(grid[k], history);
        if (op.domain_dim() != chars.dim())
            throw shape_error("integral_path: integrand domain does not match noise");
        if (k == 0) {
            acc = Eigen::VectorXd::Zero(op.codomain_dim());
            path.values.push_back(HVector(acc, Space::V));
        } else if (op.codomain_dim() != acc.size()) {
            throw shape_error("integral_path: integrand codomain changed along the grid");
        }
        history.push_back(sample_increment(chars, grid[k + 1] - grid[k], rng));
        acc.noalias() += op.entries() * history.back().coords;
        path.values.push_back(HVector(acc, Space::V));
    }
    return path;
}

// ---- analytic functionals ----

/// Expected squared Hilbert-Schmidt norm integrated over time; exact for
/// step processes.
inline double h_norm_sq(const SimpleProcess& psi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < psi.intervals(); ++k)
        acc += (psi.times()[k + 1] - psi.times()[k]) * psi.ops()[k].mean_hs_norm_sq();
    return acc;
}

inline double h_norm(const SimpleProcess& psi) { return std::sqrt(h_norm_sq(psi)); }

/// Left-point quadrature of E over histories of the squared norm, for
/// rule-based integrands. Histories are simulated; deterministic rules
/// collapse to plain quadrature with zero standard error.
struct HNormEstimate {
    MCEstimate norm_sq;
    double norm = 0.0;
};

inline HNormEstimate h_norm_estimate(const PredictableProcessSpec& spec,
                                     const std::vector<double>& grid,
                                     const CylindricalCharacteristics& chars,
                                     std::uint64_t replicas, unsigned workers,
                                     std::uint64_t seed) {
    check_grid(grid);
    auto one = [&](std::uint64_t r) {
        RngStream rng(seed, r);
        std::vector<IncrementSample> history;
        history.reserve(grid.size() - 1);
        double q = 0.0;
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const HSOperator op = spec.evaluate(grid[k], history);
            q += (grid[k + 1] - grid[k]) * hs_norm_sq(op);
            history.push_back(sample_increment(chars, grid[k + 1] - grid[k], rng));
        }
        return q;
    };
    HNormEstimate out;
    out.norm_sq = fanout_estimate(replicas, workers, one);
    out.norm = std::sqrt(std::max(0.0, out.norm_sq.mean));
    return out;
}

/// Expected integrand weight of one random operator.
inline double expected_ito_weight(const SimpleRandomOperator& op,
                                  const CylindricalCharacteristics& chars) {
    double acc = 0.0;
    for (std::size_t i = 0; i < op.branches(); ++i)
        acc += op.weight(i) * chars.ito_weight(op.value(i));
    return acc;
}

inline void require_martingale(const CylindricalCharacteristics& chars, const char* op) {
    if (!chars.is_martingale())
        throw invalid_input(std::string(op) +
                            ": noise must be driftless for the isometry");
}

/// Exact right-hand side of the isometry for a step process: the interval
/// sum of expected integrand weights.
inline double isometry_rhs(const SimpleProcess& psi,
                           const CylindricalCharacteristics& chars) {
    require_martingale(chars, "isometry_rhs");
    double acc = 0.0;
    for (std::size_t k = 0; k < psi.intervals(); ++k)
        acc += (psi.times()[k + 1] - psi.times()[k]) *
               expected_ito_weight(psi.ops()[k], chars);
    return acc;
}

/// Quadrature analogue for rule-based integrands, Monte Carlo over histories.
inline MCEstimate isometry_rhs_estimate(const PredictableProcessSpec& spec,
                                        const std::vector<double>& grid,
                                        const CylindricalCharacteristics& chars,
                                        std::uint64_t replicas, unsigned workers,
                                        std::uint64_t seed) {
    require_martingale(chars, "isometry_rhs_estimate");
    check_grid(grid);
    auto one = [&](std::uint64_t r) {
        RngStream rng(seed, r);
        std::vector<IncrementSample> history;
        history.reserve(grid.size() - 1);
        double q = 0.0;
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const HSOperator op = spec.evaluate(grid[k], history);
            q += (grid[k + 1] - grid[k]) * chars.ito_weight(op);
            history.push_back(sample_increment(chars, grid[k + 1] - grid[k], rng));
        }
        return q;
    };
    return fanout_estimate(replicas, workers, one);
}

/// A priori bound on E of the squared integral: twice the martingale term
/// (unit-time covariance norm times the squared process norm) plus twice
/// the drift term (horizon times squared drift norm times the same).
inline double continuity_bound_from(double h_sq, double horizon,
                                    const CylindricalCharacteristics& chars) {
    const double mart = chars.martingale_part().operator_norm_sq(1.0);
    return 2.0 * mart * h_sq + 2.0 * horizon * chars.drift().squaredNorm() * h_sq;
}

inline double continuity_bound(const SimpleProcess& psi,
                               const CylindricalCharacteristics& chars) {
    return continuity_bound_from(h_norm_sq(psi), psi.horizon(), chars);
}

/// Sample mean of the squared norm of the integral of a step process, the
/// left side of both the isometry and the continuity bound. Replica r uses
/// the stream keyed (seed, r), branch picks and noise on separate substreams.
inline MCEstimate integral_sq_estimate(const SimpleProcess& psi,
                                       const CylindricalCharacteristics& chars,
                                       std::uint64_t replicas, unsigned workers,
                                       std::uint64_t seed) {
    if (replicas < 2)
        throw invalid_input("integral_sq_estimate: need at least two replicas");
    auto one = [&](std::uint64_t r) {
        RngStream stream(seed, r);
        RngStream op_rng = stream.substream("operator");
        RngStream noise_rng = stream.substream("noise");
        const std::vector<HSOperator> ops = realize_simple(psi, op_rng);
        const std::vector<IncrementSample> incs =
            sample_grid_increments(chars, psi.times(), noise_rng);
        return integrate_simple(psi, ops, incs).coords().squaredNorm();
    };
    return fanout_estimate(replicas, workers, one);
}

/// Monte Carlo check of the isometry: sample mean of the squared integral
/// against the exact interval sum, within three standard errors.
struct IsometryCheckResult {
    MCEstimate lhs;
    double rhs = 0.0;
    bool pass = false;
};

inline IsometryCheckResult verify_isometry(const SimpleProcess& psi,
                                           const CylindricalCharacteristics& chars,
                                           std::uint64_t replicas, unsigned workers,
                                           std::uint64_t seed) {
    IsometryCheckResult out;
    out.rhs = isometry_rhs(psi, chars);
    out.lhs = integral_sq_estimate(psi, chars, replicas, workers, seed);
    out.pass = std::abs(out.lhs.mean - out.rhs) <= out.lhs.band(3.0);
    return out;
}

} // namespace cylint
