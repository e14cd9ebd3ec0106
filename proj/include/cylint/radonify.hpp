#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cylint/characteristics.hpp"
#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/mc.hpp"
#include "cylint/rng.hpp"
#include "cylint/sampler.hpp"

namespace cylint {

/// Random operator taking finitely many Hilbert-Schmidt values with given
/// probabilities. All branches share one domain and codomain shape.
class SimpleRandomOperator {
public:
    SimpleRandomOperator(std::vector<HSOperator> values, std::vector<double> weights)
        : values_(std::move(values)), weights_(std::move(weights)) {
        if (values_.empty() || values_.size() != weights_.size())
            throw invalid_input("SimpleRandomOperator: need matching values and weights");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw invalid_input("SimpleRandomOperator: weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw invalid_input("SimpleRandomOperator: weights must sum to one");
        for (const auto& v : values_) {
            if (v.domain_dim() != values_[0].domain_dim() ||
                v.codomain_dim() != values_[0].codomain_dim() ||
                v.domain() != values_[0].domain() ||
                v.codomain() != values_[0].codomain())
                throw shape_error("SimpleRandomOperator: branch shapes differ");
        }
        cumulative_.reserve(weights_.size());
        double acc = 0.0;
        for (double w : weights_) {
            acc += w;
            cumulative_.push_back(acc);
        }
        cumulative_.back() = 1.0;
    }

    static SimpleRandomOperator deterministic(HSOperator phi) {
        std::vector<HSOperator> vals;
        vals.push_back(std::move(phi));
        return SimpleRandomOperator(std::move(vals), {1.0});
    }

    [[nodiscard]] std::size_t branches() const noexcept { return values_.size(); }
    [[nodiscard]] const HSOperator& value(std::size_t i) const { return values_.at(i); }
    [[nodiscard]] double weight(std::size_t i) const { return weights_.at(i); }
    [[nodiscard]] Eigen::Index domain_dim() const noexcept { return values_[0].domain_dim(); }
    [[nodiscard]] Eigen::Index codomain_dim() const noexcept { return values_[0].codomain_dim(); }

    /// Pick a branch by inverting the weight CDF on one uniform draw.
    [[nodiscard]] const HSOperator& realize(RngStream& rng) const {
        const double u = rng.uniform();
        for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i)
            if (u < cumulative_[i]) return values_[i];
        return values_.back();
    }

    /// Mean squared Hilbert-Schmidt norm over the branch distribution.
    [[nodiscard]] double mean_hs_norm_sq() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            acc += weights_[i] * hs_norm_sq(values_[i]);
        return acc;
    }

private:
    std::vector<HSOperator> values_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

/// Push one noise increment through a fixed operator into the state space.
inline HVector radonify(const HSOperator& phi, const IncrementSample& inc) {
    if (phi.domain() != Space::U ||
        phi.domain_dim() != inc.coords.size())
        throw shape_error("radonify: operator domain does not match the increment");
    return HVector(phi.entries() * inc.coords, phi.codomain());
}

/// Realize a random operator (one uniform from rng) and push the increment
/// through it. The branch draw and the increment must come from independent
/// streams; this function only consumes the branch draw.
inline HVector radonify_simple(const SimpleRandomOperator& op,
                               const IncrementSample& inc, RngStream& rng) {
    return radonify(op.realize(rng), inc);
}

/// Monte Carlo comparison of E|phi Y(dt)|^2 against the operator-norm bound
/// (squared norm of the noise covariance at dt, times the mean squared
/// Hilbert-Schmidt norm of phi). Isotropic noise attains the bound with
/// equality, so the slack is reported alongside the pass flag.
struct RadonifyBoundResult {
    MCEstimate lhs;     // sample mean of |phi Y(dt)|^2
    double bound = 0.0; // operator_norm_sq(dt) * mean_hs_norm_sq
    double slack = 0.0; // bound - lhs.mean
    bool pass = false;  // lhs.mean <= bound + 3 std errors
};

inline RadonifyBoundResult
verify_radonification_bound(const SimpleRandomOperator& op,
                            const CylindricalCharacteristics& chars,
                            double dt, std::uint64_t replicas, unsigned workers,
                            std::uint64_t seed) {
    if (op.domain_dim() != chars.dim())
        throw shape_error("verify_radonification_bound: operator domain does not match noise");
    if (replicas < 2)
        throw invalid_input("verify_radonification_bound: need at least two replicas");

    auto one = [&](std::uint64_t r) {
        RngStream stream(seed, r);
        RngStream op_rng = stream.substream("operator");
        RngStream noise_rng = stream.substream("noise");
        const HSOperator& phi = op.realize(op_rng);
        const IncrementSample inc = sample_increment(chars, dt, noise_rng);
        const HVector image = radonify(phi, inc);
        return image.coords().squaredNorm();
    };

    RadonifyBoundResult out;
    out.lhs = fanout_estimate(replicas, workers, one);
    out.bound = chars.operator_norm_sq(dt) * op.mean_hs_norm_sq();
    out.slack = out.bound - out.lhs.mean;
    out.pass = out.lhs.mean <= out.bound + out.lhs.band(3.0);
    return out;
}

/// Monte Carlo check that the scalar marginal <phi Y(dt), v> has second
/// moment equal to the weight mixture of the marginals along adjoint(phi) v.
struct MixtureIdentityResult {
    MCEstimate lhs;        // sample mean of <phi Y(dt), v>^2
    double expected = 0.0; // exact mixture of marginal second moments
    bool pass = false;     // |lhs.mean - expected| <= 3 std errors
};

inline MixtureIdentityResult
verify_mixture_identity(const SimpleRandomOperator& op,
                        const CylindricalCharacteristics& chars,
                        double dt, const HVector& v, std::uint64_t replicas,
                        unsigned workers, std::uint64_t seed) {
    if (op.domain_dim() != chars.dim())
        throw shape_error("verify_mixture_identity: operator domain does not match noise");
    if (v.space() != Space::V || v.dim() != op.codomain_dim())
        throw shape_error("verify_mixture_identity: direction does not match codomain");
    if (replicas < 2)
        throw invalid_input("verify_mixture_identity: need at least two replicas");

    auto one = [&](std::uint64_t r) {
        RngStream stream(seed, r);
        RngStream op_rng = stream.substream("operator");
        RngStream noise_rng = stream.substream("noise");
        const HSOperator& phi = op.realize(op_rng);
        const IncrementSample inc = sample_increment(chars, dt, noise_rng);
        const double proj = inner(radonify(phi, inc), v);
        return proj * proj;
    };

    MixtureIdentityResult out;
    out.lhs = fanout_estimate(replicas, workers, one);
    out.expected = 0.0;
    for (std::size_t i = 0; i < op.branches(); ++i) {
        const HVector pulled = apply(adjoint(op.value(i)), v);
        out.expected += op.weight(i) * chars.second_moment(pulled, dt);
    }
    out.pass = std::abs(out.lhs.mean - out.expected) <= out.lhs.band(3.0);
    return out;
}

} // namespace cylint
