#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cylint/characteristics.hpp"
#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/integrate.hpp"
#include "cylint/mc.hpp"
#include "cylint/rng.hpp"
#include "cylint/sampler.hpp"

namespace cylint {

/// Diagonal contraction semigroup on the state space: S(t) multiplies
/// coordinate k by exp(a_k t) with a_k <= 0, so S(s)S(t) = S(s+t) exactly
/// and S(t) never expands norms.
struct SemigroupSpec {
    Eigen::VectorXd eigenvalues;

    explicit SemigroupSpec(Eigen::VectorXd a) : eigenvalues(std::move(a)) {
        if (eigenvalues.size() == 0)
            throw invalid_input("SemigroupSpec: dimension must be positive");
        if (!eigenvalues.allFinite() || eigenvalues.maxCoeff() > 0.0)
            throw invalid_input("SemigroupSpec: eigenvalues must be finite and nonpositive");
    }

    /// Laplacian modes on an interval: a_k = -k^2 for k = 1..n.
    static SemigroupSpec heat(Eigen::Index n) {
        Eigen::VectorXd a(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double mode = static_cast<double>(k + 1);
            a[k] = -mode * mode;
        }
        return SemigroupSpec(std::move(a));
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return eigenvalues.size(); }

    [[nodiscard]] Eigen::ArrayXd factors(double t) const {
        if (!(t >= 0.0) || !std::isfinite(t))
            throw invalid_input("SemigroupSpec: time must be finite and nonnegative");
        return (eigenvalues.array() * t).exp();
    }
};

inline HVector semigroup_apply(const SemigroupSpec& spec, double t, const HVector& v) {
    if (v.space() != Space::V || v.dim() != spec.dim())
        throw shape_error("semigroup_apply: vector does not match the state space");
    return HVector(spec.factors(t).matrix().cwiseProduct(v.coords()), Space::V);
}

enum class Scheme { exp_euler, picard };

/// First iterate of the fixed-point solver: either the noiseless semigroup
/// orbit of the initial state or the zero path.
enum class PicardInit { semigroup_orbit, zero };

struct PicardOptions {
    double beta = 0.0; // <= 0 selects the default rate below
    std::size_t max_iter = 50;
    double tol = 1e-8;
    PicardInit init = PicardInit::semigroup_orbit;
};

/// Everything needed to march one equation: geometry, coefficients with
/// their stated Lipschitz constants, noise characteristics, and scheme.
struct SPDEConfig {
    SemigroupSpec semigroup;
    std::function<HVector(const HVector&)> drift_term;      // F
    double lipschitz_f = 0.0;
    std::function<HSOperator(const HVector&)> noise_map;    // G
    double lipschitz_g = 0.0;
    HVector initial;
    std::function<HVector(RngStream&)> initial_sampler;     // optional
    double horizon = 1.0;
    double dt = 1.0 / 256.0;
    CylindricalCharacteristics chars;
    Scheme scheme = Scheme::exp_euler;
    PicardOptions picard;
};

/// Number of steps dt takes to tile [0, horizon]; dt must divide evenly.
inline std::size_t step_count(const SPDEConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw invalid_input("spde: dt must be finite and positive");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw invalid_input("spde: horizon must be finite and positive");
    const double ratio = cfg.horizon / cfg.dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 ||
        std::abs(static_cast<double>(steps) * cfg.dt - cfg.horizon) >
            1e-9 * std::max(1.0, cfg.horizon))
        throw invalid_input("spde: dt must divide the horizon");
    return steps;
}

inline void check_spde_config(const SPDEConfig& cfg) {
    step_count(cfg);
    if (cfg.initial.space() != Space::V || cfg.initial.dim() != cfg.semigroup.dim())
        throw shape_error("spde: initial state does not match the state space");
    if (!cfg.drift_term || !cfg.noise_map)
        throw invalid_input("spde: drift and noise coefficients must be set");
    const HVector f0 = cfg.drift_term(cfg.initial);
    if (f0.space() != Space::V || f0.dim() != cfg.semigroup.dim())
        throw shape_error("spde: drift coefficient must map the state space to itself");
    const HSOperator g0 = cfg.noise_map(cfg.initial);
    if (g0.domain() != Space::U || g0.domain_dim() != cfg.chars.dim() ||
        g0.codomain() != Space::V || g0.codomain_dim() != cfg.semigroup.dim())
        throw shape_error("spde: noise coefficient must map the noise space to the state space");
    if (!(cfg.lipschitz_f >= 0.0) || !(cfg.lipschitz_g >= 0.0))
        throw invalid_input("spde: Lipschitz constants must be nonnegative");
}

/// Probe the stated Lipschitz constants on random state pairs; a measured
/// increment beyond the stated slope is a contract violation.
inline void validate_lipschitz(const SPDEConfig& cfg, std::size_t pairs, RngStream& rng) {
    const Eigen::Index n = cfg.semigroup.dim();
    const double scale = 1.0 + cfg.initial.norm();
    for (std::size_t p = 0; p < pairs; ++p) {
        Eigen::VectorXd a(n), b(n);
        for (Eigen::Index i = 0; i < n; ++i) a[i] = scale * rng.normal();
        for (Eigen::Index i = 0; i < n; ++i) b[i] = scale * rng.normal();
        const HVector v1(a, Space::V), v2(b, Space::V);
        const double dist = (a - b).norm();
        const double df = (cfg.drift_term(v1) - cfg.drift_term(v2)).norm();
        if (df > cfg.lipschitz_f * dist * (1.0 + 1e-9) + 1e-12)
            throw contract_violation("spde: drift coefficient exceeds its stated Lipschitz constant");
        const double dg = hs_norm(cfg.noise_map(v1) - cfg.noise_map(v2));
        if (dg > cfg.lipschitz_g * dist * (1.0 + 1e-9) + 1e-12)
            throw contract_violation("spde: noise coefficient exceeds its stated Lipschitz constant");
    }
}

namespace detail {

[[noreturn]] inline void throw_blowup(std::size_t step) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "spde: state became non-finite at step %zu", step);
    throw numeric_error(msg);
}

/// One replica's explicit march, columns indexed by grid time:
/// X_{m+1} = S(dt) (X_m + F(X_m) dt + G(X_m) delta_m).
inline Eigen::MatrixXd exp_euler_path(const SPDEConfig& cfg,
                                      const Eigen::VectorXd& x0,
                                      const std::vector<IncrementSample>& increments) {
    const std::size_t steps = increments.size();
    const double dt = cfg.horizon / static_cast<double>(steps);
    const Eigen::ArrayXd s_dt = cfg.semigroup.factors(dt);
    Eigen::MatrixXd path(cfg.semigroup.dim(), static_cast<Eigen::Index>(steps + 1));
    path.col(0) = x0;
    for (std::size_t m = 0; m < steps; ++m) {
        const HVector x(path.col(static_cast<Eigen::Index>(m)), Space::V);
        Eigen::VectorXd stage = x.coords();
        stage.noalias() += dt * cfg.drift_term(x).coords();
        const HSOperator g = cfg.noise_map(x);
        if (g.codomain_dim() != path.rows() || g.domain_dim() != increments[m].coords.size())
            throw shape_error("spde: noise coefficient changed shape along the path");
        stage.noalias() += g.entries() * increments[m].coords;
        path.col(static_cast<Eigen::Index>(m + 1)) = (s_dt * stage.array()).matrix();
        if (!path.col(static_cast<Eigen::Index>(m + 1)).allFinite()) throw_blowup(m);
    }
    return path;
}

/// One sweep of the fixed-point map evaluated along a frozen path Y:
/// Z(t_m) is the semigroup orbit of x0 plus the semigroup-convolved drift
/// and noise contributions of Y, accumulated by the same recursion as the
/// explicit march. A path equal to its own sweep is a grid fixed point.
inline Eigen::MatrixXd picard_sweep(const SPDEConfig& cfg,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::MatrixXd& y,
                                    const std::vector<IncrementSample>& increments) {
    const std::size_t steps = increments.size();
    const double dt = cfg.horizon / static_cast<double>(steps);
    const Eigen::ArrayXd s_dt = cfg.semigroup.factors(dt);
    Eigen::MatrixXd z(y.rows(), y.cols());
    z.col(0) = x0;
    for (std::size_t m = 0; m < steps; ++m) {
        const HVector ym(y.col(static_cast<Eigen::Index>(m)), Space::V);
        Eigen::VectorXd stage = z.col(static_cast<Eigen::Index>(m));
        stage.noalias() += dt * cfg.drift_term(ym).coords();
        const HSOperator g = cfg.noise_map(ym);
        if (g.codomain_dim() != z.rows() || g.domain_dim() != increments[m].coords.size())
            throw shape_error("spde: noise coefficient changed shape along the path");
        stage.noalias() += g.entries() * increments[m].coords;
        z.col(static_cast<Eigen::Index>(m + 1)) = (s_dt * stage.array()).matrix();
        if (!z.col(static_cast<Eigen::Index>(m + 1)).allFinite()) throw_blowup(m);
    }
    return z;
}

inline PathSample path_from_matrix(const std::vector<double>& times,
                                   const Eigen::MatrixXd& m) {
    PathSample path;
    path.times = times;
    path.values.reserve(times.size());
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        path.values.push_back(HVector(m.col(c), Space::V));
    return path;
}

/// Canonical per-replica draws: the optional initial sampler reads a
/// dedicated substream, the marching increments read the stream directly,
/// so both schemes see identical noise for identical (seed, replica).
inline Eigen::VectorXd draw_initial(const SPDEConfig& cfg, RngStream& rng) {
    if (!cfg.initial_sampler) return cfg.initial.coords();
    RngStream init_rng = rng.substream("initial");
    const HVector x0 = cfg.initial_sampler(init_rng);
    if (x0.space() != Space::V || x0.dim() != cfg.semigroup.dim())
        throw shape_error("spde: sampled initial state does not match the state space");
    return x0.coords();
}

} // namespace detail

/// March one replica with noise drawn from rng.
inline PathSample solve_exp_euler(const SPDEConfig& cfg, RngStream& rng) {
    check_spde_config(cfg);
    const std::size_t steps = step_count(cfg);
    const std::vector<double> times = make_grid(cfg.horizon, steps);
    const Eigen::VectorXd x0 = detail::draw_initial(cfg, rng);
    std::vector<IncrementSample> incs;
    incs.reserve(steps);
    for (std::size_t m = 0; m < steps; ++m)
        incs.push_back(sample_increment(cfg.chars, cfg.horizon / static_cast<double>(steps), rng));
    return detail::path_from_matrix(times, detail::exp_euler_path(cfg, x0, incs));
}

/// March one replica against externally supplied increments (shared-noise
/// comparisons across schemes or grids). The increments fix the grid.
inline PathSample solve_exp_euler_given(const SPDEConfig& cfg,
                                        const std::vector<IncrementSample>& increments) {
    check_spde_config(cfg);
    if (increments.empty())
        throw invalid_input("solve_exp_euler_given: need at least one increment");
    const std::size_t steps = increments.size();
    const double dt = cfg.horizon / static_cast<double>(steps);
    for (const auto& inc : increments)
        if (std::abs(inc.dt - dt) > 1e-9 * std::max(1.0, dt))
            throw invalid_input("solve_exp_euler_given: increment windows do not tile the horizon");
    const std::vector<double> times = make_grid(cfg.horizon, steps);
    return detail::path_from_matrix(times,
                                    detail::exp_euler_path(cfg, cfg.initial.coords(), increments));
}

/// Grid times, the second-moment curve with standard errors, and a few
/// retained example paths.
struct EnsembleSolution {
    std::vector<double> times;
    std::vector<MCEstimate> moment2;
    std::vector<PathSample> sample_paths;
};

/// Weighted ensemble seminorm: the discounted peak of the second-moment
/// curve, square-rooted.
inline double tb_norm_from_means(const std::vector<double>& times,
                                 const std::vector<double>& mean_sq, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw invalid_input("tb_norm: beta must be finite and positive");
    if (times.size() != mean_sq.size() || times.empty())
        throw invalid_input("tb_norm: times and moments do not align");
    double peak = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        peak = std::max(peak, std::exp(-beta * times[i]) * mean_sq[i]);
    return std::sqrt(peak);
}

inline double tb_norm(const EnsembleSolution& sol, double beta) {
    std::vector<double> means;
    means.reserve(sol.moment2.size());
    for (const auto& est : sol.moment2) means.push_back(est.mean);
    return tb_norm_from_means(sol.times, means, beta);
}

/// Default discount rate: fast enough that one sweep of the fixed-point
/// map provably shrinks distances for the stated coefficient slopes.
inline double default_beta(const SPDEConfig& cfg) {
    const double gain = std::max(cfg.lipschitz_f * cfg.lipschitz_f,
                                 cfg.lipschitz_g * cfg.lipschitz_g *
                                     cfg.chars.operator_norm_sq(1.0));
    return 8.0 * std::max(gain, 1e-12) * std::max(1.0, cfg.horizon);
}

namespace detail {

inline std::vector<MCEstimate> per_time_summary(const std::vector<std::vector<double>>& sq,
                                                std::size_t n_times) {
    std::vector<MCEstimate> out(n_times);
    std::vector<double> column(sq.size());
    for (std::size_t t = 0; t < n_times; ++t) {
        for (std::size_t r = 0; r < sq.size(); ++r) column[r] = sq[r][t];
        out[t] = mc_estimate(column);
    }
    return out;
}

} // namespace detail

/// Fan the explicit scheme out over replicas; replica r draws from the
/// stream keyed (seed, r), so the ensemble is reproducible for any worker
/// count. Up to keep_paths replicas are re-marched serially afterwards to
/// retain full example paths.
inline EnsembleSolution ensemble_exp_euler(const SPDEConfig& cfg,
                                           std::uint64_t replicas, unsigned workers,
                                           std::uint64_t seed,
                                           std::size_t keep_paths = 2) {
    check_spde_config(cfg);
    const std::size_t steps = step_count(cfg);
    auto one = [&](std::uint64_t r) {
        RngStream rng(seed, r);
        const PathSample path = solve_exp_euler(cfg, rng);
        std::vector<double> sq(path.values.size());
        for (std::size_t i = 0; i < path.values.size(); ++i)
            sq[i] = path.values[i].coords().squaredNorm();
        return sq;
    };
    const std::vector<std::vector<double>> sq =
        fanout<std::vector<double>>(replicas, workers, one);

    EnsembleSolution sol;
    sol.times = make_grid(cfg.horizon, steps);
    sol.moment2 = detail::per_time_summary(sq, steps + 1);
    const std::size_t keep = std::min<std::size_t>(keep_paths, replicas);
    for (std::size_t r = 0; r < keep; ++r) {
        RngStream rng(seed, r);
        sol.sample_paths.push_back(solve_exp_euler(cfg, rng));
    }
    return sol;
}

struct PicardIteration {
    std::size_t iteration = 0; // 1-based sweep index
    double tb_diff = 0.0;      // weighted ensemble distance to the previous iterate
    double ratio = std::numeric_limits<double>::quiet_NaN(); // vs. previous diff
};

struct PicardResult {
    EnsembleSolution solution;
    std::vector<PicardIteration> iterations;
    double beta = 0.0;
    bool converged = false;
};

/// Fixed-point solve: iterate the sweep on every replica's frozen noise,
/// measuring successive iterate distances in the weighted ensemble norm.
/// Noise is re-derived from (seed, replica) at each sweep instead of being
/// stored, which keeps memory at two path buffers per replica.
inline PicardResult picard_solve(const SPDEConfig& cfg,
                                 std::uint64_t replicas, unsigned workers,
                                 std::uint64_t seed,
                                 std::size_t keep_paths = 2) {
    check_spde_config(cfg);
    if (replicas == 0)
        throw invalid_input("picard_solve: need at least one replica");
    const std::size_t steps = step_count(cfg);
    const double dt = cfg.horizon / static_cast<double>(steps);
    const std::vector<double> times = make_grid(cfg.horizon, steps);
    const double beta = cfg.picard.beta > 0.0 ? cfg.picard.beta : default_beta(cfg);
    const std::size_t n_times = steps + 1;

    auto replica_increments = [&](std::uint64_t r) {
        RngStream rng(seed, r);
        Eigen::VectorXd x0 = detail::draw_initial(cfg, rng);
        std::vector<IncrementSample> incs;
        incs.reserve(steps);
        for (std::size_t m = 0; m < steps; ++m)
            incs.push_back(sample_increment(cfg.chars, dt, rng));
        return std::make_pair(std::move(x0), std::move(incs));
    };

    // first iterate
    std::vector<Eigen::MatrixXd> current(static_cast<std::size_t>(replicas));
    for (std::uint64_t r = 0; r < replicas; ++r) {
        auto [x0, incs] = replica_increments(r);
        Eigen::MatrixXd y(cfg.semigroup.dim(), static_cast<Eigen::Index>(n_times));
        if (cfg.picard.init == PicardInit::zero) {
            y.setZero();
        } else {
            for (std::size_t m = 0; m < n_times; ++m)
                y.col(static_cast<Eigen::Index>(m)) =
                    cfg.semigroup.factors(times[m]).matrix().cwiseProduct(x0);
        }
        current[static_cast<std::size_t>(r)] = std::move(y);
    }

    PicardResult result;
    result.beta = beta;
    std::size_t stall = 0; // consecutive sweeps without contraction

    for (std::size_t it = 1; it <= cfg.picard.max_iter; ++it) {
        auto sweep_one = [&](std::uint64_t r) {
            auto [x0, incs] = replica_increments(r);
            Eigen::MatrixXd z =
                detail::picard_sweep(cfg, x0, current[static_cast<std::size_t>(r)], incs);
            std::vector<double> sq_diff(n_times);
            for (std::size_t m = 0; m < n_times; ++m)
                sq_diff[m] = (z.col(static_cast<Eigen::Index>(m)) -
                              current[static_cast<std::size_t>(r)].col(
                                  static_cast<Eigen::Index>(m)))
                                 .squaredNorm();
            current[static_cast<std::size_t>(r)] = std::move(z);
            return sq_diff;
        };
        const std::vector<std::vector<double>> sq_diff =
            fanout<std::vector<double>>(replicas, workers, sweep_one);

        std::vector<double> mean_diff(n_times);
        std::vector<double> column(static_cast<std::size_t>(replicas));
        for (std::size_t m = 0; m < n_times; ++m) {
            for (std::size_t r = 0; r < column.size(); ++r) column[r] = sq_diff[r][m];
            mean_diff[m] = pairwise_sum(column) / static_cast<double>(replicas);
        }
        PicardIteration diag;
        diag.iteration = it;
        diag.tb_diff = tb_norm_from_means(times, mean_diff, beta);
        if (!result.iterations.empty() && result.iterations.back().tb_diff > 0.0)
            diag.ratio = diag.tb_diff / result.iterations.back().tb_diff;
        result.iterations.push_back(diag);

        if (diag.tb_diff <= cfg.picard.tol) {
            result.converged = true;
            break;
        }
        if (std::isfinite(diag.ratio)) {
            stall = diag.ratio >= 1.0 ? stall + 1 : 0;
            if (stall >= 3)
                throw numeric_error(
                    "picard_solve: no contraction over three consecutive sweeps; "
                    "increase beta or shorten the horizon");
        }
    }

    std::vector<std::vector<double>> sq(static_cast<std::size_t>(replicas),
                                        std::vector<double>(n_times));
    for (std::size_t r = 0; r < sq.size(); ++r)
        for (std::size_t m = 0; m < n_times; ++m)
            sq[r][m] = current[r].col(static_cast<Eigen::Index>(m)).squaredNorm();

    result.solution.times = times;
    result.solution.moment2 = detail::per_time_summary(sq, n_times);
    const std::size_t keep = std::min<std::size_t>(keep_paths, replicas);
    for (std::size_t r = 0; r < keep; ++r)
        result.solution.sample_paths.push_back(detail::path_from_matrix(times, current[r]));
    return result;
}

} // namespace cylint
