#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "cylint/config.hpp"
#include "cylint/errors.hpp"
#include "cylint/fixtures.hpp"
#include "cylint/integrate.hpp"
#include "cylint/radonify.hpp"
#include "cylint/report.hpp"
#include "cylint/scenario.hpp"
#include "cylint/spde.hpp"

namespace cylint {

/// Worker-count precedence: explicit flag, then CYLINT_WORKERS, then the
/// scenario's [run] section, then one.
inline unsigned resolve_workers(unsigned flag_value, unsigned config_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("CYLINT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v <= 0)
            throw config_error("CYLINT_WORKERS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    if (config_value > 0) return config_value;
    return 1;
}

namespace detail {

inline std::string out_path(const RunParams& params, const std::string& file) {
    std::filesystem::create_directories(params.out_dir);
    return (std::filesystem::path(params.out_dir) / file).string();
}

inline const ConfigNode* section_of(const Scenario& scenario, const std::string& key) {
    return scenario.root.has(key) ? &scenario.root.at(key) : nullptr;
}

class WallClock {
public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

/// Dump a handful of noise paths: per path one increment table and one
/// cumulative-coordinate table. No checks; the report only names the run.
inline VerificationReport run_simulate(const Scenario& scenario, const RunParams& params) {
    const detail::WallClock clock;
    const ConfigNode* sec = detail::section_of(scenario, "simulate");
    const double horizon = sec ? sec->number_or("horizon", 1.0) : 1.0;
    const std::size_t steps = sec ? static_cast<std::size_t>(sec->u64_or("steps", 16)) : 16;
    const std::size_t paths = sec ? static_cast<std::size_t>(sec->u64_or("paths", 3)) : 3;

    const Eigen::Index n = scenario.chars.dim();
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream rng(params.seed, p);
        const std::vector<IncrementSample> incs =
            sample_path_increments(scenario.chars, horizon, steps, rng);

        std::string inc_csv = "t";
        for (Eigen::Index k = 0; k < n; ++k) inc_csv += ",dcoord_" + std::to_string(k + 1);
        inc_csv += "\n";
        PathSample cumulative;
        cumulative.times.push_back(0.0);
        cumulative.values.push_back(HVector::zero(n, Space::U));
        double t = 0.0;
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (const auto& inc : incs) {
            t += inc.dt;
            inc_csv += format_g17(t);
            for (Eigen::Index k = 0; k < n; ++k) inc_csv += "," + format_g17(inc.coords[k]);
            inc_csv += "\n";
            acc += inc.coords;
            cumulative.times.push_back(t);
            cumulative.values.push_back(HVector(acc, Space::U));
        }
        const std::string tag = std::to_string(p);
        write_text_file(detail::out_path(params, "increments_" + tag + ".csv"), inc_csv);
        write_path_csv(cumulative, detail::out_path(params, "path_" + tag + ".csv"));
    }

    VerificationReport report;
    report.scenario = scenario.name;
    report.seed = params.seed;
    report.wall_clock_ms = clock.elapsed_ms();
    write_report_json(report, detail::out_path(params, "report.json"));
    return report;
}

/// Empirical scalar-marginal transform versus the closed form, on a
/// deterministic direction grid. Tolerance is the pinned 4/sqrt(M) band
/// for both the cosine and sine components.
inline VerificationReport run_charfn(const Scenario& scenario, const RunParams& params) {
    const detail::WallClock clock;
    const ConfigNode* sec = detail::section_of(scenario, "charfn");
    const double t = sec ? sec->number_or("t", 1.0) : 1.0;
    const std::size_t n_dirs = sec ? static_cast<std::size_t>(sec->u64_or("directions", 20)) : 20;

    const auto dirs = fixtures::direction_grid(scenario.chars.dim(), n_dirs, Space::U);
    auto one = [&](std::uint64_t r) {
        RngStream rng(params.seed, r);
        const IncrementSample inc = sample_increment(scenario.chars, t, rng);
        std::vector<double> vals(2 * dirs.size());
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            const double x = dirs[d].coords().dot(inc.coords);
            vals[2 * d] = std::cos(x);
            vals[2 * d + 1] = std::sin(x);
        }
        return vals;
    };
    const auto rows = fanout<std::vector<double>>(params.replicas, params.workers, one);

    VerificationReport report;
    report.scenario = scenario.name;
    report.seed = params.seed;
    const double tol = 4.0 / std::sqrt(static_cast<double>(params.replicas));
    std::vector<double> column(rows.size());
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const std::complex<double> analytic = scenario.chars.char_function(dirs[d], t);
        for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][2 * d];
        report.checks.push_back(CheckRecord::within_tolerance(
            "charfn_re_" + std::to_string(d), mc_estimate(column), analytic.real(), tol));
        for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][2 * d + 1];
        report.checks.push_back(CheckRecord::within_tolerance(
            "charfn_im_" + std::to_string(d), mc_estimate(column), analytic.imag(), tol));
    }
    report.wall_clock_ms = clock.elapsed_ms();
    write_report_json(report, detail::out_path(params, "report.json"));
    return report;
}

/// Operator-norm bound and mixture identity for every configured operator.
inline VerificationReport run_radonify(const Scenario& scenario, const RunParams& params) {
    const detail::WallClock clock;
    const ConfigNode* sec = detail::section_of(scenario, "radonify");
    if (!sec) throw config_error("scenario has no [radonify] section");
    const double dt = sec->number_or("dt", 1.0);
    const auto& op_nodes = sec->at("op").as_array();
    if (op_nodes.empty()) sec->at("op").fail("need at least one operator");

    VerificationReport report;
    report.scenario = scenario.name;
    report.seed = params.seed;
    for (std::size_t i = 0; i < op_nodes.size(); ++i) {
        const SimpleRandomOperator op = random_operator_from_config(op_nodes[i]);
        const std::string tag = std::to_string(i);

        const RadonifyBoundResult bound = verify_radonification_bound(
            op, scenario.chars, dt, params.replicas, params.workers,
            derive_seed(params.seed, "radonify_bound_" + tag));
        report.checks.push_back(CheckRecord::statistical(
            "bound_op" + tag, bound.lhs, bound.bound, ToleranceRule::le_bound_plus_3se));

        HVector v = HVector::basis(op.codomain_dim(), 0, Space::V);
        if (sec->has("v")) {
            v = HVector(sec->at("v").as_vector(), Space::V);
            if (v.dim() != op.codomain_dim())
                sec->at("v").fail("direction length does not match operator codomain");
        }
        const MixtureIdentityResult mix = verify_mixture_identity(
            op, scenario.chars, dt, v, params.replicas, params.workers,
            derive_seed(params.seed, "radonify_mixture_" + tag));
        report.checks.push_back(CheckRecord::statistical(
            "mixture_op" + tag, mix.lhs, mix.expected, ToleranceRule::eq_within_3se));
    }
    report.wall_clock_ms = clock.elapsed_ms();
    write_report_json(report, detail::out_path(params, "report.json"));
    return report;
}

/// Isometry (driftless noise) and the a priori continuity bound for the
/// configured step process; both sides share one Monte Carlo estimate.
inline VerificationReport run_isometry(const Scenario& scenario, const RunParams& params) {
    const detail::WallClock clock;
    const ConfigNode* sec = detail::section_of(scenario, "isometry");
    if (!sec) throw config_error("scenario has no [isometry] section");
    const SimpleProcess psi = process_from_config(*sec);
    if (psi.domain_dim() != scenario.chars.dim())
        sec->fail("process domain does not match [char] dim");

    const MCEstimate lhs = integral_sq_estimate(psi, scenario.chars, params.replicas,
                                                params.workers, params.seed);
    VerificationReport report;
    report.scenario = scenario.name;
    report.seed = params.seed;
    if (scenario.chars.is_martingale())
        report.checks.push_back(CheckRecord::statistical(
            "isometry", lhs, isometry_rhs(psi, scenario.chars),
            ToleranceRule::eq_within_3se));
    report.checks.push_back(CheckRecord::statistical(
        "continuity", lhs, continuity_bound(psi, scenario.chars),
        ToleranceRule::le_bound_plus_3se));
    report.wall_clock_ms = clock.elapsed_ms();
    write_report_json(report, detail::out_path(params, "report.json"));
    return report;
}

namespace detail {

/// Exact second moment at the final grid time of the explicit scheme when
/// the drift coefficient vanishes, the noise coefficient is a constant
/// operator, and the noise itself is driftless: per mode, a geometric sum
/// of squared semigroup factors times the pushed-forward covariance.
inline double discrete_linear_moment(const SPDEConfig& cfg) {
    const std::size_t steps = step_count(cfg);
    const double dt = cfg.horizon / static_cast<double>(steps);
    const Eigen::MatrixXd phi = cfg.noise_map(cfg.initial).entries();
    Eigen::MatrixXd cov = cfg.chars.q();
    cov += Eigen::MatrixXd(cfg.chars.jump_diag().asDiagonal());
    const Eigen::VectorXd w = (phi * cov * phi.transpose()).diagonal();

    double acc = 0.0;
    for (Eigen::Index j = 0; j < cfg.semigroup.dim(); ++j) {
        const double a = cfg.semigroup.eigenvalues[j];
        const double x0j = cfg.initial[j];
        acc += x0j * x0j * std::exp(2.0 * a * cfg.horizon);
        const double r = std::exp(2.0 * a * dt);
        const double geom = r == 1.0
                                ? static_cast<double>(steps)
                                : r * (1.0 - std::pow(r, static_cast<double>(steps))) /
                                      (1.0 - r);
        acc += w[j] * dt * geom;
    }
    return acc;
}

} // namespace detail

/// Solve the configured equation: moment curves and sample paths as CSV,
/// fixed-point diagnostics as JSON, plus whatever checks the configuration
/// makes decidable (exact linear oracle, contraction ratios, scheme
/// agreement on shared noise).
inline VerificationReport run_spde(const Scenario& scenario, const RunParams& params) {
    const detail::WallClock clock;
    const ConfigNode* sec = detail::section_of(scenario, "spde");
    if (!sec) throw config_error("scenario has no [spde] section");
    const SPDEConfig cfg = spde_from_config(*sec, scenario.chars);
    const auto keep = static_cast<std::size_t>(sec->u64_or("keep_paths", 2));

    {
        RngStream probe_rng(derive_seed(params.seed, "lipschitz_probe"), 0);
        validate_lipschitz(cfg, 16, probe_rng);
    }

    VerificationReport report;
    report.scenario = scenario.name;
    report.seed = params.seed;

    const bool linear_oracle = sec->bool_or("oracle", true) &&
                               sec->at("drift").string_or("kind", "") == "zero" &&
                               sec->at("noise").string_or("kind", "") == "constant" &&
                               scenario.chars.is_martingale();

    const EnsembleSolution euler =
        ensemble_exp_euler(cfg, params.replicas, params.workers, params.seed, keep);

    if (cfg.scheme == Scheme::picard) {
        const PicardResult picard =
            picard_solve(cfg, params.replicas, params.workers, params.seed, keep);
        write_moments_csv(picard.solution, detail::out_path(params, "moments.csv"));
        write_text_file(detail::out_path(params, "picard.json"),
                        picard_diagnostics_json(picard).dump(2) + "\n");
        for (std::size_t r = 0; r < picard.solution.sample_paths.size(); ++r)
            write_path_csv(picard.solution.sample_paths[r],
                           detail::out_path(params, "path_" + std::to_string(r) + ".csv"));

        report.checks.push_back(CheckRecord::exact(
            "picard_converged", picard.converged ? 1.0 : 0.0, 1.0, 0.0));
        double worst_ratio = 0.0;
        bool have_ratio = false;
        for (const auto& it : picard.iterations)
            if (it.iteration >= 3 && std::isfinite(it.ratio)) {
                worst_ratio = std::max(worst_ratio, it.ratio);
                have_ratio = true;
            }
        if (have_ratio) {
            MCEstimate ratio_est;
            ratio_est.mean = worst_ratio;
            ratio_est.replicas = params.replicas;
            report.checks.push_back(CheckRecord::statistical(
                "picard_contraction", ratio_est, 1.0, ToleranceRule::le_bound_plus_3se));
        }
        // agreement with the explicit march on the same noise streams
        MCEstimate agree;
        agree.mean = picard.solution.moment2.back().mean;
        agree.std_error = std::sqrt(
            picard.solution.moment2.back().std_error * picard.solution.moment2.back().std_error +
            euler.moment2.back().std_error * euler.moment2.back().std_error);
        agree.replicas = params.replicas;
        report.checks.push_back(CheckRecord::statistical(
            "picard_euler_agree", agree, euler.moment2.back().mean,
            ToleranceRule::eq_within_3se));
    } else {
        write_moments_csv(euler, detail::out_path(params, "moments.csv"));
        for (std::size_t r = 0; r < euler.sample_paths.size(); ++r)
            write_path_csv(euler.sample_paths[r],
                           detail::out_path(params, "path_" + std::to_string(r) + ".csv"));
    }

    if (linear_oracle)
        report.checks.push_back(CheckRecord::statistical(
            "discrete_linear_oracle", euler.moment2.back(),
            detail::discrete_linear_moment(cfg), ToleranceRule::eq_within_3se));

    report.wall_clock_ms = clock.elapsed_ms();
    write_report_json(report, detail::out_path(params, "report.json"));
    return report;
}

/// Dispatch by subcommand name; unknown names are configuration errors.
inline VerificationReport run_subcommand(const std::string& subcommand,
                                         const Scenario& scenario,
                                         const RunParams& params) {
    if (subcommand == "simulate") return run_simulate(scenario, params);
    if (subcommand == "charfn-check") return run_charfn(scenario, params);
    if (subcommand == "radonify-check") return run_radonify(scenario, params);
    if (subcommand == "isometry-check") return run_isometry(scenario, params);
    if (subcommand == "spde-solve") return run_spde(scenario, params);
    throw config_error("unknown subcommand: " + subcommand);
}

} // namespace cylint
