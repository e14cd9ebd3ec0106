#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cylint/characteristics.hpp"
#include "cylint/config.hpp"
#include "cylint/errors.hpp"
#include "cylint/fixtures.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/integrate.hpp"
#include "cylint/radonify.hpp"
#include "cylint/spde.hpp"

namespace cylint {

namespace detail {

/// Re-raise domain validation failures as config diagnostics anchored at
/// the node that supplied the offending values.
template <class F>
auto with_config_context(const ConfigNode& node, const char* what, F&& f) {
    try {
        return f();
    } catch (const config_error&) {
        throw;
    } catch (const error& e) {
        node.fail(std::string(what) + ": " + e.what());
    }
}

} // namespace detail

/// Operator description: { kind = "identity" | "diag" | "dense" |
/// "rank_one" | "zero", ... }. Indices in rank_one are 1-based like the
/// coord_k columns in CSV output.
inline HSOperator operator_from_config(const ConfigNode& node) {
    const std::string kind = node.at("kind").as_string();
    return detail::with_config_context(node, "operator", [&]() -> HSOperator {
        if (kind == "identity") {
            const auto n = static_cast<Eigen::Index>(node.at("dim").as_u64());
            const double scale = node.number_or("scale", 1.0);
            return HSOperator(scale * Eigen::MatrixXd::Identity(n, n));
        }
        if (kind == "diag") {
            const Eigen::VectorXd d = node.at("values").as_vector();
            return HSOperator(Eigen::MatrixXd(d.asDiagonal()));
        }
        if (kind == "dense") {
            return HSOperator(node.at("rows").as_matrix());
        }
        if (kind == "rank_one") {
            const auto rows = static_cast<Eigen::Index>(node.at("rows").as_u64());
            const auto cols = static_cast<Eigen::Index>(node.at("cols").as_u64());
            const auto row = static_cast<Eigen::Index>(node.at("row").as_u64());
            const auto col = static_cast<Eigen::Index>(node.at("col").as_u64());
            if (row < 1 || col < 1)
                node.fail("rank_one indices are 1-based");
            return HSOperator::rank_one(rows, cols, row - 1, col - 1,
                                        node.at("value").as_number());
        }
        if (kind == "zero") {
            const auto rows = static_cast<Eigen::Index>(node.at("rows").as_u64());
            const auto cols = static_cast<Eigen::Index>(node.at("cols").as_u64());
            return HSOperator::zero(rows, cols);
        }
        node.fail("unknown operator kind '" + kind + "'");
    });
}

/// Either a single operator table (deterministic) or
/// { weights = [...], values = [ <operator>, ... ] }.
inline SimpleRandomOperator random_operator_from_config(const ConfigNode& node) {
    if (!node.has("weights"))
        return SimpleRandomOperator::deterministic(operator_from_config(node));
    return detail::with_config_context(node, "random operator", [&] {
        std::vector<double> weights;
        for (const auto& w : node.at("weights").as_array())
            weights.push_back(w.as_number());
        std::vector<HSOperator> values;
        for (const auto& v : node.at("values").as_array())
            values.push_back(operator_from_config(v));
        return SimpleRandomOperator(std::move(values), std::move(weights));
    });
}

namespace detail {

inline JumpComponent jump_from_config(const ConfigNode& node) {
    const std::string kind = node.string_or("kind", "none");
    if (kind == "none") return JumpComponent::none();
    const double param = node.at("param").as_number();
    const double intensity = node.at("intensity").as_number();
    if (kind == "two_point") return JumpComponent::two_point(param, intensity);
    if (kind == "gauss") return JumpComponent::gauss(param, intensity);
    node.fail("unknown jump kind '" + kind + "'");
}

inline Eigen::MatrixXd covariance_from_config(const ConfigNode& node, Eigen::Index dim) {
    const std::string kind = node.at("kind").as_string();
    if (kind == "zero") return Eigen::MatrixXd::Zero(dim, dim);
    if (kind == "identity")
        return node.number_or("scale", 1.0) * Eigen::MatrixXd::Identity(dim, dim);
    if (kind == "diag") {
        const Eigen::VectorXd d = node.at("values").as_vector();
        if (d.size() != dim) node.fail("diag length does not match dim");
        return Eigen::MatrixXd(d.asDiagonal());
    }
    if (kind == "dense") {
        const Eigen::MatrixXd m = node.at("rows").as_matrix();
        if (m.rows() != dim || m.cols() != dim) node.fail("dense shape does not match dim");
        return m;
    }
    node.fail("unknown covariance kind '" + kind + "'");
}

} // namespace detail

/// [char] section: dim, optional drift array, covariance table, optional
/// jumps list (one entry broadcasts to every coordinate).
inline CylindricalCharacteristics characteristics_from_config(const ConfigNode& node) {
    const auto dim = static_cast<Eigen::Index>(node.at("dim").as_u64());
    if (dim <= 0) node.fail("dim must be positive");

    Eigen::VectorXd drift = Eigen::VectorXd::Zero(dim);
    if (node.has("drift")) {
        drift = node.at("drift").as_vector();
        if (drift.size() != dim) node.at("drift").fail("drift length does not match dim");
    }

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    if (node.has("q")) q = detail::covariance_from_config(node.at("q"), dim);

    std::vector<JumpComponent> jumps(static_cast<std::size_t>(dim), JumpComponent::none());
    if (node.has("jumps")) {
        const auto& list = node.at("jumps").as_array();
        if (list.size() == 1) {
            jumps.assign(static_cast<std::size_t>(dim), detail::jump_from_config(list[0]));
        } else if (list.size() == static_cast<std::size_t>(dim)) {
            for (std::size_t k = 0; k < list.size(); ++k)
                jumps[k] = detail::jump_from_config(list[k]);
        } else {
            node.at("jumps").fail("need one jump entry or one per coordinate");
        }
    }

    return detail::with_config_context(node, "characteristics", [&] {
        return CylindricalCharacteristics(std::move(drift), std::move(q), std::move(jumps));
    });
}

/// Step process: explicit `times` array or `horizon` with equal pieces;
/// one [[...piece]] table per interval, each holding `op`.
inline SimpleProcess process_from_config(const ConfigNode& node) {
    std::vector<SimpleRandomOperator> ops;
    for (const auto& piece : node.at("piece").as_array())
        ops.push_back(random_operator_from_config(piece.at("op")));
    if (ops.empty()) node.fail("process needs at least one piece");

    std::vector<double> times;
    if (node.has("times")) {
        for (const auto& t : node.at("times").as_array()) times.push_back(t.as_number());
    } else {
        const double horizon = node.at("horizon").as_number();
        if (!(horizon > 0.0)) node.fail("horizon must be positive");
        times.resize(ops.size() + 1);
        for (std::size_t k = 0; k < times.size(); ++k)
            times[k] = horizon * static_cast<double>(k) / static_cast<double>(ops.size());
    }
    return detail::with_config_context(node, "process", [&] {
        return SimpleProcess(std::move(times), std::move(ops));
    });
}

/// [spde] section: semigroup (`modes` for the heat family or explicit `a`),
/// drift/noise coefficient fixtures, initial state, grid, and scheme.
inline SPDEConfig spde_from_config(const ConfigNode& node,
                                   const CylindricalCharacteristics& chars) {
    SemigroupSpec semigroup = detail::with_config_context(node, "semigroup", [&] {
        if (node.has("a")) return SemigroupSpec(node.at("a").as_vector());
        return SemigroupSpec::heat(static_cast<Eigen::Index>(node.at("modes").as_u64()));
    });
    const Eigen::Index state_dim = semigroup.dim();

    const ConfigNode& drift_node = node.at("drift");
    fixtures::DriftFixture drift = detail::with_config_context(
        drift_node, "drift fixture", [&]() -> fixtures::DriftFixture {
            const std::string kind = drift_node.at("kind").as_string();
            if (kind == "zero") return fixtures::drift_zero(state_dim);
            if (kind == "scale")
                return fixtures::drift_scale(drift_node.at("factor").as_number());
            drift_node.fail("unknown drift kind '" + kind + "'");
        });

    const ConfigNode& noise_node = node.at("noise");
    fixtures::NoiseFixture noise = detail::with_config_context(
        noise_node, "noise fixture", [&]() -> fixtures::NoiseFixture {
            const std::string kind = noise_node.at("kind").as_string();
            HSOperator op = operator_from_config(noise_node.at("op"));
            if (kind == "constant") return fixtures::noise_constant(std::move(op));
            if (kind == "saturating") return fixtures::noise_saturating(std::move(op));
            noise_node.fail("unknown noise kind '" + kind + "'");
        });

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(state_dim);
    if (node.has("x0")) {
        x0 = node.at("x0").as_vector();
        if (x0.size() != state_dim) node.at("x0").fail("x0 length does not match the state space");
    }

    PicardOptions picard;
    picard.beta = node.number_or("beta", 0.0);
    picard.max_iter = static_cast<std::size_t>(node.u64_or("max_iter", 50));
    picard.tol = node.number_or("tol", 1e-8);
    const std::string init = node.string_or("init", "orbit");
    if (init == "orbit") picard.init = PicardInit::semigroup_orbit;
    else if (init == "zero") picard.init = PicardInit::zero;
    else node.at("init").fail("unknown init '" + init + "'");

    const std::string scheme_name = node.string_or("scheme", "exp_euler");
    Scheme scheme = Scheme::exp_euler;
    if (scheme_name == "picard") scheme = Scheme::picard;
    else if (scheme_name != "exp_euler")
        node.at("scheme").fail("unknown scheme '" + scheme_name + "'");

    SPDEConfig cfg{std::move(semigroup),
                   std::move(drift.fn),
                   drift.lipschitz,
                   std::move(noise.fn),
                   noise.lipschitz,
                   HVector(std::move(x0), Space::V),
                   nullptr,
                   node.at("horizon").as_number(),
                   node.at("dt").as_number(),
                   chars,
                   scheme,
                   picard};
    detail::with_config_context(node, "spde", [&] {
        check_spde_config(cfg);
        return 0;
    });
    return cfg;
}

struct RunParams {
    std::uint64_t replicas = 10000;
    std::uint64_t seed = 0;
    unsigned workers = 0; // 0 = unresolved; the CLI resolves flag/env/config
    std::string out_dir = "out";
};

struct Scenario {
    std::string name;
    ConfigNode root;
    CylindricalCharacteristics chars;
    RunParams run;
};

inline Scenario build_scenario(ConfigNode root, const std::string& fallback_name) {
    CylindricalCharacteristics chars = characteristics_from_config(root.at("char"));
    RunParams run;
    if (root.has("run")) {
        const ConfigNode& r = root.at("run");
        run.replicas = r.u64_or("replicas", run.replicas);
        run.seed = r.u64_or("seed", run.seed);
        run.workers = static_cast<unsigned>(r.u64_or("workers", 0));
        run.out_dir = r.string_or("out", run.out_dir);
    }
    std::string name = root.string_or("name", fallback_name);
    return Scenario{std::move(name), std::move(root), std::move(chars), run};
}

inline Scenario load_scenario(const std::string& path) {
    std::string stem = path;
    const std::size_t slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const std::size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return build_scenario(parse_config_file(path), stem);
}

} // namespace cylint
