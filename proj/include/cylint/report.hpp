#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cylint/errors.hpp"
#include "cylint/integrate.hpp"
#include "cylint/mc.hpp"
#include "cylint/spde.hpp"

namespace cylint {

/// The three tolerance contracts used by every check. Equality and bound
/// checks are statistical (three standard errors); abs_tol is for exact
/// identities with a pinned numeric tolerance.
enum class ToleranceRule { eq_within_3se, le_bound_plus_3se, abs_tol };

inline const char* rule_name(ToleranceRule rule) {
    switch (rule) {
    case ToleranceRule::eq_within_3se: return "eq_within_3se";
    case ToleranceRule::le_bound_plus_3se: return "le_bound_plus_3se";
    case ToleranceRule::abs_tol: return "abs_tol";
    }
    throw invalid_input("rule_name: unknown rule");
}

/// One verified statement: left side (with its standard error), right
/// side, and the rule that decides the pass flag. The flag is always
/// recomputable from the stored numbers alone.
struct CheckRecord {
    std::string check_id;
    double lhs_mean = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    ToleranceRule rule = ToleranceRule::eq_within_3se;
    double abs_tol = 0.0;
    bool pass = false;

    [[nodiscard]] bool evaluate() const {
        switch (rule) {
        case ToleranceRule::eq_within_3se:
            return std::abs(lhs_mean - rhs) <= 3.0 * lhs_se;
        case ToleranceRule::le_bound_plus_3se:
            return lhs_mean <= rhs + 3.0 * lhs_se;
        case ToleranceRule::abs_tol:
            return std::abs(lhs_mean - rhs) <= abs_tol;
        }
        return false;
    }

    static CheckRecord statistical(std::string id, const MCEstimate& lhs, double rhs,
                                   ToleranceRule rule) {
        CheckRecord rec;
        rec.check_id = std::move(id);
        rec.lhs_mean = lhs.mean;
        rec.lhs_se = lhs.std_error;
        rec.rhs = rhs;
        rec.rule = rule;
        rec.pass = rec.evaluate();
        return rec;
    }

    /// Statistical estimate judged against a pinned absolute tolerance;
    /// the standard error is recorded for the reader but does not decide.
    static CheckRecord within_tolerance(std::string id, const MCEstimate& lhs, double rhs,
                                        double tol) {
        CheckRecord rec;
        rec.check_id = std::move(id);
        rec.lhs_mean = lhs.mean;
        rec.lhs_se = lhs.std_error;
        rec.rhs = rhs;
        rec.rule = ToleranceRule::abs_tol;
        rec.abs_tol = tol;
        rec.pass = rec.evaluate();
        return rec;
    }

    static CheckRecord exact(std::string id, double lhs, double rhs, double tol) {
        CheckRecord rec;
        rec.check_id = std::move(id);
        rec.lhs_mean = lhs;
        rec.rhs = rhs;
        rec.rule = ToleranceRule::abs_tol;
        rec.abs_tol = tol;
        rec.pass = rec.evaluate();
        return rec;
    }
};

struct VerificationReport {
    int schema = 1;
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<CheckRecord> checks;
    double wall_clock_ms = 0.0;

    [[nodiscard]] bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Shortest-digit exact decimal form used in all CSV output.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline nlohmann::ordered_json report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = report.schema;
    j["scenario"] = report.scenario;
    j["seed"] = report.seed;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json rec;
        rec["check_id"] = c.check_id;
        rec["lhs_mean"] = c.lhs_mean;
        rec["lhs_se"] = c.lhs_se;
        rec["rhs"] = c.rhs;
        rec["tolerance_rule"] = rule_name(c.rule);
        if (c.rule == ToleranceRule::abs_tol) rec["abs_tol"] = c.abs_tol;
        rec["pass"] = c.pass;
        j["checks"].push_back(std::move(rec));
    }
    // kept last so diff tooling can ignore the single nondeterministic field
    j["wall_clock_ms"] = report.wall_clock_ms;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open())
        throw error("cannot open for writing: " + path);
    out << text;
    if (!out.good())
        throw error("write failed: " + path);
}

inline void write_report_json(const VerificationReport& report, const std::string& path) {
    write_text_file(path, report_to_json(report).dump(2) + "\n");
}

/// One row per grid time: t, then each state coordinate.
inline std::string path_to_csv(const PathSample& path) {
    std::string out = "t";
    const Eigen::Index n = path.values.empty() ? 0 : path.values[0].dim();
    for (Eigen::Index k = 0; k < n; ++k)
        out += ",coord_" + std::to_string(k + 1);
    out += "\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        out += format_g17(path.times[i]);
        for (Eigen::Index k = 0; k < n; ++k)
            out += "," + format_g17(path.values[i][k]);
        out += "\n";
    }
    return out;
}

inline void write_path_csv(const PathSample& path, const std::string& file) {
    write_text_file(file, path_to_csv(path));
}

/// One row per grid time: t, second moment, standard error.
inline std::string moments_to_csv(const EnsembleSolution& sol) {
    std::string out = "t,mean_sq,se\n";
    for (std::size_t i = 0; i < sol.times.size(); ++i)
        out += format_g17(sol.times[i]) + "," + format_g17(sol.moment2[i].mean) + "," +
               format_g17(sol.moment2[i].std_error) + "\n";
    return out;
}

inline void write_moments_csv(const EnsembleSolution& sol, const std::string& file) {
    write_text_file(file, moments_to_csv(sol));
}

/// Fixed-point sweep diagnostics as ordered JSON rows.
inline nlohmann::ordered_json picard_diagnostics_json(const PicardResult& result) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["beta"] = result.beta;
    j["converged"] = result.converged;
    j["iterations"] = nlohmann::ordered_json::array();
    for (const auto& it : result.iterations) {
        nlohmann::ordered_json row;
        row["iteration"] = it.iteration;
        row["tb_diff"] = it.tb_diff;
        if (std::isfinite(it.ratio)) row["ratio"] = it.ratio;
        j["iterations"].push_back(std::move(row));
    }
    return j;
}

} // namespace cylint
