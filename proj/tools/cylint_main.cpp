// Command-line batch driver. Exit codes: 0 all checks pass, 1 a check
// failed (or an unexpected runtime failure), 2 configuration problem.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "cylint/cylint.hpp"

namespace {

void print_failing(const cylint::VerificationReport& report) {
    for (const auto& check : report.checks) {
        if (check.pass) continue;
        std::fprintf(stderr,
                     "FAILED %s: lhs=%.17g se=%.17g rhs=%.17g rule=%s\n",
                     check.check_id.c_str(), check.lhs_mean, check.lhs_se, check.rhs,
                     cylint::rule_name(check.rule));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cylindrical noise toolkit: simulation and verification runs"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t replicas = 0;
    unsigned workers = 0;
    std::string out_dir;

    const char* names[] = {"simulate", "charfn-check", "radonify-check",
                           "isometry-check", "spde-solve"};
    const char* blurbs[] = {
        "dump noise increment and path tables",
        "empirical vs. analytic characteristic function",
        "operator-norm bound and mixture identity",
        "Ito isometry and continuity bound",
        "march the equation; moments, paths, fixed-point diagnostics"};
    for (std::size_t i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", config_path, "scenario config file")->required();
        sub->add_option("--seed", seed, "master seed (overrides [run].seed)")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--replicas", replicas, "Monte Carlo replicas (overrides [run].replicas)");
        sub->add_option("--workers", workers,
                        "worker threads (default: CYLINT_WORKERS, then [run].workers, then 1)");
        sub->add_option("--out", out_dir, "output directory (overrides [run].out)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string subcommand = app.get_subcommands().front()->get_name();

    try {
        cylint::Scenario scenario = cylint::load_scenario(config_path);
        cylint::RunParams params = scenario.run;
        if (seed_set) params.seed = seed;
        if (replicas > 0) params.replicas = replicas;
        if (!out_dir.empty()) params.out_dir = out_dir;
        params.workers = cylint::resolve_workers(workers, scenario.run.workers);

        const cylint::VerificationReport report =
            cylint::run_subcommand(subcommand, scenario, params);
        if (!report.all_pass()) {
            print_failing(report);
            return 1;
        }
        std::printf("%s: %zu check(s) passed, report in %s\n", scenario.name.c_str(),
                    report.checks.size(), params.out_dir.c_str());
        return 0;
    } catch (const cylint::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
