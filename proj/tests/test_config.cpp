#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "cylint/scenario.hpp"

using namespace cylint;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("scalar values parse with comments", "[config]") {
    const ConfigNode root = parse_config_text(
        "# leading comment\n"
        "count = 42\n"
        "rate = -2.5e-1 # trailing note\n"
        "half = .5\n"
        "on = true\n"
        "off = false\n"
        "name = \"two words # kept\"\n"
        "\"quoted key\" = 1\n");
    REQUIRE(root.at("count").as_number() == 42.0);
    REQUIRE(root.at("rate").as_number() == -0.25);
    REQUIRE(root.at("half").as_number() == 0.5);
    REQUIRE(root.at("on").as_bool());
    REQUIRE_FALSE(root.at("off").as_bool());
    REQUIRE(root.at("name").as_string() == "two words # kept");
    REQUIRE(root.at("quoted key").as_number() == 1.0);
}

TEST_CASE("strings support escapes", "[config]") {
    const ConfigNode root = parse_config_text(
        "a = \"tab\\there\"\n"
        "b = \"quote \\\" slash \\\\\"\n"
        "c = \"line\\nbreak\"\n");
    REQUIRE(root.at("a").as_string() == "tab\there");
    REQUIRE(root.at("b").as_string() == "quote \" slash \\");
    REQUIRE(root.at("c").as_string() == "line\nbreak");
    REQUIRE_THROWS_WITH(parse_config_text("x = \"bad \\q\""),
                        ContainsSubstring("unknown escape"));
}

TEST_CASE("arrays span lines and allow trailing commas", "[config]") {
    const ConfigNode root = parse_config_text(
        "flat = [1, 2, 3,]\n"
        "empty = []\n"
        "m = [\n"
        "  [1, 2], # first row\n"
        "  [3, 4],\n"
        "]\n"
        "mixed = [\"a\", true, 2]\n");
    REQUIRE(root.at("flat").as_vector() == Eigen::Vector3d(1.0, 2.0, 3.0));
    REQUIRE(root.at("empty").as_array().empty());
    const Eigen::MatrixXd m = root.at("m").as_matrix();
    REQUIRE(m.rows() == 2);
    REQUIRE(m(1, 0) == 3.0);
    REQUIRE(root.at("mixed").as_array()[1].as_bool());

    REQUIRE_THROWS_AS(root.at("mixed").as_vector(), config_error);
    REQUIRE_THROWS_WITH(
        parse_config_text("m = [[1, 2], [3]]\n").at("m").as_matrix(),
        ContainsSubstring("equal length"));
}

TEST_CASE("inline tables and section headers", "[config]") {
    const ConfigNode root = parse_config_text(
        "point = { x = 1, y = -2, label = \"p\" }\n"
        "none = {}\n"
        "[outer.inner]\n"
        "deep = 7\n"
        "[outer]\n"
        "shallow = 8\n"
        "[[piece]]\n"
        "op = { kind = \"identity\", dim = 2 }\n"
        "[[piece]]\n"
        "op = { kind = \"zero\", rows = 2, cols = 2 }\n");
    REQUIRE(root.at("point").at("x").as_number() == 1.0);
    REQUIRE(root.at("point").at("label").as_string() == "p");
    REQUIRE(root.at("none").table_entries.empty());
    REQUIRE(root.at("outer").at("inner").at("deep").as_number() == 7.0);
    REQUIRE(root.at("outer").at("shallow").as_number() == 8.0);
    REQUIRE(root.at("piece").as_array().size() == 2);
    REQUIRE(root.at("piece").as_array()[1].at("op").at("kind").as_string() == "zero");
}

TEST_CASE("parse errors carry line numbers", "[config]") {
    REQUIRE_THROWS_WITH(parse_config_text("a = 1\na = 2\n"),
                        ContainsSubstring("line 2"));
    REQUIRE_THROWS_WITH(parse_config_text("a = 1\na = 2\n"),
                        ContainsSubstring("duplicate key"));
    REQUIRE_THROWS_WITH(parse_config_text("ok = 1\nx = \"open\n"),
                        ContainsSubstring("line 2"));
    REQUIRE_THROWS_WITH(parse_config_text("x = 12zz\n"),
                        ContainsSubstring("invalid value '12zz'"));
    REQUIRE_THROWS_WITH(parse_config_text("x = inf\n"), ContainsSubstring("invalid"));
    REQUIRE_THROWS_WITH(parse_config_text("a.b = 1\n"),
                        ContainsSubstring("dotted keys"));
    REQUIRE_THROWS_WITH(parse_config_text("just a line\n"),
                        ContainsSubstring("expected key = value"));
    REQUIRE_THROWS_WITH(parse_config_text("x = [1, 2\n"),
                        ContainsSubstring("unterminated"));
    REQUIRE_THROWS_WITH(parse_config_text("x = 1 2\n"),
                        ContainsSubstring("trailing characters"));
    REQUIRE_THROWS_WITH(parse_config_text("[bad\n"),
                        ContainsSubstring("malformed section header"));
    REQUIRE_THROWS_WITH(parse_config_text("x = 1\n[x]\ny = 2\n"),
                        ContainsSubstring("not a table"));
}

TEST_CASE("node lookups diagnose their location", "[config]") {
    const ConfigNode root = parse_config_text("a = 1\n\nb = \"text\"\n");
    REQUIRE_THROWS_WITH(root.at("missing"), ContainsSubstring("missing key 'missing'"));
    REQUIRE_THROWS_WITH(root.at("b").as_number(),
                        ContainsSubstring("expected a number, found string"));
    REQUIRE_THROWS_WITH(root.at("b").as_number(), ContainsSubstring("line 3"));
    REQUIRE_THROWS_WITH(root.at("a").at("x"), ContainsSubstring("expected a table"));
}

TEST_CASE("unsigned integers cover the full seed range", "[config]") {
    const ConfigNode root = parse_config_text(
        "small = 7\n"
        "big = \"18446744073709551615\"\n"
        "frac = 1.5\n"
        "neg = -3\n"
        "junk = \"12x\"\n"
        "huge = \"99999999999999999999\"\n"
        "wide = 9.1e15\n");
    REQUIRE(root.at("small").as_u64() == 7);
    REQUIRE(root.at("big").as_u64() == 18446744073709551615ull);
    REQUIRE_THROWS_AS(root.at("frac").as_u64(), config_error);
    REQUIRE_THROWS_AS(root.at("neg").as_u64(), config_error);
    REQUIRE_THROWS_AS(root.at("junk").as_u64(), config_error);
    REQUIRE_THROWS_WITH(root.at("huge").as_u64(), ContainsSubstring("out of range"));
    REQUIRE_THROWS_AS(root.at("wide").as_u64(), config_error);
}

TEST_CASE("lookup fallbacks", "[config]") {
    const ConfigNode root = parse_config_text("x = 2\nflag = true\ns = \"v\"\n");
    REQUIRE(root.number_or("x", 9.0) == 2.0);
    REQUIRE(root.number_or("y", 9.0) == 9.0);
    REQUIRE(root.u64_or("x", 9) == 2);
    REQUIRE(root.u64_or("y", 9) == 9);
    REQUIRE(root.string_or("s", "d") == "v");
    REQUIRE(root.string_or("t", "d") == "d");
    REQUIRE(root.bool_or("flag", false));
    REQUIRE(root.bool_or("other", true));
}

TEST_CASE("operator descriptions build every kind", "[config]") {
    auto op = [](const std::string& body) {
        return operator_from_config(parse_config_text(body).at("op"));
    };
    REQUIRE(op("op = { kind = \"identity\", dim = 3 }").entries() ==
            Eigen::MatrixXd::Identity(3, 3));
    REQUIRE(op("op = { kind = \"identity\", dim = 2, scale = 2.0 }").entries()(1, 1) == 2.0);
    REQUIRE(op("op = { kind = \"diag\", values = [1, 2] }").entries()(1, 1) == 2.0);
    REQUIRE(op("op = { kind = \"dense\", rows = [[1, 2], [3, 4]] }").entries()(1, 0) == 3.0);
    const HSOperator r =
        op("op = { kind = \"rank_one\", rows = 2, cols = 3, row = 2, col = 2, value = -2.5 }");
    REQUIRE(r.entries()(1, 1) == -2.5);
    REQUIRE(r.entries()(0, 0) == 0.0);
    REQUIRE(op("op = { kind = \"zero\", rows = 2, cols = 3 }").entries().norm() == 0.0);

    REQUIRE_THROWS_WITH(op("op = { kind = \"hat\" }"),
                        ContainsSubstring("unknown operator kind"));
    REQUIRE_THROWS_WITH(
        op("op = { kind = \"rank_one\", rows = 2, cols = 2, row = 0, col = 1, value = 1 }"),
        ContainsSubstring("1-based"));
    REQUIRE_THROWS_AS(op("op = { dim = 2 }"), config_error);
}

TEST_CASE("random operator descriptions", "[config]") {
    const ConfigNode plain =
        parse_config_text("op = { kind = \"identity\", dim = 2 }").at("op");
    REQUIRE(random_operator_from_config(plain).branches() == 1);

    const ConfigNode mixed = parse_config_text(
        "op = { weights = [0.25, 0.75], values = [\n"
        "  { kind = \"identity\", dim = 2 },\n"
        "  { kind = \"identity\", dim = 2, scale = 2.0 },\n"
        "] }\n").at("op");
    const SimpleRandomOperator sro = random_operator_from_config(mixed);
    REQUIRE(sro.branches() == 2);
    REQUIRE(sro.weight(1) == 0.75);
    REQUIRE(sro.mean_hs_norm_sq() == Approx(0.25 * 2.0 + 0.75 * 8.0));

    const ConfigNode bad = parse_config_text(
        "op = { weights = [0.5, 0.2], values = [\n"
        "  { kind = \"identity\", dim = 2 },\n"
        "  { kind = \"identity\", dim = 2 },\n"
        "] }\n").at("op");
    REQUIRE_THROWS_AS(random_operator_from_config(bad), config_error);
}

TEST_CASE("noise characteristics from a section", "[config]") {
    const ConfigNode root = parse_config_text(
        "[char]\n"
        "dim = 2\n"
        "drift = [0.1, -0.2]\n"
        "q = { kind = \"diag\", values = [1.0, 0.25] }\n"
        "jumps = [{ kind = \"two_point\", param = 0.5, intensity = 2.0 }]\n");
    const CylindricalCharacteristics chars = characteristics_from_config(root.at("char"));
    REQUIRE(chars.dim() == 2);
    REQUIRE(chars.drift()[1] == -0.2);
    REQUIRE(chars.q()(1, 1) == 0.25);
    // one jump entry broadcasts to every coordinate
    REQUIRE(chars.jumps()[0].second_moment() == Approx(0.25));
    REQUIRE(chars.jumps()[1].second_moment() == Approx(0.25));

    const ConfigNode per_coord = parse_config_text(
        "[char]\n"
        "dim = 2\n"
        "q = { kind = \"identity\" }\n"
        "jumps = [{ kind = \"gauss\", param = 0.3, intensity = 1.0 }, { kind = \"none\" }]\n");
    const CylindricalCharacteristics two = characteristics_from_config(per_coord.at("char"));
    REQUIRE(two.jumps()[0].second_moment() == Approx(0.09));
    REQUIRE(two.jumps()[1].intensity == 0.0);

    REQUIRE_THROWS_WITH(
        characteristics_from_config(parse_config_text(
            "[char]\ndim = 2\njumps = [{kind=\"none\"}, {kind=\"none\"}, {kind=\"none\"}]\n")
                .at("char")),
        ContainsSubstring("one jump entry or one per coordinate"));
    REQUIRE_THROWS_AS(
        characteristics_from_config(parse_config_text(
            "[char]\ndim = 2\nq = { kind = \"dense\", rows = [[1, 2], [0, 1]] }\n")
                .at("char")),
        config_error);
    REQUIRE_THROWS_AS(characteristics_from_config(
                          parse_config_text("[char]\ndim = 0\n").at("char")),
                      config_error);
}

TEST_CASE("step processes from piece lists", "[config]") {
    const ConfigNode root = parse_config_text(
        "[process]\n"
        "times = [0.0, 0.5, 1.0]\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 2 }\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 2, scale = 2.0 }\n");
    const SimpleProcess psi = process_from_config(root.at("process"));
    REQUIRE(psi.intervals() == 2);
    REQUIRE(psi.times()[1] == 0.5);
    REQUIRE(psi.ops()[1].value(0).entries()(0, 0) == 2.0);

    const ConfigNode equal = parse_config_text(
        "[process]\n"
        "horizon = 2.0\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 1 }\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 1 }\n");
    REQUIRE(process_from_config(equal.at("process")).times() ==
            std::vector<double>{0.0, 1.0, 2.0});

    const ConfigNode bad_grid = parse_config_text(
        "[process]\n"
        "times = [0.0, 1.0]\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 1 }\n"
        "[[process.piece]]\n"
        "op = { kind = \"identity\", dim = 1 }\n");
    REQUIRE_THROWS_AS(process_from_config(bad_grid.at("process")), config_error);
}

TEST_CASE("solver configuration from a section", "[config]") {
    const ConfigNode root = parse_config_text(
        "[char]\n"
        "dim = 2\n"
        "q = { kind = \"identity\" }\n"
        "[spde]\n"
        "modes = 2\n"
        "drift = { kind = \"scale\", factor = -1.0 }\n"
        "noise = { kind = \"constant\", op = { kind = \"identity\", dim = 2 } }\n"
        "x0 = [0.5, 0.0]\n"
        "horizon = 1.0\n"
        "dt = 0.25\n"
        "scheme = \"picard\"\n"
        "beta = 12.0\n"
        "init = \"zero\"\n");
    const CylindricalCharacteristics chars = characteristics_from_config(root.at("char"));
    const SPDEConfig cfg = spde_from_config(root.at("spde"), chars);
    REQUIRE(cfg.semigroup.eigenvalues == Eigen::Vector2d(-1.0, -4.0));
    REQUIRE(cfg.lipschitz_f == 1.0);
    REQUIRE(cfg.initial[0] == 0.5);
    REQUIRE(cfg.scheme == Scheme::picard);
    REQUIRE(cfg.picard.beta == 12.0);
    REQUIRE(cfg.picard.init == PicardInit::zero);

    const ConfigNode explicit_a = parse_config_text(
        "[spde]\n"
        "a = [-0.5]\n"
        "drift = { kind = \"zero\" }\n"
        "noise = { kind = \"saturating\", op = { kind = \"identity\", dim = 1 } }\n"
        "horizon = 1.0\n"
        "dt = 0.5\n");
    const SPDEConfig one =
        spde_from_config(explicit_a.at("spde"), fixtures::gaussian_iso(1));
    REQUIRE(one.semigroup.eigenvalues[0] == -0.5);
    REQUIRE(one.lipschitz_g == 1.0);
    REQUIRE(one.scheme == Scheme::exp_euler);

    REQUIRE_THROWS_WITH(
        spde_from_config(parse_config_text(
                             "[spde]\n"
                             "modes = 2\n"
                             "drift = { kind = \"warp\" }\n"
                             "noise = { kind = \"constant\", op = { kind = \"identity\", dim = 2 } }\n"
                             "horizon = 1.0\n"
                             "dt = 0.25\n").at("spde"),
                         chars),
        ContainsSubstring("unknown drift kind"));
    // noise operator must map the noise space into the state space
    REQUIRE_THROWS_AS(
        spde_from_config(parse_config_text(
                             "[spde]\n"
                             "modes = 3\n"
                             "drift = { kind = \"zero\" }\n"
                             "noise = { kind = \"constant\", op = { kind = \"identity\", dim = 2 } }\n"
                             "horizon = 1.0\n"
                             "dt = 0.25\n").at("spde"),
                         chars),
        config_error);
}

TEST_CASE("scenarios bundle noise and run parameters", "[config]") {
    const Scenario sc = build_scenario(parse_config_text(
        "name = \"demo\"\n"
        "[char]\n"
        "dim = 1\n"
        "q = { kind = \"identity\" }\n"
        "[run]\n"
        "replicas = 500\n"
        "seed = \"18446744073709551615\"\n"
        "workers = 3\n"
        "out = \"results\"\n"), "fallback");
    REQUIRE(sc.name == "demo");
    REQUIRE(sc.chars.dim() == 1);
    REQUIRE(sc.run.replicas == 500);
    REQUIRE(sc.run.seed == 18446744073709551615ull);
    REQUIRE(sc.run.workers == 3);
    REQUIRE(sc.run.out_dir == "results");

    const Scenario bare = build_scenario(parse_config_text(
        "[char]\ndim = 1\nq = { kind = \"identity\" }\n"), "stem");
    REQUIRE(bare.name == "stem");
    REQUIRE(bare.run.replicas == 10000);
    REQUIRE(bare.run.workers == 0);
}

TEST_CASE("scenario files take their name from the path stem", "[config]") {
    const std::string path = "/tmp/cylint_stem_check.toml";
    {
        std::ofstream out(path);
        out << "[char]\ndim = 1\nq = { kind = \"identity\" }\n";
    }
    const Scenario sc = load_scenario(path);
    REQUIRE(sc.name == "cylint_stem_check");
    std::remove(path.c_str());

    REQUIRE_THROWS_WITH(load_scenario("/tmp/definitely_missing_cylint.toml"),
                        ContainsSubstring("cannot open"));
}
