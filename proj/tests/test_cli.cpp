#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gelfand/cli.hpp"

using namespace gelfand;
using namespace gelfand::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "gelfand_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST(Config, ParsesCommentsAndBlanks) {
    const auto m = parse_config_text("# header\n\ncommand = verify-lk\n  seed=42  # trailing\nlambdas = 0.5, 1\n");
    EXPECT_EQ(m.at("command"), "verify-lk");
    EXPECT_EQ(m.at("seed"), "42");
    EXPECT_EQ(m.at("lambdas"), "0.5, 1");
    EXPECT_THROW(parse_config_text("no equals sign\n"), ConfigError);
}

TEST(Config, UnknownKeyAndBadValues) {
    EXPECT_THROW(ExperimentConfig::resolve({{"sead", "1"}}), ConfigError);
    const auto c = ExperimentConfig::resolve({{"n_paths", "-3"}, {"dt", "abc"}, {"lambdas", "1,x"}});
    EXPECT_THROW(c.unsigned_integer("n_paths"), ConfigError);
    EXPECT_THROW(c.number("dt"), ConfigError);
    EXPECT_THROW(c.list("lambdas"), ConfigError);
    EXPECT_TRUE(ExperimentConfig::resolve({{"lambdas", ""}}).list("lambdas").empty());
}

TEST(Config, ModelDiagnosticsNameTheEntry) {
    try {
        ExperimentConfig::resolve({{"model.a11", "1"}, {"model.a12", "2"}, {"model.a22", "1"}}).model();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("a12"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ExperimentConfig::resolve({{"model.jump_law", "cauchy"}, {"model.jump_intensity", "1"}}).model(),
                 ConfigError);
    EXPECT_THROW(ExperimentConfig::resolve({{"model.jump_law", "isotropic"}}).model(), ConfigError);
    const LevyModel m =
        ExperimentConfig::resolve({{"model.jump_law", "point"}, {"model.jump_intensity", "2"}, {"model.jump_point", "0.7,0.2"}})
            .model();
    EXPECT_EQ(m.jump_intensity, 2.0);
    EXPECT_EQ(std::get<PointMassJump>(m.jump_law).W.x1, 0.7);
}

TEST(Config, HashIgnoresOutputPath) {
    const auto a = ExperimentConfig::resolve({{"command", "spherical"}, {"output", "a.csv"}});
    const auto b = ExperimentConfig::resolve({{"command", "spherical"}, {"output", "b.csv"}});
    const auto c = ExperimentConfig::resolve({{"command", "spherical"}, {"seed", "2"}});
    EXPECT_EQ(a.hash_hex(), b.hash_hex());
    EXPECT_NE(a.hash_hex(), c.hash_hex());
    EXPECT_EQ(a.hash_hex().size(), 16u);
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Csv, VerifyLkSchema) {
    const auto cfg = ExperimentConfig::resolve({{"command", "verify-lk"},
                                                {"n_paths", "500"},
                                                {"model.jump_law", "isotropic"},
                                                {"model.jump_intensity", "1"}});
    const RunResult r = run_experiment(cfg);
    const std::string csv = render_csv(r.table, cfg);
    EXPECT_EQ(csv.rfind("# format: gelfand-csv/1\n", 0), 0u);
    EXPECT_NE(csv.find("# config_hash: " + cfg.hash_hex()), std::string::npos);
    const auto lines = data_lines(csv);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "lambda,t,empirical_re,empirical_im,std_err,predicted,z_score");
}

TEST(Csv, SimulateSchemaStartsAtOrigin) {
    const auto cfg = ExperimentConfig::resolve({{"command", "simulate"}, {"model.a11", "1"}, {"model.a22", "1"}, {"t", "0.1"}});
    const auto lines = data_lines(render_csv(run_experiment(cfg).table, cfg));
    ASSERT_GE(lines.size(), 12u);
    EXPECT_EQ(lines[0], "time,x,y");
    EXPECT_EQ(lines[1], "0,0,1");
}

TEST(Csv, EmptyGridGivesHeaderOnly) {
    const auto cfg = ExperimentConfig::resolve({{"command", "transform"}, {"lambdas", ""}});
    const auto lines = data_lines(render_csv(run_experiment(cfg).table, cfg));
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0], "lambda,value_re,value_im");
}

TEST(Csv, NumbersRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Run, DeterministicAcrossThreadCounts) {
    const auto cfg = ExperimentConfig::resolve({{"command", "verify-lk"},
                                                {"n_paths", "2000"},
                                                {"model.a11", "0.5"},
                                                {"model.a22", "0.5"},
                                                {"model.jump_law", "isotropic"},
                                                {"model.jump_intensity", "1"}});
    EXPECT_EQ(render_csv(run_experiment(cfg, 1).table, cfg), render_csv(run_experiment(cfg, 4).table, cfg));
}

TEST(Run, ExitCodesAndFiles) {
    const auto path = scratch("run.csv");
    std::ostringstream out, err;
    Invocation inv;
    inv.overrides = {{"command", "spherical"}};
    inv.out = path.string();
    inv.quiet = true;
    EXPECT_EQ(run(inv, out, err), 0) << err.str();
    EXPECT_TRUE(out.str().empty());
    const auto summary = nlohmann::json::parse(slurp(path.string() + ".json"));
    EXPECT_EQ(summary["command"], "spherical");
    EXPECT_EQ(summary["gates"]["failed"], 0);
    EXPECT_EQ(data_lines(slurp(path)).size(), 10u);

    inv.overrides = {{"command", "fly"}};
    EXPECT_EQ(run(inv, out, err), 1);
    EXPECT_NE(err.str().find("unknown command"), std::string::npos);

    inv.overrides = {{"command", "verify-semigroup"}, {"model.drift", "1,0"}, {"quadrature.n_points", "64"}};
    EXPECT_EQ(run(inv, out, err), 2);

    inv.overrides = {{"command", "spherical"}};
    inv.out = (scratch("missing_dir") / "nested" / "x.csv").string();
    EXPECT_EQ(run(inv, out, err), 1);
    EXPECT_NE(err.str().find("cannot write"), std::string::npos);
}
