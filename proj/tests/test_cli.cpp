#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stochmom/cli/config.hpp"
#include "stochmom/cli/run.hpp"

namespace stochmom::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root = fs::temp_directory_path() / (std::string("stochmom_") + info->name() + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    void TearDown() override { fs::remove_all(root); }

    ScenarioConfig small() const
    {
        ScenarioConfig c;
        c.paths = 20;
        c.horizon = 2.0;
        c.dt = 1e-2;
        c.workers = 1;
        c.out = (root / "runs").string();
        return c;
    }

    fs::path root;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Shell {
    int status = -1;
    std::string out;
};

Shell shell(const std::string& args)
{
    Shell r;
    const std::string cmd = std::string(STOCHMOM_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe)
        return r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

TEST(Config, DefaultsAreValid)
{
    const ScenarioConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.scenario, ScenarioKind::oscillator_ground);
    EXPECT_EQ(c.paths, 10000);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_DOUBLE_EQ(c.horizon, 50.0);
}

TEST(Config, JsonRoundTrip)
{
    ScenarioConfig c;
    c.scenario = ScenarioKind::grid_custom;
    c.nu = 0.25;
    c.policy = Estimator::extrapolated;
    c.grid = {-30.0, 30.0, 1024};
    c.dump_paths = true;
    const auto back = from_json(nlohmann::json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, ReportsEveryBadField)
{
    try {
        from_json(nlohmann::json::parse(R"({"nu": -1, "paths": 0, "bogus": 1, "dt": "fast"})")).validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        EXPECT_NE(all.find("bogus: unknown field"), std::string::npos);
        EXPECT_NE(all.find("dt: wrong type"), std::string::npos);
    }
    try {
        from_json(nlohmann::json::parse(R"({"nu": -1, "paths": 0, "horizon": 1.0005})")).validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        ASSERT_EQ(e.problems().size(), 3u);
        EXPECT_EQ(e.problems()[0].rfind("nu:", 0), 0u);
        EXPECT_EQ(e.problems()[1].rfind("paths:", 0), 0u);
        EXPECT_EQ(e.problems()[2].rfind("horizon:", 0), 0u);
    }
    EXPECT_THROW(from_json(nlohmann::json::parse(R"({"scenario": "nope"})")), ConfigError);
    EXPECT_THROW(from_json(nlohmann::json::parse("[1, 2]")), ConfigError);
}

TEST_F(CliTest, RunWritesArtifacts)
{
    const auto r = run(small());
    for (const char* f : {"manifest.json", "ensemble.tsv", "density.tsv", "histogram.tsv", "summary.json"})
        EXPECT_TRUE(fs::exists(r.directory / f)) << f;
    EXPECT_FALSE(fs::exists(r.directory / "paths"));
    EXPECT_EQ(r.directory.filename().string().rfind("oscillator-ground_seed42_", 0), 0u);

    const auto summary = nlohmann::json::parse(slurp(r.directory / "summary.json"));
    EXPECT_EQ(summary["sample_count"], 20);
    EXPECT_EQ(summary["provenance"]["seed"], 42);
    EXPECT_NEAR(summary["target_variance"].get<double>(), 0.5, 1e-6);
    EXPECT_TRUE(summary["ks"].is_object());
    const auto manifest = nlohmann::json::parse(slurp(r.directory / "manifest.json"));
    EXPECT_EQ(manifest["command"], "run");
    EXPECT_EQ(manifest["config"]["paths"], 20);

    std::istringstream ens(slurp(r.directory / "ensemble.tsv"));
    std::string line;
    std::getline(ens, line);
    EXPECT_EQ(line, "path_index\tP\tT_used");
    int rows = 0;
    while (std::getline(ens, line))
        ++rows;
    EXPECT_EQ(rows, 20);
}

TEST_F(CliTest, EnsembleIsByteIdenticalAcrossRunsAndWorkers)
{
    auto c = small();
    const auto a = run(c);
    c.workers = 3;
    const auto b = run(c);
    EXPECT_NE(a.directory, b.directory);
    EXPECT_EQ(slurp(a.directory / "ensemble.tsv"), slurp(b.directory / "ensemble.tsv"));
    EXPECT_EQ(slurp(a.directory / "summary.json"), slurp(b.directory / "summary.json"));
    EXPECT_EQ(slurp(a.directory / "histogram.tsv"), slurp(b.directory / "histogram.tsv"));
}

TEST_F(CliTest, DumpPathsRespectsLimit)
{
    auto c = small();
    c.dump_paths = true;
    c.dump_limit = 3;
    const auto r = run(c);
    EXPECT_TRUE(fs::exists(r.directory / "paths" / "path_2.tsv"));
    EXPECT_FALSE(fs::exists(r.directory / "paths" / "path_3.tsv"));
    std::istringstream in(slurp(r.directory / "paths" / "path_0.tsv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t\tx\tx_F\tdW");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 201);
}

TEST_F(CliTest, GridCustomWithTabulatedPotential)
{
    const auto table = root / "harmonic.tsv";
    auto c = small();
    c.scenario = ScenarioKind::grid_custom;
    c.grid = {-30.0, 30.0, 512};
    {
        // Sampled on the grid nodes, so interpolation adds no roughness.
        std::ofstream out(table);
        out.precision(17);
        out << "x\tV\n";
        for (std::size_t i = 0; i < c.grid.points; ++i)
            out << c.grid.node(i) << "\t" << 0.5 * c.grid.node(i) * c.grid.node(i) << "\n";
    }
    c.potential = table.string();
    const auto r = run(c);
    EXPECT_TRUE(r.warnings.empty()) << (r.warnings.empty() ? "" : r.warnings[0]);
    const auto summary = nlohmann::json::parse(slurp(r.directory / "summary.json"));
    EXPECT_EQ(summary["scenario"], "grid-custom");
    EXPECT_NEAR(summary["target_variance"].get<double>(), 0.5, 1e-4);
}

TEST_F(CliTest, NarrowGridWarns)
{
    auto c = small();
    c.scenario = ScenarioKind::grid_custom;
    c.grid = {-6.0, 6.0, 128};
    c.horizon = 5.0;
    const auto r = run(c);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(r.warnings[0].rfind("GridTooNarrow", 0), 0u);
}

TEST_F(CliTest, MissingPotentialFileIsConfigError)
{
    auto c = small();
    c.scenario = ScenarioKind::grid_custom;
    c.potential = (root / "absent.tsv").string();
    EXPECT_THROW(run(c), ConfigError);
}

TEST_F(CliTest, BinaryRejectsEmptyEnsembleWithoutOutput)
{
    const auto out = root / "never";
    const auto r = shell("run --paths 0 --out " + out.string());
    EXPECT_EQ(r.status, 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, BinaryDensityPrintsTable)
{
    const auto r = shell("density --scenario oscillator-ground");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out.rfind("P\trho\n", 0), 0u);
    const auto written = shell("density --scenario free-gaussian --out " + (root / "d").string());
    EXPECT_EQ(written.status, 0);
    EXPECT_TRUE(fs::exists(root / "d" / "free-gaussian_density.tsv"));
}

TEST_F(CliTest, BinaryRunPrintsDirectory)
{
    const auto r = shell("run --paths 5 --horizon 1 --dt 0.01 --workers 1 --out " + (root / "o").string());
    ASSERT_EQ(r.status, 0);
    const auto dir = r.out.substr(0, r.out.find('\n'));
    EXPECT_TRUE(fs::exists(fs::path(dir) / "ensemble.tsv"));
}

TEST_F(CliTest, VerifyRequiresOscillator)
{
    auto c = small();
    c.scenario = ScenarioKind::free_gaussian;
    std::ostringstream log;
    EXPECT_THROW(verify(c, log), ConfigError);
}

TEST(ClosedFormCheck, CoarseStepStillWithinConstant)
{
    verification::Settings s;
    s.dt = 0.1;
    s.oracle_paths = 20;
    s.workers = 1;
    const auto r = verification::check_coupled_closed_form(s);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST_F(CliTest, VerifyFlagsTamperedGamma)
{
    auto c = small();
    c.paths = 200;
    c.horizon = 10.0;
    std::ostringstream log;
    const auto report = verify(c, log, -1.0);
    EXPECT_FALSE(report.all_passed());
    ASSERT_FALSE(report.checks.empty());
    EXPECT_EQ(report.checks[0].name, "coupled path vs closed form");
    EXPECT_FALSE(report.checks[0].passed);
    EXPECT_NE(log.str().find("FAIL  coupled path vs closed form"), std::string::npos);
    EXPECT_TRUE(fs::exists(report.directory / "verify.json"));
}

}  // namespace
}  // namespace stochmom::cli
