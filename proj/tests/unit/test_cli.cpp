#include "mvrec/cli.hpp"
#include "mvrec/io.hpp"
#include "mvrec/simulate.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace mvrec;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "mvrec");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mvrec_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes the three-level hierarchy and a simulated 2-variable panel.
std::pair<fs::path, fs::path> write_fixture(const fs::path& dir, int rows) {
    const auto h = dir / "hierarchy.json";
    io::write_hierarchy_file(h, three_level_tree());
    const auto p = dir / "panel.csv";
    std::ofstream out(p);
    io::write_panel_csv(out, simulate_replicate(builtin_scenario(5), std::uint64_t{2}).panel.slice(0, static_cast<std::size_t>(rows)));
    return {h, p};
}

}  // namespace

TEST_CASE("scenario validation exit codes") {
    const auto r = run({"scenario-info", "--scenario", "10"});
    CHECK(r.code == 2);
    CHECK(r.err == "error: scenario id must be 1..9\n");
    CHECK(run({"scenario-info", "--scenario", "3"}).code == 0);
    CHECK(run({"simulate-study", "--scenario", "1"}).code == 2);  // --out missing
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate-study is reproducible across runs and thread counts") {
    const auto a = scratch("sim_a"), b = scratch("sim_b"), c = scratch("sim_c");
    const std::vector<std::string> base{"simulate-study", "--scenario", "1", "--reps", "4", "--seed", "42"};
    auto with = [&](const fs::path& dir, const std::string& threads) {
        auto args = base;
        args.insert(args.end(), {"--threads", threads, "--out", dir.string()});
        return run(args);
    };
    REQUIRE(with(a, "1").code == 0);
    REQUIRE(with(b, "1").code == 0);
    REQUIRE(with(c, "3").code == 0);
    for (const auto* name : {"summary_relrmse_base.csv", "summary_relrmse_uni.csv", "summary_pct_nonneg_base.csv",
                             "summary_rmsse.csv", "relrmse_series.csv", "summary.md", "manifest.json",
                             "errors_arx_multi-shrinkage.csv"}) {
        CHECK(slurp(a / name) == slurp(b / name));
        CHECK(slurp(a / name) == slurp(c / name));
    }
    CHECK(slurp(a / "summary_relrmse_base.csv").rfind("scenario,model,estimator,horizon,mean_relrmse,negative\n", 0) == 0);
    CHECK(slurp(a / "manifest.json").find("\"spec_hash\"") != std::string::npos);
}

TEST_CASE("reconcile from a panel writes coherent output") {
    const auto dir = scratch("rec");
    const auto [h, p] = write_fixture(dir, 60);
    const auto r = run({"reconcile", "--hierarchy", h.string(), "--panel", p.string(), "--horizons", "6",
                        "--period", "4", "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto coherence = slurp(dir / "out" / "coherence.csv");
    CHECK(coherence.rfind("horizon,max_violation,coherent\n", 0) == 0);
    CHECK(coherence.find("false") == std::string::npos);
    const auto rec = slurp(dir / "out" / "reconciled.csv");
    CHECK(rec.rfind("origin,horizon,node,variable,base,reconciled\n", 0) == 0);
    CHECK(std::count(rec.begin(), rec.end(), '\n') == 1 + 6 * 16);
}

TEST_CASE("reconcile with a bundle and identity W equals the OLS projection") {
    const auto dir = scratch("bundle");
    const Hierarchy h(NodeTree::from_edges({{"T", std::nullopt}, {"L", "T"}, {"R", "T"}}));
    io::write_hierarchy_file(dir / "h.json", h.tree());
    ExternalForecastBundle b;
    b.yhat.resize(1, 3);
    b.yhat << 10, 3, 4;  // OLS: adjust by (10 - 7)/3 = 1 -> (9, 4, 5)
    b.residuals = ResidualPanel::from_rows(Eigen::MatrixXd::Ones(2, 3), {});
    b.origin = 5;
    io::write_bundle(dir / "b", b, h, {"v"});
    const auto r = run({"reconcile", "--hierarchy", (dir / "h.json").string(), "--bundle",
                        (dir / "b" / "manifest.json").string(), "--estimator", "identity", "--out",
                        (dir / "out").string()});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(dir / "out" / "reconciled.csv"));
    std::string line;
    std::getline(in, line);
    std::vector<double> got;
    while (std::getline(in, line)) got.push_back(std::stod(io::split_csv_line(line)[5]));
    REQUIRE(got.size() == 3);
    CHECK(got[0] == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(got[2] == doctest::Approx(5.0).epsilon(1e-12));
    // Two residual rows are too few for shrinkage.
    const auto s = run({"reconcile", "--hierarchy", (dir / "h.json").string(), "--bundle",
                        (dir / "b" / "manifest.json").string(), "--out", (dir / "out2").string()});
    CHECK(s.code == 2);
    CHECK(s.err.rfind("error: ", 0) == 0);
}

TEST_CASE("reconcile rejects incomplete panels and unknown nodes") {
    const auto dir = scratch("bad");
    const auto [h, p] = write_fixture(dir, 30);
    std::string text = slurp(p);
    const auto pos = text.find("\n3,AB,v2,");
    text.erase(pos, text.find('\n', pos + 1) - pos);
    std::ofstream(dir / "gap.csv") << text;
    auto r = run({"reconcile", "--hierarchy", h.string(), "--panel", (dir / "gap.csv").string(), "--out",
                  (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err == "error: missing panel cell (time=3, node=AB, variable=v2)\n");

    std::ofstream(dir / "h2.json") << R"({"nodes":[{"id":"Total"},{"id":"A","parent":"Total"},{"id":"Z","parent":"Total"}]})";
    r = run({"reconcile", "--hierarchy", (dir / "h2.json").string(), "--panel", p.string(), "--out",
             (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("not in hierarchy: AA, AB, B, BA, BB, BC") != std::string::npos);
    CHECK(r.err.find("missing from panel: Z") != std::string::npos);
}

TEST_CASE("evaluate validates origins and writes both tables") {
    const auto dir = scratch("eval");
    const auto [h, p] = write_fixture(dir, 80);
    auto r = run({"evaluate", "--hierarchy", h.string(), "--panel", p.string(), "--origins", "0", "--out",
                  (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err == "error: --origins must be at least 1\n");
    r = run({"evaluate", "--hierarchy", h.string(), "--panel", p.string(), "--origins", "3", "--horizons", "4",
             "--period", "4", "--out", (dir / "o").string()});
    REQUIRE(r.code == 0);
    const auto base = slurp(dir / "o" / "relrmse_base.csv");
    CHECK(base.rfind("model,estimator,variable,series,horizon,relrmse,negative\n", 0) == 0);
    CHECK(std::count(base.begin(), base.end(), '\n') == 1 + 16 * 4);
    CHECK(fs::exists(dir / "o" / "relrmse_uni.csv"));
    CHECK(fs::exists(dir / "o" / "evaluate.md"));
    CHECK(slurp(dir / "o" / "manifest.json").find("\"origins\": [\n    74,\n    75,\n    76\n  ]") != std::string::npos);
}
