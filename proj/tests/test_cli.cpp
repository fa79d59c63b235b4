#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "basalt_cli/app.hpp"
#include "basalt_cli/support.hpp"
#include "basalt/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "basalt-lab");
    std::ostringstream out;
    std::ostringstream err;
    const int code = basalt::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

/// Column `name` of a CSV text, one entry per data row.
std::vector<std::string> column(const std::string& csv, const std::string& name) {
    const auto ls = lines(csv);
    const auto head = fields(ls.at(0));
    const auto at = static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    std::vector<std::string> out;
    for (std::size_t i = 1; i < ls.size(); ++i) out.push_back(fields(ls[i]).at(at));
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("basalt-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

const std::vector<std::string> kSmallSim{"--n", "60", "--v", "10", "--ticks", "20", "--jobs", "1"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("number formatting") {
    using basalt::cli::format_number;
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(0.1050277) == "0.105028");
    CHECK(format_number(467.10526) == "467.105");
    CHECK(format_number(5.88e-11) == "5.88e-11");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(basalt::cli::csv_field("a,b") == "\"a,b\"");
    CHECK(basalt::cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(basalt::cli::parse_seeds("1..3,7") == std::vector<std::uint64_t>{1, 2, 3, 7});
    CHECK_THROWS_AS(basalt::cli::parse_seeds("3..1"), basalt::cli::UsageError);
}

TEST_CASE("analyze equilibrium") {
    const Result r = run({"analyze", "equilibrium", "--f", "0.1", "--n", "1000", "--v", "100", "--rho", "1"});
    REQUIRE(r.code == 0);
    CHECK(column(r.out, "B1") == std::vector<std::string>{"0.105028"});
    CHECK(column(r.out, "B2") == std::vector<std::string>{"0.994972"});
    const Result grid = run({"analyze", "equilibrium", "--f", "0.1,0.2", "--v", "50,100,200"});
    REQUIRE(grid.code == 0);
    CHECK(lines(grid.out).size() == 7);
}

TEST_CASE("analyze isolation and deltac") {
    const Result join = run({"analyze", "isolation", "--join", "--f0", "0.5", "--bootstrap", "250", "--f", "0.1", "--n",
                             "10000", "--v", "200"});
    REQUIRE(join.code == 0);
    CHECK(column(join.out, "probability") == std::vector<std::string>{"5.8816e-11"});
    const Result reset = run({"analyze", "isolation", "--reset", "--c", "585", "--f", "0.1", "--n", "10000", "--v",
                              "100", "--k", "50"});
    REQUIRE(reset.code == 0);
    CHECK(column(reset.out, "probability") == std::vector<std::string>{"9.96636e-11"});
    CHECK(run({"analyze", "isolation", "--join", "--reset"}).code == 2);
    const Result dc = run({"analyze", "deltac", "--c0", "125", "--n", "10000", "--f", "0.1", "--v", "100", "--k", "50"});
    REQUIRE(dc.code == 0);
    CHECK(column(dc.out, "delta_c") == std::vector<std::string>{"467.105"});
}

TEST_CASE("analyze ode") {
    const Result r = run({"analyze", "ode", "--f", "0.1", "--n", "10000", "--v", "160", "--t-end", "200", "--stride",
                          "1000"});
    REQUIRE(r.code == 0);
    basalt::TheoryParams tp;
    tp.f = 0.1;
    tp.n = 10000;
    tp.v = 160;
    const auto traj = basalt::ode_trajectory(tp, 0.9 * 160, 200, 0.01, 1000);
    CHECK(column(r.out, "B").size() == traj.size());
    CHECK(column(r.out, "B").back() == basalt::cli::format_number(traj.back().B));
    CHECK(run({"analyze", "ode", "--c0", "1e9"}).code == 2);
}

TEST_CASE("analyze power and table2 on the bundled dataset") {
    if (!fs::exists(BASALT_TEST_DATASET)) {
        MESSAGE("dataset not extracted; skipping");
        return;
    }
    const Result p = run({"analyze", "power", "--uniform", "--dataset", BASALT_TEST_DATASET, "--honest", "1000"});
    REQUIRE(p.code == 0);
    const double q = std::stod(column(p.out, "attacker_addresses").at(0));
    CHECK(column(p.out, "power").at(0) == basalt::cli::format_number(q / (q + 1000)));

    const Result t = run({"analyze", "table2", "--dataset", BASALT_TEST_DATASET, "--honest", "100,1000,10000"});
    REQUIRE(t.code == 0);
    const auto ls = lines(t.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "ranking,label,Q=100,Q=1000,Q=10000");
    for (std::size_t i = 1; i < ls.size(); ++i) CHECK(fields(ls[i]).size() == 5);
    CHECK(run({"analyze", "table2", "--dataset", BASALT_TEST_DATASET, "--honest", "100,1000,10000"}).out == t.out);
}

TEST_CASE("data errors exit with 3 and name the row") {
    TempDir dir;
    CHECK(run({"analyze", "power", "--dataset", (dir.path / "missing.csv").string()}).code == 3);
    std::ofstream(dir.path / "bad.csv") << "network,asn,active_count\n10.0.0.0/24,1,5\n10.0.1.0/24,one,5\n";
    const Result bad = run({"analyze", "table2", "--dataset", (dir.path / "bad.csv").string()});
    CHECK(bad.code == 3);
    CHECK(bad.err.find("row 3") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"simulate", "--no-such-flag"}).code == 2);
    CHECK(run({"simulate", "--algo", "cyclon"}).code == 2);
    CHECK(run(concat({"simulate", "--seeds", "5..1"}, kSmallSim)).code == 2);
    CHECK(run(concat({"simulate", "--seeds", "1..3", "--max-runs", "2"}, kSmallSim)).code == 2);
    const Result k = run(concat({"simulate", "--k", "11"}, kSmallSim));
    CHECK(k.code == 2);
    CHECK(k.err.find("k") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).code == 0);
}

TEST_CASE("simulate writes one file per run plus summaries") {
    TempDir dir;
    const auto out = (dir.path / "runs").string();
    const Result r = run(concat({"simulate", "--f", "0,0.2", "--seeds", "1..3", "--out", out}, kSmallSim));
    REQUIRE(r.code == 0);
    const std::string summary = slurp(fs::path(out) / "summary.csv");
    CHECK(lines(summary).size() == 1 + 2 * 3);
    CHECK(lines(slurp(fs::path(out) / "aggregate.csv")).size() == 1 + 2);
    int run_files = 0;
    for (const auto& e : fs::directory_iterator(out)) run_files += e.path().filename().string().rfind("basalt_", 0) == 0;
    CHECK(run_files == 6);

    const std::string zero = slurp(fs::path(out) / "basalt_n60_f0_v10_rho1_k5_F10_s2.csv");
    CHECK(lines(zero).at(0) ==
          "tick,byz_sample_fraction,byz_view_fraction,isolated_count,clustering,mean_path,indegree_spread,c_mean");
    for (const auto& col : {"byz_sample_fraction", "byz_view_fraction", "isolated_count"}) {
        for (const auto& x : column(zero, col)) CHECK(x == "0");
    }

    // Reruns, with any worker count, are byte-identical.
    const auto again = (dir.path / "again").string();
    REQUIRE(run({"simulate", "--f", "0,0.2", "--seeds", "1..3", "--out", again, "--n", "60", "--v", "10", "--ticks", "20",
                 "--jobs", "3"})
                .code == 0);
    for (const auto& e : fs::directory_iterator(out)) {
        CHECK(slurp(e.path()) == slurp(fs::path(again) / e.path().filename()));
    }
}

TEST_CASE("config file values yield to flags") {
    TempDir dir;
    const auto cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({"simulate": {"n": 50, "ticks": 10, "seeds": "4", "v": 10}})";
    const auto out = (dir.path / "o").string();
    const Result r = run({"--config", cfg.string(), "simulate", "--ticks", "15", "--out", out});
    REQUIRE(r.code == 0);
    CHECK(column(slurp(fs::path(out) / "summary.csv"), "n") == std::vector<std::string>{"50"});
    const std::string file = slurp(fs::path(out) / "basalt_n50_f0.1_v10_rho1_k5_F10_s4.csv");
    CHECK(column(file, "tick").back() == "15");
}

TEST_CASE("sweeps") {
    const Result fig3 = run(concat({"sweep", "fig3", "--vary", "f", "--values", "0,0.1", "--seeds", "1..2", "--algo",
                                    "basalt,brahms"},
                                   kSmallSim));
    REQUIRE(fig3.code == 0);
    CHECK(lines(fig3.out).size() == 1 + 2 * 2);
    CHECK(column(fig3.out, "algo") == std::vector<std::string>{"basalt", "brahms", "basalt", "brahms"});
    CHECK(run(concat({"sweep", "fig3", "--vary", "tau"}, kSmallSim)).code == 2);
    CHECK(run(concat({"sweep", "fig3", "--vary", "f", "--values", "0.1", "--n", "60,80"}, kSmallSim)).code == 2);

    const Result conv = run(concat({"sweep", "convergence", "--f", "0.1", "--seeds", "1"}, kSmallSim));
    REQUIRE(conv.code == 0);
    CHECK(lines(conv.out).size() == 3);

    const Result rate = run({"sweep", "maxrate", "--n", "60", "--ticks", "20", "--views", "10", "--rates", "0.5,1",
                             "--seeds", "1", "--jobs", "1"});
    REQUIRE(rate.code == 0);
    CHECK(lines(rate.out).size() == 1 + 2 * 2);
}

} // TEST_SUITE
