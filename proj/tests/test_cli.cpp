#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qtk/cli.hpp"

using namespace qtk::cli;

namespace {

std::string tmp_path(const std::string& name) { return "/tmp/qtk_test_cli_" + name; }

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "qtk");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(int(argv.size()), argv.data());
}

std::string error_of(const std::string& sub, const std::string& text) {
    try {
        parse_config(sub, text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parsing") {
    JobConfig c = parse_config("engine-sweep", "N = 12\nwb_over_delta = 0.0625\nseed = 1\n");
    CHECK(c.integer("N") == 12);
    CHECK(c.numbers("wb_over_delta") == std::vector<double>{0.0625});
    CHECK(c.u64("seed") == 1);
    CHECK(std::isinf(c.number("beta_c")));
    CHECK(c.integer("realizations") == 1000);

    // Sections, comments, lists and quoted strings.
    JobConfig s = parse_config("engine-sweep",
                               "# sweep\n[model]\nN = 8\nwb_over_delta = 0.015625, 0.03125\n\n[run]\nseed = 9 \n"
                               "out = \"a,b.csv\"\n; done\n");
    CHECK(s.numbers("wb_over_delta").size() == 2);
    CHECK(s.string("out") == "a,b.csv");

    CHECK(error_of("engine-sweep", "N = 12\nwb_over_delta = 0.0625\n").find("missing required key 'seed'") !=
          std::string::npos);
    std::string e = error_of("engine-sweep", "seed = 1\nN = 12\nwb_over_delta = abc\n");
    CHECK(e.find("line 3") != std::string::npos);
    CHECK(e.find("wb_over_delta") != std::string::npos);
    CHECK(error_of("engine-sweep", "seed = 1\nN = 12\nwb_over_delta = 0.1\ncolour = red\n").find("line 4: unknown key") !=
          std::string::npos);
    CHECK(error_of("engine-sweep", "seed = 1\n[model]\nseed = 2\nN = 12\nwb_over_delta = 0.1\n").find("unknown key") !=
          std::string::npos);
    CHECK(error_of("engine-sweep", "seed = 1\nN = 12\nN = 13\nwb_over_delta = 0.1\n").find("duplicate") !=
          std::string::npos);
    CHECK(error_of("engine-sweep", "seed = -1\nN = 12\nwb_over_delta = 0.1\n").find("line 1") != std::string::npos);
    CHECK(error_of("engine-sweep", "seed = 1\nN 12\n").find("line 2: expected key = value") != std::string::npos);
    CHECK(error_of("engine-sweep", "[model\n").find("line 1") != std::string::npos);
    CHECK_THROWS_AS(parse_config("nope", "seed = 1\n"), ConfigError);

    JobConfig o = parse_config("engine-sweep", "N = 12\nwb_over_delta = 0.1\n", {{"seed", "5"}});
    CHECK(o.u64("seed") == 5);
    CHECK_THROWS_AS(parse_config("engine-sweep", "N = 12\nwb_over_delta = 0.1\n", {{"seed", "x"}}), ConfigError);
}

TEST_CASE("csv and hashing") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1.0 / 0.0) == "inf");
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(to_csv({{"x", "y"}, {{"1", "2"}}}) == "x,y\n1,2\n");
    CHECK_THROWS(to_csv({{"x", "y"}, {{"1"}}}));
    // `printf 'hello\n' | git hash-object --stdin`
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("job outputs") {
    CsvTable sweep = run_job(parse_config("engine-sweep", "seed=1\nN=8\nwb_over_delta=0.0625,0.125\nrealizations=20\n"), 1);
    CHECK(sweep.header == std::vector<std::string>{"wb", "mean_wtot", "se_wtot", "eta", "se_eta"});
    CHECK(sweep.rows.size() == 2);

    CsvTable ot = run_job(parse_config("otoc", "seed=1\nN=4\nt_max=1\nt_step=0.25\n"), 1);
    CHECK(ot.header.size() == 35);
    CHECK(ot.header[3] == "re_A0000");
    CHECK(ot.header[33] == "re_A1111");
    CHECK(ot.rows.size() == 5);
    CHECK(std::stod(ot.rows[0][1]) == doctest::Approx(1.0).epsilon(1e-12));

    CsvTable gs = run_job(parse_config("gapstats", "seed=1\nN=8\nh=20\nrealizations=5\n"), 1);
    CHECK(gs.rows.size() == 5);

    CsvTable br = run_job(parse_config("brownian", "seed=1\nt_max=0.02\nt_step=0.01\nshots=8\ndt=1e-3\n"), 1);
    CHECK(br.rows.size() == 3);
    CHECK(br.header.size() == 38);

    CsvTable na = run_job(parse_config("nats-audit", "seed=1\nN_max=4\nv=0,0,0.8\neta=0.26\nchannels=5\n"), 1);
    CHECK(na.header == std::vector<std::string>{"N", "dim_M", "mean_D", "max_trace_distance", "pinsker_margin",
                                               "worst_F_violation"});
    CHECK(na.rows.size() == 3);

    CsvTable di = run_job(parse_config("engine-diabatic", "seed=1\nN=6\nwb_over_delta=0.25\nsteps=2,4\nrealizations=4\n"
                                                          "repulsion_realizations=200\n"),
                          1);
    CHECK(di.rows.size() == 3);
    CHECK(di.rows[0][0] == "0");

    CHECK_THROWS_AS(run_job(parse_config("otoc", "seed=1\nN=4\nt_max=1\nt_step=0.3\n"), 1), ConfigError);
    CHECK_THROWS_AS(run_job(parse_config("brownian", "seed=1\nt_max=0.02\nt_step=0.01\nintegrator=rk4\n"), 1),
                    ConfigError);
}

TEST_CASE("identical output across thread counts") {
    const std::vector<std::string> configs = {
        "seed=3\nN=8\nwb_over_delta=0.0625\nrealizations=16\n",
        "seed=3\nN=6\nt_max=1\nt_step=0.5\n",
        "seed=3\nN=8\nh=2\nrealizations=6\n",
        "seed=3\nt_max=0.01\nt_step=0.005\nshots=6\ndt=1e-3\n",
        "seed=3\nN_max=4\nv=0,0,0.8\neta=0.26\nchannels=6\n",
        "seed=3\nN=6\nwb_over_delta=0.25\nsteps=1,2\nrealizations=4\nrepulsion_realizations=100\n",
    };
    const std::vector<std::string> subs = {"engine-sweep", "otoc", "gapstats", "brownian", "nats-audit", "engine-diabatic"};
    for (std::size_t k = 0; k < subs.size(); ++k) {
        JobConfig c = parse_config(subs[k], configs[k]);
        std::string one = to_csv(run_job(c, 1)), four = to_csv(run_job(c, 4)), again = to_csv(run_job(c, 4));
        CHECK_MESSAGE(one == four, subs[k]);
        CHECK_MESSAGE(four == again, subs[k]);
    }
}

TEST_CASE("command line") {
    const std::string cfg = tmp_path("sweep.cfg"), out = tmp_path("sweep.csv");
    write(cfg, "seed = 1\nN = 8\nwb_over_delta = 0.0625\nrealizations = 10\n");
    CHECK(run({"engine-sweep", "--config", cfg, "--out", out}) == 0);
    std::string first = read(out);
    CHECK(first.rfind("wb,mean_wtot,se_wtot,eta,se_eta\n", 0) == 0);
    std::string meta = read(out + ".meta.json");
    CHECK(meta.find("\"config_sha1\"") != std::string::npos);
    CHECK(meta.find(git_blob_sha1(first)) != std::string::npos);
    CHECK(run({"engine-sweep", "--config", cfg, "--out", out, "--threads", "3"}) == 0);
    CHECK(read(out) == first);
    CHECK(run({"engine-sweep", "--config", cfg, "--out", out, "--seed", "2"}) == 0);
    CHECK(read(out) != first);

    const std::string bad = tmp_path("bad.cfg");
    write(bad, "seed = 1\nN = 8\nwb_over_delta = abc\n");
    CHECK(run({"engine-sweep", "--config", bad, "--out", out}) == 2);
    CHECK(run({"engine-sweep", "--config", tmp_path("missing.cfg")}) == 2);
    CHECK(run({"engine-sweep"}) == 2);
    // A physically invalid parameter is a configuration error too.
    write(bad, "seed = 1\nN = 7\nwb_over_delta = 0.1\nrealizations = 2\n");
    CHECK(run({"engine-sweep", "--config", bad, "--out", out}) == 2);
    // A target outside the Bloch ball makes the potential solver fail: numerical failure.
    write(bad, "seed = 1\nv = 0.9, 0.9, 0\neta = 0.3\n");
    CHECK(run({"nats-audit", "--config", bad, "--out", out}) == 3);
    for (const auto& p : {cfg, bad, out, out + ".meta.json"}) std::remove(p.c_str());
}
