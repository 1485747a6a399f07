#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

std::string cli_path() {
    const char* p = std::getenv("SHADOW_CLI");
    return p ? p : "";
}

std::string golden_dir() {
    const char* p = std::getenv("SHADOW_GOLDEN_DIR");
    return p ? p : "";
}

int run(const std::string& args) {
    const std::string cmd = "SOURCE_DATE_EPOCH=0 " + cli_path() + " " + args;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/shadow_cli_test_XXXXXX";
        path = mkdtemp(tmpl);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
    if (cli_path().empty()) {
        MESSAGE("SHADOW_CLI not set; skipping");
        return;
    }
    CHECK(run("fit --input nowhere.csv --lower-bound 0 2>/dev/null") == 2);
    CHECK(run("definitely-not-a-command 2>/dev/null") == 2);
    CHECK(run("--help >/dev/null") == 0);
}

TEST_CASE("cli: data errors exit with code 1") {
    if (cli_path().empty()) return;
    CHECK(run("fit --input /nonexistent.csv --lower-bound 0 --upper-bound 10 "
              "2>/dev/null") == 1);

    TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.csv"));
        out << "1.0\n2.0\nbogus\n";
    }
    CHECK(run("fit --input " + tmp.file("bad.csv") +
              " --lower-bound 0 --upper-bound 10 2>/dev/null") == 1);
}

TEST_CASE("cli fit: golden report byte-for-byte") {
    if (cli_path().empty() || golden_dir().empty()) return;
    TempDir tmp;
    const std::string out = tmp.file("report.json");
    const int rc = run("fit --input " + golden_dir() + "/fit_input.csv" +
                       " --lower-bound 1 --upper-bound 1000000 --threshold-quantile 0.95" +
                       " --h-grid 1e6,1e7,1e8 --seed 7 --output " + out);
    REQUIRE(rc == 0);
    CHECK(slurp(out) == slurp(golden_dir() + "/fit_report.json"));
}

TEST_CASE("cli fit: threshold quantile arithmetic on a 1000-row input") {
    if (cli_path().empty() || golden_dir().empty()) return;
    TempDir tmp;
    const std::string out = tmp.file("report.json");
    const int rc = run("fit --input " + golden_dir() + "/fit_input.csv" +
                       " --lower-bound 1 --upper-bound 1000000 --threshold-quantile 0.95" +
                       " --output " + out);
    REQUIRE(rc == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["input"]["n_total"] == 1000);
    CHECK(j["input"]["n_exceedances"] == 50);
}

TEST_CASE("cli report: adds levels to an existing report deterministically") {
    if (cli_path().empty() || golden_dir().empty()) return;
    TempDir tmp;
    const std::string base = tmp.file("base.json");
    REQUIRE(run("fit --input " + golden_dir() + "/fit_input.csv" +
                " --lower-bound 1 --upper-bound 1000000 --output " + base) == 0);
    const std::string aug1 = tmp.file("aug1.json");
    const std::string aug2 = tmp.file("aug2.json");
    REQUIRE(run("report --report " + base +
                " --var-levels 0.5,0.999 --es-levels 0.999 --h-grid 1e6,1e9 --output " +
                aug1) == 0);
    REQUIRE(run("report --report " + base +
                " --var-levels 0.5,0.999 --es-levels 0.999 --h-grid 1e6,1e9 --output " +
                aug2) == 0);
    CHECK(slurp(aug1) == slurp(aug2));

    const auto j = nlohmann::json::parse(slurp(aug1));
    CHECK(j["measures"]["var"].size() == 4);  // 0.5, 0.95, 0.99, 0.999
    // VaR column must be nondecreasing in p after the merge
    double prev = -1.0;
    for (const auto& row : j["measures"]["var"]) {
        CHECK(row["value"].get<double>() >= prev);
        prev = row["value"].get<double>();
    }
}

TEST_CASE("cli compare: single point and h-curve") {
    if (cli_path().empty()) return;
    TempDir tmp;
    const std::string out = tmp.file("compare.csv");
    REQUIRE(run("compare --alpha 0.7 --sigma 1 --lower-bound 0 --upper-bound 100 "
                "--output " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("quantity,value") == 0);
    CHECK(text.find("truncated_mean,") != std::string::npos);
    CHECK(text.find("absorbing_barrier_mean,") != std::string::npos);
    CHECK(text.find("shadow_mean,") != std::string::npos);
    CHECK(text.find("soft_to_truncated_ratio,") != std::string::npos);

    const std::string curve = tmp.file("curve.csv");
    REQUIRE(run("compare --alpha 0.7 --sigma 1 --lower-bound 0 --upper-bound 100 "
                "--h-curve 10,100,1000,10000 --output " + curve) == 0);
    std::istringstream lines(slurp(curve));
    std::string header;
    std::getline(lines, header);
    CHECK(header == "upper_bound,ratio");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("cli simulate: deterministic samples and experiments") {
    if (cli_path().empty()) return;
    TempDir tmp;
    const std::string a = tmp.file("a.csv"), b = tmp.file("b.csv");
    const std::string base = "simulate --alpha 0.5 --sigma 1 --lower-bound 1 "
                             "--upper-bound 1000 --n 500 --seed 12 --output ";
    REQUIRE(run(base + a) == 0);
    REQUIRE(run(base + b) == 0);
    CHECK(slurp(a) == slurp(b));

    // censoring drops rows
    const std::string c = tmp.file("c.csv");
    REQUIRE(run("simulate --alpha 0.5 --sigma 1 --lower-bound 1 --upper-bound 1000 "
                "--n 500 --seed 12 --censor-at 50 --output " + c + " 2>/dev/null") == 0);
    std::istringstream lines(slurp(c));
    std::string line;
    int rows = -1;  // header
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows < 500);
    CHECK(rows > 300);

    const std::string e1 = tmp.file("e1.json"), e2 = tmp.file("e2.json");
    const std::string exp = "simulate --alpha 0.8 --sigma 1 --lower-bound 1 "
                            "--upper-bound 1e6 --threshold 1 --n 20000 --seed 3 "
                            "--censor-at 1e4 --experiment apparent-tail --output ";
    REQUIRE(run(exp + e1) == 0);
    REQUIRE(run(exp + e2) == 0);
    CHECK(slurp(e1) == slurp(e2));
    const auto j = nlohmann::json::parse(slurp(e1));
    CHECK(j["indistinguishable_2se"] == true);

    // bootstrap CI: threads must not change a single byte
    const std::string b1 = tmp.file("b1.json"), b4 = tmp.file("b4.json");
    const std::string boot = "simulate --alpha 1.25 --sigma 2 --lower-bound 1 "
                             "--upper-bound 1e4 --threshold 1 --n 1500 --seed 5 "
                             "--experiment bootstrap-ci --replicates 100 ";
    REQUIRE(run(boot + "--threads 1 --output " + b1) == 0);
    REQUIRE(run(boot + "--threads 4 --output " + b4) == 0);
    CHECK(slurp(b1) == slurp(b4));
}

TEST_CASE("cli diagnose: mean-excess and survival series") {
    if (cli_path().empty() || golden_dir().empty()) return;
    TempDir tmp;
    const std::string out = tmp.file("diag.csv");
    REQUIRE(run("diagnose --input " + golden_dir() + "/fit_input.csv" +
                " --lower-bound 1 --upper-bound 1000000 --output " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("space,threshold_or_y,value,series_tag") == 0);
    CHECK(text.find(",empirical_mean_excess") != std::string::npos);
    CHECK(text.find(",survival_dual") != std::string::npos);
    CHECK(text.find(",survival_naive") != std::string::npos);

    // naive survival stays positive beyond H; dual survival is zero there
    std::istringstream lines(text);
    std::string line;
    bool naive_positive_beyond_h = false, dual_zero_beyond_h = true;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string space, y, value, tag;
        std::getline(fields, space, ',');
        std::getline(fields, y, ',');
        std::getline(fields, value, ',');
        std::getline(fields, tag, ',');
        if (space != "y" || y == "threshold_or_y") continue;
        const double yy = std::strtod(y.c_str(), nullptr);
        const double vv = std::strtod(value.c_str(), nullptr);
        if (yy > 1e6 && tag == "survival_naive" && vv > 0.0) naive_positive_beyond_h = true;
        if (yy >= 1e6 && tag == "survival_dual" && vv != 0.0) dual_zero_beyond_h = false;
    }
    CHECK(naive_positive_beyond_h);
    CHECK(dual_zero_beyond_h);

    std::ofstream empty_file(tmp.file("empty.csv"));
    empty_file.close();
    CHECK(run("diagnose --input " + tmp.file("empty.csv") +
              " --lower-bound 0 --upper-bound 10 2>/dev/null") == 1);
}
