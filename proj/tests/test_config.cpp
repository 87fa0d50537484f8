#include "optomech/config.hpp"
#include "optomech/csv.hpp"
#include "optomech/runner.hpp"

#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace optomech;
using namespace optomech::config;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(OPTOMECH_SOURCE_DIR) / "configs";

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("optomech_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kMinimalFig1 = R"({
  "schema": 1,
  "pipeline": "bo-unitary",
  "bo": {"g": 0.01, "lambda": 0.1, "alpha_A": 4, "alpha_B": 1}
})";

const char* kSmallSweep = R"({
  "schema": 1,
  "pipeline": "steady-sweep",
  "drive": {"lambda": 20, "kappa": 0.08, "gamma_m": 0.01, "effective": {"g_a_s": 2.5, "g_b_s": 2.5}},
  "grids": {"delta": [-5, 19, 0.5, 21, 3], "nbar": [0, 10]}
})";

} // namespace

TEST_CASE("minimal fig1 config gets its defaults") {
    const auto c = parse_config(kMinimalFig1);
    CHECK(c.pipeline == Pipeline::BoUnitary);
    REQUIRE(c.bo.has_value());
    CHECK(c.bo->Omega == 1.0);
    CHECK(c.bo->g() == 0.01);
    CHECK(c.bo->lambda == 0.1);
    CHECK(c.bo->alpha_A == std::complex<double>(4.0, 0.0));
    CHECK(c.bo->alpha_B == std::complex<double>(1.0, 0.0));
    CHECK(c.bo->n_thermal == 0.0);
    CHECK(c.bo->cutoff_sigmas == 8.0);
    REQUIRE(c.grids.time.has_value());
    CHECK(c.grids.time->t_max == 100.0);
    CHECK(c.grids.time->n_steps == 1000);
    CHECK(c.mixture == bo::MixtureMode::PerBranch);
    CHECK(c.threads == 0);
    CHECK(c.solver == numerics::Tolerances{});
    CHECK_FALSE(c.output.has_value());
}

TEST_CASE("shipped configs load and carry the caption parameters") {
    const auto f1 = load_config(kConfigs / "fig1.json");
    CHECK(f1.bo->g() == 0.01);
    CHECK(f1.bo->lambda == 0.1);
    CHECK(f1.bo->alpha_A.real() == 4.0);
    CHECK(f1.bo->alpha_B.real() == 1.0);

    const auto f2 = load_config(kConfigs / "fig2.json");
    CHECK(f2.pipeline == Pipeline::BoDissipative);
    CHECK(f2.loss->kappa == 1e-3);
    CHECK(f2.loss->Gamma == 1e-4);
    CHECK(f2.loss->n_bath == 0.0);

    const auto f3 = load_config(kConfigs / "fig3.json");
    CHECK(f3.drive->lambda == 20.0);
    CHECK(f3.drive->kappa == 0.08);
    CHECK(f3.drive->gamma_m == 0.01);
    const auto& eff = std::get<EffectiveDriveSection>(f3.drive->kind);
    CHECK(eff.g_a_s == 2.5);
    CHECK(eff.g_b_s == 2.5);
    const auto deltas = f3.grids.delta->values();
    CHECK(deltas.size() == 201);
    CHECK(deltas.front() == -5.0);
    CHECK(deltas.back() == 5.0);

    CHECK(load_config(kConfigs / "stability.json").pipeline == Pipeline::Stability);
}

TEST_CASE("unknown keys are errors that name the key") {
    const std::string text = R"({"schema": 1, "pipeline": "bo-unitary",
      "bo": {"g": 0.01, "lamda": 0.1, "lambda": 0.1, "alpha_A": 4, "alpha_B": 1}})";
    const auto msg = error_of(text);
    CHECK(msg.find("lamda") != std::string::npos);
    CHECK(msg.find("unknown key") != std::string::npos);
    // A misspelling that leaves the real key absent is still named.
    const auto typo_only = error_of(R"({"schema": 1, "pipeline": "bo-unitary",
      "bo": {"g": 0.01, "lamda": 0.1, "alpha_A": 4, "alpha_B": 1}})");
    CHECK(typo_only.find("lamda") != std::string::npos);
    CHECK(error_of(R"({"schema": 1, "pipeline": "bo-unitary", "extra": 1,
      "bo": {"g": 0.01, "lambda": 0.1, "alpha_A": 4, "alpha_B": 1}})").find("extra") != std::string::npos);
}

TEST_CASE("validation errors name the field") {
    const auto no_delta = error_of(R"({"schema": 1, "pipeline": "steady-sweep",
      "drive": {"lambda": 20, "kappa": 0.08, "gamma_m": 0.01, "effective": {"g_a_s": 2.5, "g_b_s": 2.5}},
      "grids": {"nbar": [0]}})");
    CHECK(no_delta.find("delta") != std::string::npos);

    CHECK(error_of(R"({"schema": 1, "pipeline": "bo-unitary", "bo": {"g": 0.01, "alpha_A": 4, "alpha_B": 1}})")
              .find("lambda") != std::string::npos);
    CHECK(error_of(R"({"schema": 2, "pipeline": "bo-unitary"})").find("schema") != std::string::npos);
    CHECK(error_of(R"({"schema": 1, "pipeline": "fig4"})").find("pipeline") != std::string::npos);
    CHECK(error_of(R"({"schema": 1, "pipeline": "bo-unitary", "mixture": "mean",
      "bo": {"g": 0.01, "lambda": 0.1, "alpha_A": 4, "alpha_B": 1}})").find("mixture") != std::string::npos);
    CHECK(error_of(R"({"schema": 1, "pipeline": "bo-unitary",
      "bo": {"g": 0.01, "lambda": "x", "alpha_A": 4, "alpha_B": 1}})").find("lambda") != std::string::npos);
}

TEST_CASE("parse errors report the line") {
    const std::string text = "{\n  \"schema\": 1,\n  \"pipeline\": \"bo-unitary\",,\n}\n";
    const auto msg = error_of(text);
    CHECK(msg.find("line 3") != std::string::npos);

    TempDir dir;
    const auto p = dir.path / "bad.json";
    std::ofstream(p) << text;
    try {
        load_config(p);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(dir.path / "missing.json"), ConfigError);
}

TEST_CASE("write_config round trips") {
    std::vector<RunConfig> configs;
    for (const char* name : {"fig1.json", "fig2.json", "fig3.json", "stability.json"})
        configs.push_back(load_config(kConfigs / name));
    configs.push_back(parse_config(kMinimalFig1));
    configs.push_back(parse_config(kSmallSweep));
    configs.push_back(parse_config(R"({"schema": 1, "pipeline": "bo-dissipative",
      "bo": {"Omega": 1.5, "physical_coupling": {"cavity_frequency": 1.77e15, "cavity_length": 0.001,
             "mirror_mass": 1e-12, "mechanical_frequency": 6283.2}, "lambda": -0.2,
             "alpha_A": [1.5, -0.5], "alpha_B": 0.25, "n_thermal": 0.1, "cutoff_sigmas": 10},
      "loss": {"kappa": 0.001, "Gamma": 0.0001, "n_bath": 3},
      "grids": {"time": {"t_max": 10, "n_steps": 7}},
      "solver": {"abs_tol": 1e-9, "rel_tol": 1e-8, "max_steps": 1000},
      "mixture": "averaged-state", "threads": 3, "output": "dir/out.csv"})"));
    configs.push_back(parse_config(R"({"schema": 1, "pipeline": "stability",
      "drive": {"lambda": 0.5, "kappa": 1, "gamma_m": 0.01, "bare": {"eta": 3, "g": 0.05}},
      "grids": {"delta": {"start": -1, "stop": 1, "count": 3}}})"));
    for (const auto& c : configs) {
        const auto text = write_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(write_config(back) == text);
    }
}

TEST_CASE("physical coupling is made dimensionless by the mechanical frequency") {
    const auto c = parse_config(R"({"schema": 1, "pipeline": "bo-unitary",
      "bo": {"physical_coupling": {"cavity_frequency": 1.77e15, "cavity_length": 0.001,
             "mirror_mass": 1e-12, "mechanical_frequency": 6283.2}, "lambda": 0.1, "alpha_A": 1, "alpha_B": 0}})");
    CHECK(c.bo->g() == doctest::Approx(bo::coupling_from_physical(1.77e15, 0.001, 1e-12, 6283.2) / 6283.2));
}

TEST_CASE("format_double is shortest round trip") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(0.0) == "0");
    CHECK(csv::format_double(2.5) == "2.5");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = std::pow(10.0, u(rng)) * (k % 2 ? -1.0 : 1.0);
        const auto s = csv::format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
    }
}

TEST_CASE("atomic writer leaves nothing behind on failure") {
    TempDir dir;
    const auto p = dir.path / "x.csv";
    {
        csv::AtomicCsvWriter w(p, "a,b");
        w.write({std::string("1"), std::nullopt});
        CHECK_THROWS(w.write({std::string("1")}));
    }
    CHECK_FALSE(fs::exists(p));
    CHECK(fs::is_empty(dir.path));
    {
        csv::AtomicCsvWriter w(p, "a,b");
        w.write({std::string("1"), std::nullopt});
        w.commit();
    }
    CHECK(read_file(p) == "a,b\n1,\n");
}

TEST_CASE("run: bo-unitary rows, order, header and reruns") {
    TempDir dir;
    auto c = parse_config(kMinimalFig1);
    c.grids.time = TimeGrid{40.0, 20};
    c.grids.n_thermal = Grid{std::vector<double>{0.0, 0.5, 4.0}};
    std::ostringstream log;
    const auto rep = runner::run(c, {dir.path / "a.csv", 1}, log);
    CHECK(rep.exit_code == runner::kExitSuccess);
    CHECK(rep.rows == 21 * 3);
    const auto text = read_file(dir.path / "a.csv");
    const auto ls = lines(text);
    REQUIRE(ls.size() == 1 + 63);
    CHECK(ls[0] == "t,n_thermal,negativity");
    CHECK(ls[0] == runner::kHeaderBoUnitary);
    for (std::size_t r = 0; r < 63; ++r) {
        const auto f = fields(ls[r + 1]);
        REQUIRE(f.size() == 3);
        CHECK(std::stod(f[0]) == doctest::Approx(2.0 * static_cast<double>(r / 3)));
        CHECK(std::stod(f[1]) == std::vector<double>{0.0, 0.5, 4.0}[r % 3]);
        CHECK(std::stod(f[2]) >= 0.0);
    }

    runner::run(c, {dir.path / "b.csv", 3}, log);
    CHECK(read_file(dir.path / "b.csv") == text);
    runner::run(c, {dir.path / "a.csv", 1}, log);
    CHECK(read_file(dir.path / "a.csv") == text);
}

TEST_CASE("run: bo-dissipative header") {
    TempDir dir;
    const auto c = parse_config(R"({"schema": 1, "pipeline": "bo-dissipative",
      "bo": {"g": 0.01, "lambda": 0.1, "alpha_A": 4, "alpha_B": 1},
      "loss": {"kappa": 0.001, "Gamma": 0.0001},
      "grids": {"time": {"t_max": 20, "n_steps": 10}}})");
    std::ostringstream log;
    const auto rep = runner::run(c, {dir.path / "d.csv", {}}, log);
    CHECK(rep.exit_code == 0);
    const auto ls = lines(read_file(dir.path / "d.csv"));
    REQUIRE(ls.size() == 12);
    CHECK(ls[0] == "t,negativity");
    CHECK(fields(ls[1])[0] == "0");
}

TEST_CASE("run: a sweep with unstable points completes with flagged rows") {
    TempDir dir;
    const auto c = parse_config(kSmallSweep);
    std::ostringstream log;
    const auto rep = runner::run(c, {dir.path / "s.csv", 2}, log);
    CHECK(rep.exit_code == runner::kExitPartial);
    CHECK(rep.rows == 10);
    CHECK(rep.flagged == 4);
    const auto ls = lines(read_file(dir.path / "s.csv"));
    REQUIRE(ls.size() == 11);
    CHECK(ls[0] == "delta,nbar,stable,neg_m1m2,neg_m1ca,neg_m1cb");
    std::size_t filled = 0, flagged = 0;
    for (std::size_t r = 1; r < ls.size(); ++r) {
        const auto f = fields(ls[r]);
        REQUIRE(f.size() == 6);
        const double delta = std::stod(f[0]);
        if (delta == 19.0 || delta == 21.0) {
            CHECK(f[2] == "0");
            CHECK(f[3].empty());
            CHECK(f[4].empty());
            CHECK(f[5].empty());
            ++flagged;
        } else {
            CHECK(f[2] == "1");
            for (int k = 3; k < 6; ++k) CHECK(std::stod(f[static_cast<std::size_t>(k)]) >= 0.0);
            ++filled;
        }
    }
    CHECK(filled == 6);
    CHECK(flagged == 4);
    CHECK(log.str().find("unstable") != std::string::npos);
}

TEST_CASE("run: stability report") {
    TempDir dir;
    const auto c = parse_config(R"({"schema": 1, "pipeline": "stability",
      "drive": {"lambda": 20, "kappa": 0.08, "gamma_m": 0.01, "effective": {"g_a_s": 2.5, "g_b_s": 2.5}},
      "grids": {"delta": [-1, 19]}})");
    std::ostringstream log;
    const auto rep = runner::run(c, {dir.path / "st.csv", {}}, log);
    CHECK(rep.exit_code == runner::kExitSuccess);
    const auto ls = lines(read_file(dir.path / "st.csv"));
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "delta,abscissa,stable");
    CHECK(fields(ls[1])[2] == "1");
    CHECK(std::stod(fields(ls[1])[1]) < 0.0);
    CHECK(fields(ls[2])[2] == "0");
    CHECK(std::stod(fields(ls[2])[1]) > 0.0);
}

TEST_CASE("run: fatal errors leave the output untouched") {
    TempDir dir;
    auto c = parse_config(kMinimalFig1);
    c.bo->coupling = 1.0; // every photon branch violates the squeezing bound
    std::ostringstream log;
    CHECK_THROWS(runner::run(c, {dir.path / "f.csv", {}}, log));
    CHECK(fs::is_empty(dir.path));

    auto no_out = parse_config(kMinimalFig1);
    CHECK_THROWS_AS(runner::run(no_out, {}, log), ConfigError);
}
