#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspmoment/cli.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/recipe.hpp"

#include <json.hpp>

using namespace cuspmoment;
using cli::RunConfig;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args, const cli::Hooks& hooks = {}) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err, hooks);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cuspmoment-cli-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// The identity with the sign of the y^2 sum flipped.
double tampered_identity(double x, Complex y, double theta, int nu) {
    double t = std::cos(theta);
    std::vector<double> u(static_cast<std::size_t>(nu) + 2);
    u[0] = 1.0;
    u[1] = 2 * t;
    for (std::size_t m = 2; m < u.size(); ++m) u[m] = 2 * t * u[m - 1] - u[m - 2];
    Complex r = x / y, q = y / x;
    double omx2 = 1 - x * x;
    Complex big = std::pow(y, 2 * (nu + 1)) / std::pow(x, 2 * nu);
    Complex b1 = 1.0 - big, b2 = 0.0;
    for (int c = 1; c <= nu; ++c) b1 += omx2 * std::pow(q, 2 * c);
    for (int c = 1; c <= nu; ++c) b2 += y * y * std::pow(q, c - 1) * u[c - 1];
    for (int c = 1; c <= nu; ++c) {
        Complex inner = 0.0;
        for (int m = 0; m < c; ++m) inner += std::pow(r, m) * u[m];
        b2 -= omx2 * std::pow(q, 2 * c) * inner;
    }
    b2 += big * x * x / omx2 * std::pow(r, nu) * u[nu];
    Complex partial = 0.0;
    for (int m = 0; m <= nu; ++m) partial += std::pow(r, m) * u[m];
    b2 += big * partial;
    Complex lhs = std::pow(r, nu) * (b1 + (1.0 - 2.0 * r * t + r * r) * b2);
    Complex rhs = (1.0 - 2.0 * x * y * t + x * x * y * y) * u[nu] / omx2;
    return std::abs(lhs - rhs);
}

}  // namespace

TEST_CASE("shift parsing") {
    auto s = cli::parse_shifts("0.1, 0.05+0.05i,0.08-0.03i,-0.1-2e-3i,0.2i,-i,1e-2");
    REQUIRE(s.size() == 7);
    CHECK(s[0] == Complex(0.1, 0));
    CHECK(s[1] == Complex(0.05, 0.05));
    CHECK(s[2] == Complex(0.08, -0.03));
    CHECK(s[3] == Complex(-0.1, -2e-3));
    CHECK(s[4] == Complex(0, 0.2));
    CHECK(s[5] == Complex(0, -1));
    CHECK(s[6] == Complex(0.01, 0));
    CHECK_THROWS_AS(cli::parse_shifts("0.1,,0.2"), PreconditionError);
    CHECK_THROWS_AS(cli::parse_shifts("abc"), PreconditionError);
    CHECK(cli::parse_shifts(cli::format_shifts(s)) == s);
}

TEST_CASE("config round trip") {
    RunConfig c;
    c.command = "sweep";
    c.k = 24;
    c.l = 6;
    c.x = 1.0 / 3.0 * 1000;
    c.shifts = {{0.1, -0.0}, {1.0 / 7, 2.0 / 3}};
    c.x_grid = {100.5, 1e4 / 3};
    c.k_grid = {20, 40};
    c.x_exponent = 2.2;
    c.policy.epsilon = 0.3;
    c.policy.contour_tol = 1e-11;
    c.policy.threads = 4;
    c.gamma_mode = "power";
    c.exploratory = true;
    c.direct = false;
    c.format = "csv";
    c.out = "/tmp/x.csv";
    c.seed = 18446744073709551615ull;
    c.cache = "/tmp/cache dir";
    auto text = cli::emit_config(c);
    auto back = cli::parse_config(text);
    CHECK(back == c);
    CHECK(cli::emit_config(back) == text);
    CHECK(cli::parse_config(cli::emit_config(RunConfig{})) == RunConfig{});
    CHECK_THROWS_AS(cli::parse_config("[params]\nbogus = 1\n"), PreconditionError);
    CHECK_THROWS_AS(cli::parse_config("k = 1\n"), PreconditionError);
    CHECK_THROWS_AS(cli::parse_config("[params]\nk = twelve\n"), PreconditionError);
}

TEST_CASE("exit codes") {
    auto dir = scratch("codes");
    auto cache = dir.string();
    auto ok = run({"eigensystems", "--k", "12", "--n", "1000", "--cache", cache});
    CHECK(ok.code == 0);
    auto j = nlohmann::json::parse(ok.out);
    CHECK(j["dim"] == 1);
    CHECK(std::filesystem::exists(dir / "eigensystems_k12_N1000.txt"));
    auto empty = run({"eigensystems", "--k", "14", "--n", "10", "--cache", cache});
    CHECK(empty.code == 0);
    CHECK(empty.err.find("warning") != std::string::npos);
    CHECK(run({"eigensystems", "--k", "13", "--n", "10", "--cache", cache}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"compare", "--k", "twelve"}).code == 2);
    auto missing = run({"compare", "--k", "24", "--x", "50", "--cache", cache});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("eigensystems --k 24") != std::string::npos);
    auto bad = run({"gl", "--l", "1", "--shifts", "0.25,-0.25", "--cache", cache});
    CHECK(bad.code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("small commands") {
    auto k = run({"kloosterman", "--m", "1", "--n", "1", "--c", "7"});
    REQUIRE(k.code == 0);
    CHECK(std::abs(nlohmann::json::parse(k.out)["value"].get<double>() - 2.0489173395223053) < 1e-13);
    auto g = run({"gl", "--l", "1", "--shifts", "0.1,0.15", "--prime-cutoff", "200"});
    REQUIRE(g.code == 0);
    auto v = nlohmann::json::parse(g.out)["value"];
    CHECK(std::isfinite(v[0].get<double>()));
    CHECK(v[0].get<double>() > 1.0);
}

TEST_CASE("identity check command") {
    auto a = run({"identity-check", "--samples", "200", "--seed", "7"});
    CHECK(a.code == 0);
    auto b = run({"identity-check", "--samples", "200", "--seed", "7"});
    CHECK(a.out == b.out);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["identity"]["residuals"].size() == 200);
    CHECK(j["pass"] == true);
    auto c = run({"identity-check", "--samples", "200", "--seed", "8"});
    CHECK(c.out != a.out);
    cli::Hooks hooks;
    hooks.identity = tampered_identity;
    auto t = run({"identity-check", "--samples", "50"}, hooks);
    CHECK(t.code == 1);
    CHECK(nlohmann::json::parse(t.out)["pass"] == false);
}

TEST_CASE("compare and sweep output") {
    auto dir = scratch("compare");
    auto cache = dir.string();
    REQUIRE(run({"eigensystems", "--k", "12", "--n", "100", "--cache", cache}).code == 0);
    std::vector<std::string> args{"compare", "--k", "12", "--l", "1", "--x", "40", "--shifts", "0.1",
                                  "--prime-cutoff", "100", "--cache", cache};
    auto a = run(args);
    REQUIRE(a.code == 0);
    auto b = run(args);
    CHECK(a.out == b.out);
    auto j = nlohmann::json::parse(a.out);
    for (const char* key : {"config", "params", "lhs_direct", "lhs_petersson", "rhs", "residuals", "tails"})
        CHECK(j.contains(key));
    CHECK(j["config"]["params"]["X"] == "40");
    CHECK(j["config"]["policy"]["prime_cutoff"] == "100");
    CHECK(j["rhs"]["zero_swap"]["value"].size() == 2);

    // config file plus overriding flag
    auto cfg_path = dir / "run.cfg";
    {
        RunConfig c;
        c.command = "sweep";
        c.k = 12;
        c.x_grid = {20, 30, 40};
        c.policy.prime_cutoff = 100;
        c.format = "csv";
        c.cache = cache;
        std::ofstream(cfg_path) << cli::emit_config(c);
    }
    auto s = run({"sweep", "--config", cfg_path.string(), "--l", "2"});
    REQUIRE(s.code == 0);
    std::istringstream lines(s.out);
    int rows = 0, comments = 0;
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("#", 0) == 0) {
            ++comments;
            if (line == "# l = 2") ++comments;
        } else if (line.rfind("k,", 0) != 0 && !line.empty()) {
            ++rows;
            CHECK(line.rfind("12,2,", 0) == 0);
        }
    }
    CHECK(rows == 3);
    CHECK(comments > 10);

    auto out = dir / "report.json";
    REQUIRE(run({"compare", "--k", "12", "--x", "20", "--no-direct", "--prime-cutoff", "100", "--out", out.string()}).code == 0);
    CHECK(nlohmann::json::parse(std::ifstream(out))["lhs_direct"].is_null());
    std::filesystem::remove_all(dir);
}
