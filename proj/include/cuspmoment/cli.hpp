#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cuspmoment/policy.hpp"

namespace cuspmoment::cli {

// Every setting of a run. Emitted as sectioned key = value text; parsing
// the emitted text reproduces the same config.
struct RunConfig {
    std::string command = "compare";

    int k = 12;
    std::uint64_t l = 1;
    double x = 100.0;
    std::vector<std::complex<double>> shifts{{0.1, 0.0}};
    bool confluent = false;
    // eigensystem bound, or the second Kloosterman argument
    std::uint64_t n = 1000;
    std::int64_t m = 1;
    std::uint64_t c = 1;
    std::vector<double> x_grid;
    std::vector<int> k_grid;
    // sweep over k_grid with X = k^x_exponent when positive
    double x_exponent = 0.0;

    TruncationPolicy policy;

    std::string gamma_mode = "exact";
    bool exploratory = false;
    bool direct = true;

    std::string format = "json";
    std::string out = "-";
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000;
    // eigensystem store; empty means $CUSPMOMENT_CACHE, then ./cuspmoment-cache
    std::string cache;

    bool operator==(const RunConfig&) const = default;
};

std::string emit_config(const RunConfig& config);
RunConfig parse_config(std::string_view text);
// Applies one "section.key" = value setting; throws PreconditionError on
// unknown keys or malformed values.
void set_value(RunConfig& config, std::string_view key, std::string_view value);

std::vector<std::complex<double>> parse_shifts(std::string_view text);
std::string format_shifts(const std::vector<std::complex<double>>& shifts);

struct Hooks {
    // replaces verify_one_swap_identity in identity-check
    std::function<double(double, std::complex<double>, double, int)> identity;
};

// Runs one command line (args excludes the program name). Returns the exit
// code: 0 ok, 1 property-check failure, 2 usage or precondition, 3 numeric.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});

}  // namespace cuspmoment::cli
