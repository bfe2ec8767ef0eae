#include "cuspmoment/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "cuspmoment/arith.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/localfactors.hpp"
#include "cuspmoment/modforms.hpp"
#include "cuspmoment/moments.hpp"
#include "cuspmoment/qexpansion.hpp"
#include "cuspmoment/recipe.hpp"

namespace cuspmoment::cli {

namespace {

using Entry = std::tuple<std::string, std::string, std::string>;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    std::string s = trim(text);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw PreconditionError("bad value for " + std::string(key) + ": '" + s + "'");
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    std::string s = trim(text);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw PreconditionError("bad boolean for " + std::string(key) + ": '" + s + "'");
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
    std::vector<T> out;
    std::string s = trim(text);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto comma = s.find(',', start);
        out.push_back(parse_number<T>(key, std::string_view(s).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += fmt17(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

std::vector<Entry> entries(const RunConfig& c) {
    const auto& p = c.policy;
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"run", "command", c.command},
        {"params", "k", std::to_string(c.k)},
        {"params", "l", std::to_string(c.l)},
        {"params", "X", fmt17(c.x)},
        {"params", "shifts", format_shifts(c.shifts)},
        {"params", "confluent", b(c.confluent)},
        {"params", "n", std::to_string(c.n)},
        {"params", "m", std::to_string(c.m)},
        {"params", "c", std::to_string(c.c)},
        {"params", "x_grid", join(c.x_grid)},
        {"params", "k_grid", join(c.k_grid)},
        {"params", "x_exponent", fmt17(c.x_exponent)},
        {"policy", "prime_cutoff", std::to_string(p.prime_cutoff)},
        {"policy", "quadrature_nodes", std::to_string(p.quadrature_nodes)},
        {"policy", "small_prime_nodes", std::to_string(p.small_prime_nodes)},
        {"policy", "epsilon", fmt17(p.epsilon)},
        {"policy", "contour_height", fmt17(p.contour_height)},
        {"policy", "contour_tol", fmt17(p.contour_tol)},
        {"policy", "precision_bits", std::to_string(p.precision_bits)},
        {"policy", "kloosterman_tol", fmt17(p.kloosterman_tol)},
        {"policy", "threads", std::to_string(p.threads)},
        {"recipe", "gamma_mode", c.gamma_mode},
        {"recipe", "exploratory", b(c.exploratory)},
        {"recipe", "direct", b(c.direct)},
        {"output", "format", c.format},
        {"output", "out", c.out},
        {"output", "seed", std::to_string(c.seed)},
        {"output", "samples", std::to_string(c.samples)},
        {"output", "cache", c.cache},
    };
}

nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [section, key, value] : entries(c)) j[section][key] = value;
    return j;
}

std::filesystem::path cache_dir(const RunConfig& c) {
    if (!c.cache.empty()) return c.cache;
    if (const char* env = std::getenv("CUSPMOMENT_CACHE"); env && *env) return env;
    return "cuspmoment-cache";
}

ShiftSet shift_set(const RunConfig& c) { return ShiftSet(c.shifts, c.confluent); }

RecipeOptions recipe_options(const RunConfig& c) {
    RecipeOptions o;
    o.mode = c.gamma_mode == "power" ? SwapMode::power : SwapMode::exact_gamma;
    o.exploratory = c.exploratory;
    return o;
}

std::vector<Eigensystem> load_systems(const RunConfig& c, int k, std::uint64_t need) {
    if (cusp_dimension(k) == 0) return {};
    auto dir = cache_dir(c);
    auto found = find_store(dir, k, need);
    if (!found)
        throw PreconditionError("no eigensystem store for k = " + std::to_string(k) + " with N >= " +
                                std::to_string(need) + " in " + dir.string() +
                                "; run: cuspmoment eigensystems --k " + std::to_string(k) +
                                " --n " + std::to_string(need));
    return *found;
}

class Output {
public:
    explicit Output(const RunConfig& c, std::ostream& fallback) : stream_(&fallback) {
        if (c.out != "-") {
            file_.open(c.out);
            if (!file_) throw PreconditionError("cannot open output file " + c.out);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

void write_json(const RunConfig& c, std::ostream& out, const nlohmann::ordered_json& body) {
    nlohmann::ordered_json j;
    j["config"] = config_json(c);
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    Output o(c, out);
    *o << dump_json(j) << '\n';
}

void write_csv(const RunConfig& c, std::ostream& out, const std::vector<std::string>& rows) {
    Output o(c, out);
    std::istringstream cfg(emit_config(c));
    for (std::string line; std::getline(cfg, line);) *o << "# " << line << '\n';
    *o << report_csv_header() << '\n';
    for (const auto& r : rows) *o << r << '\n';
}

int cmd_eigensystems(const RunConfig& c, std::ostream& out, std::ostream& err) {
    auto systems = eigensystems(c.k, c.n, c.policy.precision_bits);
    if (systems.empty())
        err << "warning: the cusp space of weight " << c.k << " is zero; writing an empty store\n";
    else
        harmonic_weights(c.k, systems, c.policy);
    auto dir = cache_dir(c);
    write_store(dir, c.k, c.n, systems);
    nlohmann::ordered_json body;
    body["path"] = store_path(dir, c.k, c.n).string();
    body["dim"] = systems.size();
    body["harmonic_weights"] = nlohmann::ordered_json::array();
    body["lambda_2"] = nlohmann::ordered_json::array();
    for (const auto& s : systems) {
        body["harmonic_weights"].push_back(s.harmonic_weight);
        body["lambda_2"].push_back(s.lambda(2));
    }
    write_json(c, out, body);
    return 0;
}

int cmd_kloosterman(const RunConfig& c, std::ostream& out) {
    if (c.c == 0) throw PreconditionError("kloosterman: c must be positive");
    nlohmann::ordered_json body;
    body["m"] = c.m;
    body["n"] = c.n;
    body["c"] = c.c;
    body["value"] = kloosterman(c.m, static_cast<std::int64_t>(c.n), c.c);
    write_json(c, out, body);
    return 0;
}

int cmd_gl(const RunConfig& c, std::ostream& out) {
    auto g = g_l(c.l, shift_set(c), c.policy);
    nlohmann::ordered_json body;
    body["value"] = complex_json(g.value);
    body["tail"] = g.tail;
    body["decay"] = g.decay;
    write_json(c, out, body);
    return 0;
}

int cmd_moment(const RunConfig& c, std::ostream& out) {
    auto a = shift_set(c);
    auto psi = SmoothWeight::bump();
    nlohmann::ordered_json body;
    if (c.direct) {
        auto systems = load_systems(c, c.k, std::max(last_term(c.x), c.l));
        body["lhs_direct"] = complex_json(lhs_direct(c.l, c.x, a, c.k, psi, systems));
    }
    auto p = lhs_petersson(c.l, c.x, a, c.k, psi, c.policy);
    body["lhs_petersson"] = {{"value", complex_json(p.value)},
                             {"diagonal", complex_json(p.diagonal)},
                             {"kloosterman", complex_json(p.kloosterman)},
                             {"terms", p.terms},
                             {"max_cutoff", p.max_cutoff}};
    body["tails"] = {{"c_truncation", p.c_tail}};
    write_json(c, out, body);
    return 0;
}

MomentReport run_compare(const RunConfig& c, int k, double x) {
    auto psi = SmoothWeight::bump();
    std::vector<Eigensystem> systems;
    if (c.direct) systems = load_systems(c, k, std::max(last_term(x), c.l));
    return compare(c.l, x, shift_set(c), k, psi, c.policy, c.direct ? &systems : nullptr,
                   recipe_options(c));
}

int cmd_compare(const RunConfig& c, std::ostream& out) {
    auto report = run_compare(c, c.k, c.x);
    if (c.format == "csv")
        write_csv(c, out, {report_csv_row(report)});
    else
        write_json(c, out, report_json(report));
    return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    std::vector<std::pair<int, double>> points;
    if (c.x_exponent > 0.0) {
        if (c.k_grid.empty()) throw PreconditionError("sweep: x_exponent needs a k grid");
        for (int k : c.k_grid) points.emplace_back(k, std::pow(static_cast<double>(k), c.x_exponent));
    } else {
        if (c.x_grid.empty()) throw PreconditionError("sweep: empty X grid");
        for (double x : c.x_grid) points.emplace_back(c.k, x);
    }
    std::vector<MomentReport> reports;
    for (auto [k, x] : points) reports.push_back(run_compare(c, k, x));
    if (c.format == "csv") {
        std::vector<std::string> rows;
        for (const auto& r : reports) rows.push_back(report_csv_row(r));
        write_csv(c, out, rows);
    } else {
        nlohmann::ordered_json body;
        body["reports"] = nlohmann::ordered_json::array();
        for (const auto& r : reports) body["reports"].push_back(report_json(r));
        write_json(c, out, body);
    }
    return 0;
}

int cmd_identity(const RunConfig& c, std::ostream& out, const Hooks& hooks) {
    constexpr double threshold = 1e-8;
    auto identity = hooks.identity ? hooks.identity : verify_one_swap_identity;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ux(0.05, 0.95), urho(0.55, 1.45), uphi(-0.6, 0.6),
        utheta(0.05, std::numbers::pi - 0.05);
    std::uniform_int_distribution<int> unu(0, 12);

    nlohmann::ordered_json residuals = nlohmann::ordered_json::array();
    double worst = 0.0;
    for (std::uint64_t s = 0; s < c.samples;) {
        double x = ux(rng);
        Complex y = std::polar(urho(rng), uphi(rng));
        double theta = utheta(rng);
        int nu = unu(rng);
        double res;
        try {
            res = identity(x, y, theta, nu);
        } catch (const PreconditionError&) {
            continue;  // near-singular draw
        }
        residuals.push_back(res);
        worst = std::max(worst, res);
        ++s;
    }

    double tele = 0.0, bdev = 0.0;
    std::size_t tele_cases = 0, b_cases = 0;
    for (int s = 0; s < 20; ++s) {
        double x = ux(rng);
        Complex y = std::polar(urho(rng), uphi(rng));
        double theta = utheta(rng);
        for (int nu = 2; nu <= 12; ++nu)
            for (int i = 0; i < nu - 1; ++i, ++tele_cases)
                tele = std::max(tele, telescoping_check(nu, i, x, y, theta));
        auto closed = b_coefficients_closed_form(x, y);
        for (int nu = 3; nu <= 12; ++nu, ++b_cases) {
            auto b = b_coefficients(nu, x, y);
            bdev = std::max({bdev, std::abs(b.b_next - closed.b_next), std::abs(b.b_nu - closed.b_nu),
                             std::abs(b.b_prev - closed.b_prev), std::abs(b.b1 - closed.b1),
                             std::abs(b.b0 - closed.b0)});
        }
    }
    bool pass = worst <= threshold && tele <= threshold && bdev <= threshold;

    nlohmann::ordered_json body;
    body["identity"] = {{"samples", c.samples}, {"max_residual", worst}, {"residuals", residuals}};
    body["telescoping"] = {{"cases", tele_cases}, {"max_residual", tele}};
    body["b_coefficients"] = {{"cases", b_cases}, {"max_deviation", bdev}};
    body["threshold"] = threshold;
    body["pass"] = pass;
    write_json(c, out, body);
    return pass ? 0 : 1;
}

// Flags map onto config keys so files and command lines share one parser.
struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

constexpr Flag value_flags[] = {
    {"--k", "params.k", "weight"},
    {"--l", "params.l", "twist l"},
    {"--x", "params.X", "length X"},
    {"--shifts", "params.shifts", "shifts \"a+bi,c+di,...\""},
    {"--n", "params.n", "eigenvalue bound, or Kloosterman n"},
    {"--m", "params.m", "Kloosterman m"},
    {"--c", "params.c", "Kloosterman modulus"},
    {"--x-grid", "params.x_grid", "sweep X values"},
    {"--k-grid", "params.k_grid", "sweep k values"},
    {"--x-exponent", "params.x_exponent", "sweep X = k^e"},
    {"--prime-cutoff", "policy.prime_cutoff", "Euler product cutoff P"},
    {"--quadrature-nodes", "policy.quadrature_nodes", "initial Gauss-Chebyshev order"},
    {"--small-prime-nodes", "policy.small_prime_nodes", "order floor for p <= 97"},
    {"--epsilon", "policy.epsilon", "contour abscissa"},
    {"--contour-height", "policy.contour_height", "maximal contour height"},
    {"--contour-tol", "policy.contour_tol", "contour tolerance"},
    {"--precision-bits", "policy.precision_bits", "eigen precision"},
    {"--kloosterman-tol", "policy.kloosterman_tol", "Kloosterman tail tolerance"},
    {"--threads", "policy.threads", "worker threads"},
    {"--gamma-mode", "recipe.gamma_mode", "exact or power"},
    {"--format", "output.format", "json or csv"},
    {"--out", "output.out", "output path, - for stdout"},
    {"--seed", "output.seed", "random seed"},
    {"--samples", "output.samples", "identity samples"},
    {"--cache", "output.cache", "eigensystem store directory"},
};

}  // namespace

std::vector<std::complex<double>> parse_shifts(std::string_view text) {
    std::vector<std::complex<double>> out;
    std::string s;
    for (char ch : text)
        if (ch != ' ' && ch != '\t') s += ch;
    if (s.empty()) throw PreconditionError("empty shift list");
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item.empty()) throw PreconditionError("empty shift in list");
        double re = 0.0, im = 0.0;
        if (item.back() == 'i') {
            item.pop_back();
            std::size_t split = std::string::npos;
            for (std::size_t i = item.size(); i-- > 1;)
                if ((item[i] == '+' || item[i] == '-') && item[i - 1] != 'e' && item[i - 1] != 'E') {
                    split = i;
                    break;
                }
            if (split == std::string::npos) {
                im = item.empty() || item == "+" ? 1.0 : item == "-" ? -1.0 : parse_number<double>("shift", item);
            } else {
                re = parse_number<double>("shift", item.substr(0, split));
                std::string ip = item.substr(split);
                if (ip[0] == '+') ip.erase(0, 1);
                im = ip.empty() ? 1.0 : ip == "-" ? -1.0 : parse_number<double>("shift", ip);
            }
        } else {
            re = parse_number<double>("shift", item);
        }
        out.emplace_back(re, im);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_shifts(const std::vector<std::complex<double>>& shifts) {
    std::string out;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        if (i) out += ',';
        out += fmt17(shifts[i].real());
        out += std::signbit(shifts[i].imag()) ? "" : "+";
        out += fmt17(shifts[i].imag());
        out += 'i';
    }
    return out;
}

void set_value(RunConfig& c, std::string_view key, std::string_view raw) {
    std::string v = trim(raw);
    auto& p = c.policy;
    if (key == "run.command") c.command = v;
    else if (key == "params.k") c.k = parse_number<int>(key, v);
    else if (key == "params.l") c.l = parse_number<std::uint64_t>(key, v);
    else if (key == "params.X") c.x = parse_number<double>(key, v);
    else if (key == "params.shifts") c.shifts = parse_shifts(v);
    else if (key == "params.confluent") c.confluent = parse_bool(key, v);
    else if (key == "params.n") c.n = parse_number<std::uint64_t>(key, v);
    else if (key == "params.m") c.m = parse_number<std::int64_t>(key, v);
    else if (key == "params.c") c.c = parse_number<std::uint64_t>(key, v);
    else if (key == "params.x_grid") c.x_grid = parse_list<double>(key, v);
    else if (key == "params.k_grid") c.k_grid = parse_list<int>(key, v);
    else if (key == "params.x_exponent") c.x_exponent = parse_number<double>(key, v);
    else if (key == "policy.prime_cutoff") p.prime_cutoff = parse_number<std::uint64_t>(key, v);
    else if (key == "policy.quadrature_nodes") p.quadrature_nodes = parse_number<int>(key, v);
    else if (key == "policy.small_prime_nodes") p.small_prime_nodes = parse_number<int>(key, v);
    else if (key == "policy.epsilon") p.epsilon = parse_number<double>(key, v);
    else if (key == "policy.contour_height") p.contour_height = parse_number<double>(key, v);
    else if (key == "policy.contour_tol") p.contour_tol = parse_number<double>(key, v);
    else if (key == "policy.precision_bits") p.precision_bits = parse_number<int>(key, v);
    else if (key == "policy.kloosterman_tol") p.kloosterman_tol = parse_number<double>(key, v);
    else if (key == "policy.threads") p.threads = parse_number<unsigned>(key, v);
    else if (key == "recipe.gamma_mode") {
        if (v != "exact" && v != "power") throw PreconditionError("gamma_mode must be exact or power");
        c.gamma_mode = v;
    } else if (key == "recipe.exploratory") c.exploratory = parse_bool(key, v);
    else if (key == "recipe.direct") c.direct = parse_bool(key, v);
    else if (key == "output.format") {
        if (v != "json" && v != "csv") throw PreconditionError("format must be json or csv");
        c.format = v;
    } else if (key == "output.out") c.out = v;
    else if (key == "output.seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "output.samples") c.samples = parse_number<std::uint64_t>(key, v);
    else if (key == "output.cache") c.cache = v;
    else throw PreconditionError("unknown config key " + std::string(key));
}

std::string emit_config(const RunConfig& config) {
    std::ostringstream os;
    std::string section;
    for (const auto& [sec, key, value] : entries(config)) {
        if (sec != section) {
            if (!section.empty()) os << '\n';
            os << '[' << sec << "]\n";
            section = sec;
        }
        os << key << " = " << value << '\n';
    }
    return os.str();
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::istringstream in{std::string(text)};
    std::string section;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw PreconditionError("config line " + std::to_string(lineno) + ": bad section");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos || section.empty())
            throw PreconditionError("config line " + std::to_string(lineno) + ": expected key = value");
        set_value(c, section + "." + trim(std::string_view(t).substr(0, eq)),
                  std::string_view(t).substr(eq + 1));
    }
    return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks) {
    CLI::App app{"Harmonic moments of level-one cusp form L-values against the recipe prediction",
                 "cuspmoment"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> values(std::size(value_flags));
    bool confluent = false, exploratory = false, no_direct = false;

    const char* commands[][2] = {
        {"eigensystems", "compute and store Hecke eigensystems"},
        {"kloosterman", "evaluate S(m, n; c)"},
        {"gl", "evaluate the arithmetic factor G_l(A)"},
        {"moment", "the moment by both routes"},
        {"compare", "moment against recipe prediction"},
        {"identity-check", "sweep the local residue identity"},
        {"sweep", "compare over an X or k grid"},
    };
    std::vector<CLI::App*> subs;
    std::vector<std::vector<CLI::Option*>> options;
    for (const auto& cmd : commands) {
        auto* sub = app.add_subcommand(cmd[0], cmd[1]);
        sub->add_option("--config", config_path, "key = value config file");
        std::vector<CLI::Option*> opts;
        for (std::size_t i = 0; i < std::size(value_flags); ++i)
            opts.push_back(sub->add_option(value_flags[i].name, values[i].second, value_flags[i].help));
        sub->add_flag("--confluent", confluent, "allow coincident shifts");
        sub->add_flag("--exploratory", exploratory, "also evaluate swaps of two or more shifts");
        sub->add_flag("--no-direct", no_direct, "skip the eigensystem route");
        subs.push_back(sub);
        options.push_back(std::move(opts));
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw PreconditionError("cannot read config " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            c = parse_config(ss.str());
        }
        std::size_t which = 0;
        for (; which < subs.size(); ++which)
            if (subs[which]->parsed()) break;
        c.command = commands[which][0];
        for (std::size_t i = 0; i < std::size(value_flags); ++i)
            if (options[which][i]->count() > 0) set_value(c, value_flags[i].key, values[i].second);
        if (confluent) c.confluent = true;
        if (exploratory) c.exploratory = true;
        if (no_direct) c.direct = false;
        c.policy.validate();

        const auto& cmd = c.command;
        if (cmd == "eigensystems") return cmd_eigensystems(c, out, err);
        if (cmd == "kloosterman") return cmd_kloosterman(c, out);
        if (cmd == "gl") return cmd_gl(c, out);
        if (cmd == "moment") return cmd_moment(c, out);
        if (cmd == "compare") return cmd_compare(c, out);
        if (cmd == "identity-check") return cmd_identity(c, out, hooks);
        return cmd_sweep(c, out);
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace cuspmoment::cli
