#pragma once

// Run configuration (key = value text, unknown keys rejected) and the
// machine-readable suite report.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hmt/error.hpp"
#include "hmt/fem.hpp"
#include "hmt/functionals.hpp"
#include "hmt/green.hpp"
#include "hmt/profiles.hpp"

namespace hmt {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// A real number, optionally a rational multiple of pi: "0.5", "3pi", "pi/2", "1.1*4pi".
inline double parse_real(std::string_view text)
{
    const std::string s = trim(text);
    if (s.empty())
        throw domain_error("config: empty number");
    auto plain = [&](const std::string& x) {
        if (x.empty())
            return 1.0;
        return parse_number(x);
    };
    const auto p = s.find("pi");
    if (p == std::string::npos)
        return parse_number(s);
    std::string pre = s.substr(0, p);
    std::string post = s.substr(p + 2);
    if (!pre.empty() && pre.back() == '*')
        pre.pop_back();
    double v = pi;
    // the factor in front may itself be a product such as "1.1*4"
    std::stringstream ss(pre);
    for (std::string f; std::getline(ss, f, '*');)
        v *= plain(trim(f));
    if (!post.empty()) {
        if (post.front() != '/')
            throw domain_error("config: cannot parse number '" + s + "'");
        v /= parse_number(trim(post.substr(1)));
    }
    return v;
}

inline std::vector<double> parse_list(std::string_view text)
{
    std::vector<double> out;
    std::stringstream ss{std::string(text)};
    for (std::string item; std::getline(ss, item, ',');)
        if (!trim(item).empty())
            out.push_back(parse_real(item));
    return out;
}

inline std::size_t parse_count(std::string_view text)
{
    const double x = parse_real(text);
    if (!(x >= 0.0) || x != std::floor(x) || x > 1e9)
        throw domain_error("config: expected a nonnegative integer, got '" + std::string(text) + "'");
    return static_cast<std::size_t>(x);
}

} // namespace detail

struct RunConfig {
    // functional and rearrangement sweeps
    double t_max = 30.0;
    std::size_t n = 4096;
    Grading grading = Grading::uniform_t;
    std::size_t profiles = 50;
    // Green's function
    double green_t_max = 40.0;
    std::size_t green_n = 8192;
    double green_t_min = 1e-12;
    FitWindow window{};
    // extremals
    Mode mode = Mode::hardy;
    std::vector<double> epsilons{3.0 * pi, 2.0 * pi, pi, 0.5 * pi};
    double extremal_t_max = 30.0;
    std::size_t extremal_n = 4096;
    double extremal_t_min = 1e-3;
    // certificate chain
    std::vector<double> certify_epsilons{1e-3, 1e-4, 1e-5, 1e-6};
    double t0_epsilon = 1e-4; // the sweep's T0 estimate is T at this eps
    double moser_alpha = 1.1 * four_pi;
    std::vector<double> moser_epsilons{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8};
    double hardy_lambda = 1.5;
    std::vector<double> hardy_deltas{1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10};
    double hardy_t_max = 40.0;
    std::size_t hardy_n = 8192;
    // plumbing
    std::uint64_t seed = default_seed;
    std::string out = "hmt_out";

    // --n / --tmax: override the main grid of every suite that runs
    std::optional<std::size_t> n_override;
    std::optional<double> t_max_override;

    void set(const std::string& key, const std::string& value)
    {
        using namespace detail;
        if (key == "t_max") t_max = parse_real(value);
        else if (key == "n") n = parse_count(value);
        else if (key == "grading") grading = parse_grading(value);
        else if (key == "profiles") profiles = parse_count(value);
        else if (key == "green_t_max") green_t_max = parse_real(value);
        else if (key == "green_n") green_n = parse_count(value);
        else if (key == "green_t_min") green_t_min = parse_real(value);
        else if (key == "window") window = parse_window(value);
        else if (key == "mode") mode = parse_mode(value);
        else if (key == "epsilons") epsilons = parse_list(value);
        else if (key == "extremal_t_max") extremal_t_max = parse_real(value);
        else if (key == "extremal_n") extremal_n = parse_count(value);
        else if (key == "extremal_t_min") extremal_t_min = parse_real(value);
        else if (key == "certify_epsilons") certify_epsilons = parse_list(value);
        else if (key == "t0_epsilon") t0_epsilon = parse_real(value);
        else if (key == "moser_alpha") moser_alpha = parse_real(value);
        else if (key == "moser_epsilons") moser_epsilons = parse_list(value);
        else if (key == "hardy_lambda") hardy_lambda = parse_real(value);
        else if (key == "hardy_deltas") hardy_deltas = parse_list(value);
        else if (key == "hardy_t_max") hardy_t_max = parse_real(value);
        else if (key == "hardy_n") hardy_n = parse_count(value);
        else if (key == "seed") seed = static_cast<std::uint64_t>(parse_count(value));
        else if (key == "out") out = value;
        else throw domain_error("config: unknown key '" + key + "'");
    }

    static Mode parse_mode(const std::string& s)
    {
        if (s == "hardy") return Mode::hardy;
        if (s == "dirichlet") return Mode::dirichlet;
        throw domain_error("config: mode must be hardy or dirichlet, got '" + s + "'");
    }

    static Grading parse_grading(const std::string& s)
    {
        if (s == "uniform_t") return Grading::uniform_t;
        if (s == "geometric_t") return Grading::geometric_t;
        throw domain_error("config: grading must be uniform_t or geometric_t, got '" + s + "'");
    }

    static FitWindow parse_window(const std::string& s)
    {
        const auto v = detail::parse_list(s);
        if (v.size() != 2 || !(v[0] > 0.0 && v[0] < v[1] && v[1] < 1.0))
            throw domain_error("config: window must be LO,HI with 0 < LO < HI < 1");
        return {v[0], v[1]};
    }

    // grids after overrides
    std::size_t main_n(std::size_t dflt) const { return n_override.value_or(dflt); }
    double main_t_max(double dflt) const { return t_max_override.value_or(dflt); }

    json to_json() const
    {
        json j;
        j["t_max"] = t_max;
        j["n"] = n;
        j["grading"] = to_string(grading);
        j["profiles"] = profiles;
        j["green_t_max"] = green_t_max;
        j["green_n"] = green_n;
        j["green_t_min"] = green_t_min;
        j["window"] = {window.r_lo, window.r_hi};
        j["mode"] = to_string(mode);
        j["epsilons"] = epsilons;
        j["extremal_t_max"] = extremal_t_max;
        j["extremal_n"] = extremal_n;
        j["extremal_t_min"] = extremal_t_min;
        j["certify_epsilons"] = certify_epsilons;
        j["t0_epsilon"] = t0_epsilon;
        j["moser_alpha"] = moser_alpha;
        j["moser_epsilons"] = moser_epsilons;
        j["hardy_lambda"] = hardy_lambda;
        j["hardy_deltas"] = hardy_deltas;
        j["hardy_t_max"] = hardy_t_max;
        j["hardy_n"] = hardy_n;
        j["seed"] = seed;
        j["out"] = out;
        if (n_override)
            j["n_override"] = *n_override;
        if (t_max_override)
            j["t_max_override"] = *t_max_override;
        return j;
    }
};

// "key = value" lines; '#' starts a comment
inline void load_config(std::istream& is, RunConfig& cfg)
{
    std::string line;
    for (std::size_t no = 1; std::getline(is, line); ++no) {
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        const std::string s = detail::trim(line);
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw domain_error("config line " + std::to_string(no) + ": expected key = value");
        cfg.set(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }
}

inline RunConfig load_config_file(const std::filesystem::path& p, RunConfig cfg = {})
{
    std::ifstream is(p);
    if (!is)
        throw domain_error("config: cannot open " + p.string());
    load_config(is, cfg);
    return cfg;
}

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation; // how value compares to threshold when passing
    bool pass = false;
    bool gating = true; // informational checks do not decide the suite verdict
    std::string detail;
};

class SuiteReport {
public:
    explicit SuiteReport(std::string name) : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

    const std::string& name() const { return name_; }
    const std::vector<Check>& checks() const { return checks_; }
    json& provenance() { return provenance_; }
    json& data() { return data_; }

    Check& check(std::string name, double value, std::string relation, double threshold, std::string detail = {})
    {
        bool ok = false;
        if (relation == "<=") ok = value <= threshold;
        else if (relation == "<") ok = value < threshold;
        else if (relation == ">=") ok = value >= threshold;
        else if (relation == ">") ok = value > threshold;
        else throw std::logic_error("SuiteReport: unknown relation " + relation);
        checks_.push_back({std::move(name), value, threshold, std::move(relation), ok, true, std::move(detail)});
        return checks_.back();
    }

    // boolean property: value 1/0 against threshold 1
    Check& require(std::string name, bool ok, std::string detail = {})
    {
        return check(std::move(name), ok ? 1.0 : 0.0, ">=", 1.0, std::move(detail));
    }

    void fail(std::string name, std::string detail) { require(std::move(name), false, std::move(detail)); }

    bool passed() const
    {
        for (const Check& c : checks_)
            if (c.gating && !c.pass)
                return false;
        return true;
    }

    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

    json to_json() const
    {
        json j;
        j["suite"] = name_;
        j["passed"] = passed();
        j["wall_seconds"] = seconds();
        j["provenance"] = provenance_;
        json cs = json::array();
        for (const Check& c : checks_) {
            json e;
            e["name"] = c.name;
            e["pass"] = c.pass;
            e["gating"] = c.gating;
            e["value"] = finite_or_string(c.value);
            e["relation"] = c.relation;
            e["threshold"] = finite_or_string(c.threshold);
            if (!c.detail.empty())
                e["detail"] = c.detail;
            cs.push_back(std::move(e));
        }
        j["checks"] = std::move(cs);
        j["data"] = data_;
        return j;
    }

    static json finite_or_string(double x)
    {
        if (std::isfinite(x))
            return x;
        return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point start_;
    std::vector<Check> checks_;
    json provenance_ = json::object();
    json data_ = json::object();
};

inline json grid_json(const RadialGrid& g)
{
    json j;
    j["T_max"] = g.t_max();
    j["n"] = g.n();
    j["grading"] = to_string(g.grading());
    j["first_node"] = g.knot(1);
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    os << text;
}

} // namespace hmt
