// hmtlab: run the verification suites and write JSON/CSV reports.
//
//   hmtlab green|maximize|certify|rearrange-check|all [--config PATH] [--out DIR] ...
//
// Exit status: 0 when every gating check passes, 1 when a check fails,
// 2 on configuration or precondition errors.

#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmt/hmt.hpp"

namespace {

void print(const hmt::SuiteReport& rep)
{
    std::printf("== %s: %s (%.2f s)\n", rep.name().c_str(), rep.passed() ? "PASS" : "FAIL", rep.seconds());
    for (const hmt::Check& c : rep.checks())
        std::printf("  %-5s %s%-44s %-13.6g %-2s %-10.4g %s\n", c.pass ? "ok" : "FAIL", c.gating ? "" : "(info) ",
                    c.name.c_str(), c.value, c.relation.c_str(), c.threshold, c.detail.c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hardy-Moser-Trudinger numerical laboratory"};
    app.require_subcommand(1);

    std::optional<std::string> config_path, out_dir, window, mode, epsilons;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<double> t_max;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory (one subdirectory per suite)");
    app.add_option("--seed", seed, "seed for randomized sweeps");
    app.add_option("--n", n, "cells in the main grid of each suite");
    app.add_option("--tmax", t_max, "hyperbolic radius T_max of the main grid");
    app.add_option("--window", window, "C_G fit window LO,HI in r");
    app.add_option("--mode", mode, "hardy or dirichlet");
    app.add_option("--epsilons,--epsilon", epsilons, "comma-separated epsilon ladder (pi multiples allowed, e.g. 3pi,pi/2)");

    using Suite = std::function<hmt::SuiteReport(const hmt::RunConfig&)>;
    std::vector<Suite> selected;
    auto sub = [&](const char* name, const char* help, std::vector<Suite> suites) {
        CLI::App* s = app.add_subcommand(name, help);
        s->fallthrough();
        s->callback([&selected, suites] { selected = suites; });
    };
    sub("green", "Green's function, C_G and Pohozaev checks", {hmt::cmd_green});
    sub("maximize", "subcritical maximizers along an epsilon ladder", {hmt::cmd_maximize});
    sub("certify", "lower-bound certificate and sharpness witnesses", {hmt::cmd_certify});
    sub("rearrange-check", "rearrangement property sweep", {hmt::cmd_rearrange_check});
    sub("all", "every suite", {hmt::cmd_green, hmt::cmd_maximize, hmt::cmd_certify, hmt::cmd_rearrange_check});

    CLI11_PARSE(app, argc, argv);

    try {
        hmt::RunConfig cfg = config_path ? hmt::load_config_file(*config_path) : hmt::RunConfig{};
        if (out_dir) cfg.set("out", *out_dir);
        if (seed) cfg.seed = *seed;
        if (window) cfg.set("window", *window);
        if (mode) cfg.set("mode", *mode);
        if (epsilons) cfg.set("epsilons", *epsilons);
        cfg.n_override = n;
        cfg.t_max_override = t_max;

        bool ok = true;
        for (const Suite& run : selected) {
            const hmt::SuiteReport rep = run(cfg);
            print(rep);
            ok = ok && rep.passed();
        }
        return ok ? 0 : 1;
    } catch (const hmt::domain_error& e) {
        std::cerr << "hmtlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hmtlab: " << e.what() << '\n';
        return 1;
    }
}
