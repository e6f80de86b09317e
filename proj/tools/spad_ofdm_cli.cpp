// spad-ofdm: sweeps, clipping search and cross-checks for SPAD-array
// DCO-OFDM links.
//
//   spad-ofdm <subcommand> --config <file> [--set key=value]... --out <csv>

#include "spad_ofdm.hpp"
#include "spad_ofdm/validation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace spad_ofdm;

namespace {

struct CommonArgs
{
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required)
{
    cmd->add_option("--config", args.config, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", args.overrides, "override a config key (key=value), repeatable");
    auto* out = cmd->add_option("--out", args.out, "output CSV path");
    if (out_required)
        out->required();
}

int run_sweep(const RunConfig& cfg, const std::string& out, bool force_optimize)
{
    SweepSpec spec = sweep_spec(cfg);
    if (force_optimize)
    {
        spec.optimize_kappa = true;
        spec.kappa_grid = cfg.kappa_search_grid();
    }
    emit_csv(sweep_all(spec), out);
    return 0;
}

int run_moments(const RunConfig& cfg, const std::string& out)
{
    const auto grid = cfg.power_grid();
    const auto m = sweep_moments(cfg.spad, grid);
    emit_moments_csv(m, out);
    std::cout << "saturation rate " << saturation_rate(cfg.spad) << " /s, peak count "
              << saturation_count(cfg.spad) << ", at P_rx " << received_power_for_rate(saturation_rate(cfg.spad), cfg.spad)
              << " W\n";
    return 0;
}

int run_validate(const RunConfig& cfg, const std::string& out)
{
    const LinkTemplate link = cfg.link();
    std::vector<validation::CheckResult> checks;
    checks.push_back(validation::check_quadrature(link, cfg.validate_points, cfg.seed));
    checks.push_back(validation::check_ideal_reductions(link));
    const auto grid = cfg.power_grid();
    const auto mc = validation::run_mc_grid(link, grid, cfg.kappa, cfg.mod_orders, cfg.validate_frames, cfg.seed,
                                            cfg.threads);
    for (auto& c : validation::check_mc(mc))
        checks.push_back(std::move(c));

    if (!out.empty())
    {
        SweepResult r;
        for (const auto& c : mc)
        {
            SweepPoint p;
            p.received_power = c.received_power;
            p.kappa = c.kappa;
            p.mod_order = c.order;
            p.analytic = c.analytic;
            p.se_qam = adaptive_se(c.analytic.snr, cfg.adaptation_orders, cfg.ber_target);
            p.empirical = c.empirical;
            r.points.push_back(p);
        }
        emit_csv(r, out);
    }

    bool ok = true;
    for (const auto& c : checks)
    {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SPAD-array DCO-OFDM link analysis and simulation"};
    app.require_subcommand(1);
    CommonArgs args;

    struct Command
    {
        const char* name;
        const char* help;
    };
    const Command sweeps[] = {
        {"gain", "Bussgang gain versus received power"},
        {"sdnr", "signal-to-distortion-noise ratio sweep"},
        {"ssnr", "signal-to-shot-noise ratio sweep"},
        {"snr", "effective SNR sweep"},
        {"ber", "BER sweep (set simulate = true for Monte Carlo columns)"},
        {"se", "adaptive-QAM spectral efficiency sweep"},
    };
    std::vector<CLI::App*> sweep_cmds;
    for (const auto& c : sweeps)
    {
        auto* cmd = app.add_subcommand(c.name, c.help);
        add_common(cmd, args, true);
        sweep_cmds.push_back(cmd);
    }
    auto* moments = app.add_subcommand("moments", "detected-count mean and variance versus received power");
    add_common(moments, args, true);
    auto* optimize = app.add_subcommand("optimize-kappa", "exhaustive clipping-level search per received power");
    add_common(optimize, args, true);
    auto* validate = app.add_subcommand("validate", "closed form vs quadrature vs Monte Carlo cross-checks");
    add_common(validate, args, false);

    CLI11_PARSE(app, argc, argv);

    try
    {
        const RunConfig cfg = load_config(args.config, args.overrides);
        if (moments->parsed())
            return run_moments(cfg, args.out);
        if (optimize->parsed())
            return run_sweep(cfg, args.out, true);
        if (validate->parsed())
            return run_validate(cfg, args.out);
        return run_sweep(cfg, args.out, false);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "spad-ofdm: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "spad-ofdm: " << e.what() << '\n';
        return 3;
    }
}
