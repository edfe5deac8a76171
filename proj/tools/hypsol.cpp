#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "hypsol/cli.hpp"

namespace {

using namespace hypsol;

struct Numbers {
    std::map<std::string, std::string> text;

    void add(CLI::App* app, const std::string& flag, const std::string& help, bool required = false) {
        auto* opt = app->add_option(flag, text[flag], help);
        if (required) opt->required();
    }
    bool given(const std::string& flag) const { return !text.at(flag).empty(); }
    double get(const std::string& flag, double fallback) const {
        return given(flag) ? cli::parse_number(flag, text.at(flag)) : fallback;
    }
};

std::string join_args(int argc, char** argv) {
    std::string s = "hypsol";
    for (int i = 1; i < argc; ++i) s += std::string(" ") + argv[i];
    return s;
}

std::string flag_name(std::string key) {
    for (auto& c : key)
        if (c == '_') c = '-';
    return "--tol-" + key;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soliton surfaces of mean curvature flow in hyperbolic 3-space"};
    app.require_subcommand(1);

    std::string config;
    app.add_option("--config", config, "key=value tolerance file (flags win)");
    Numbers tol_flags;
    for (const auto& [key, value] : cli::tolerance_record(Tolerances{}))
        tol_flags.add(&app, flag_name(key), "override " + key + " (default " + format_double(value) + ")");

    Numbers nums;
    cli::CatenoidArgs cat;
    auto* c_cat = app.add_subcommand("catenoid", "translating catenoid through the neck radius r");
    nums.add(c_cat, "--r", "neck radius r > 0", true);
    c_cat->add_option("--mesh-res", cat.mesh_res, "profile and angular resolution of the mesh");
    c_cat->add_option("--grid", cat.grid, "residual grid size per direction");
    c_cat->add_option("--out", cat.out, "output directory")->required();

    cli::GrimReaperArgs grim;
    auto* c_grim = app.add_subcommand("grim-reaper", "parabolic grim reaper with phi'(0) = lambda");
    nums.add(c_grim, "--lambda", "initial slope lambda >= 0", true);
    nums.add(c_grim, "--span", "profile half-width Y (default 50)");
    c_grim->add_option("--mesh-res", grim.mesh_res, "mesh resolution per direction");
    c_grim->add_option("--grid", grim.grid, "residual grid size per direction");
    c_grim->add_option("--out", grim.out, "output directory")->required();

    cli::RotatorArgs rot;
    auto* c_rot = app.add_subcommand("rotator", "helicoidal rotator with pitch h");
    c_rot->set_help_flag("--help", "print this help message and exit");
    nums.add(c_rot, "--h", "pitch h > 0", true);
    nums.add(c_rot, "--mu0", "|alpha| at the point closest to the axis (nonzero)", true);
    nums.add(c_rot, "--span", "arc-length half-span S (default 50)");
    c_rot->add_option("--mesh-res", rot.mesh_res, "mesh resolution along the curve");
    c_rot->add_option("--grid", rot.grid, "residual grid size per direction");
    c_rot->add_option("--out", rot.out, "output directory")->required();

    cli::PhasePortraitArgs ph;
    auto* c_ph = app.add_subcommand("phase-portrait", "normalised rotator field on [-5, 5]^2");
    c_ph->set_help_flag("--help", "print this help message and exit");
    nums.add(c_ph, "--h", "pitch h > 0", true);
    c_ph->add_option("--grid", ph.grid, "samples per axis (>= 2)");
    c_ph->add_option("--out", ph.out, "output CSV file")->required();

    cli::SweepArgs sw;
    std::string sweep_values;
    auto* c_sw = app.add_subcommand("sweep", "asymptote brackets over a list of parameters");
    c_sw->add_option("--family", sw.family, "catenoid or grim-reaper")->required();
    c_sw->add_option("--values", sweep_values, "comma list, or log:<a>:<b>:<n>")->required();
    nums.add(c_sw, "--span", "grim-reaper half-width Y (default 50)");
    c_sw->add_option("--threads", sw.threads, "worker threads (0: all cores)");
    c_sw->add_option("--out", sw.out, "output CSV file")->required();

    cli::VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "finite-difference soliton residual of a surface");
    c_ver->add_option("--surface", ver.surface,
                      "horosphere:h | vertical-plane:theta | catenoid:r | grim-reaper:lambda | "
                      "helicoid:h:mu0")
        ->required();
    c_ver->add_option("--field", ver.field, "translate | rotate | scaled:h");
    c_ver->add_option("--grid", ver.grid, "grid size per direction");
    c_ver->add_option("--out", ver.out, "optional directory for residuals.csv and manifest.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::usage;
    }

    return cli::guarded(std::cerr, [&]() -> int {
        cli::Context ctx;
        ctx.command_line = join_args(argc, argv);
        ctx.out = &std::cout;
        ctx.err = &std::cerr;
        if (!config.empty()) cli::load_config(ctx.tol, config);
        for (const auto& [key, value] : cli::tolerance_record(Tolerances{})) {
            const auto flag = flag_name(key);
            if (tol_flags.given(flag)) cli::apply_tolerance(ctx.tol, key, tol_flags.get(flag, value));
        }

        if (c_cat->parsed()) {
            cat.r = nums.get("--r", cat.r);
            return cli::cmd_catenoid(cat, ctx);
        }
        if (c_grim->parsed()) {
            grim.lambda = nums.get("--lambda", grim.lambda);
            grim.span = nums.get("--span", grim.span);
            return cli::cmd_grim_reaper(grim, ctx);
        }
        if (c_rot->parsed()) {
            rot.h = nums.get("--h", rot.h);
            rot.mu0 = nums.get("--mu0", rot.mu0);
            rot.span = nums.get("--span", rot.span);
            return cli::cmd_rotator(rot, ctx);
        }
        if (c_ph->parsed()) {
            ph.h = nums.get("--h", ph.h);
            return cli::cmd_phase_portrait(ph, ctx);
        }
        if (c_sw->parsed()) {
            sw.values = cli::parse_values(sweep_values);
            sw.span = nums.get("--span", sw.span);
            return cli::cmd_sweep(sw, ctx);
        }
        return cli::cmd_verify(ver, ctx);
    });
}
