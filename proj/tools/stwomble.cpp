#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "stwomble/commands.hpp"
#include "stwomble/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Space-time Gaussian process derivatives and wombling measures"};
    app.require_subcommand(1);
    app.set_version_flag("--version", stw::kVersion);
    app.footer("--config-keys lists every config key with its default.");

    std::string config, out;
    long long seed = -1;
    int threads = 0;
    bool force = false;

    struct Cmd {
        const char* name;
        const char* help;
        void (*run)(const stw::RunConfig&, bool);
    };
    const Cmd cmds[] = {
        {"simulate", "write a dataset drawn from a test pattern", stw::cmd_simulate},
        {"fit", "run the MCMC sampler", stw::cmd_fit},
        {"predict", "posterior derivative draws on the grid", stw::cmd_predict},
        {"womble", "posterior wombling measures over a surface", stw::cmd_womble},
        {"report", "HPD summary tables and significance grids", stw::cmd_report},
        {"run", "simulate if needed, then fit, predict, womble and report", stw::cmd_run},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : cmds) {
        CLI::App* s = app.add_subcommand(c.name, c.help);
        s->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
        s->add_option("--out", out, "output directory (overrides run.out)");
        s->add_option("--seed", seed, "master seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
        s->add_option("--threads", threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
        s->add_flag("--force", force, "recompute even when outputs exist");
        subs.push_back(s);
    }

    // handled before parsing since it needs no subcommand
    if (argc == 2 && std::string(argv[1]) == "--config-keys") {
        std::fputs(stw::describe_config_keys().c_str(), stdout);
        return 0;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        stw::RunConfig cfg = config.empty() ? stw::default_config() : stw::load_config(config);
        if (!out.empty()) cfg.values["run.out"] = std::filesystem::absolute(out).string();
        if (seed >= 0) cfg.values["run.seed"] = std::to_string(seed);
        if (threads > 0) cfg.values["run.threads"] = std::to_string(threads);
        for (size_t k = 0; k < subs.size(); ++k)
            if (subs[k]->parsed()) cmds[k].run(cfg, force);
    } catch (const stw::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
