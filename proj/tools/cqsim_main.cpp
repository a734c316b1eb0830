#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include <cqsim/cqsim.hpp>

namespace {

int run_kind(cqsim::ExperimentKind want, const std::string& config_path,
             const std::string& out_override) {
    cqsim::ExperimentConfig cfg;
    try {
        cfg = cqsim::load_config(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (cfg.kind != want) {
        std::fprintf(stderr, "error: config kind is '%s' but the subcommand expects '%s'\n",
                     cqsim::to_string(cfg.kind), cqsim::to_string(want));
        return 2;
    }
    if (!out_override.empty())
        cfg.out_dir = out_override;

    cqsim::RunResult res;
    try {
        res = cqsim::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    for (const auto& r : res.summary.rows) {
        if (r.has_values)
            std::printf("%-32s %s  observed=%s bound=%s\n", r.check.c_str(),
                        r.pass ? "pass" : "FAIL", cqsim::fmt17(r.observed).c_str(),
                        cqsim::fmt17(r.bound).c_str());
        else
            std::printf("%-32s %s\n", r.check.c_str(), r.pass ? "pass" : "FAIL");
    }
    std::printf("%s: %s (outputs in %s)\n", cqsim::to_string(cfg.kind),
                res.all_pass ? "all checks passed" : "SOME CHECKS FAILED", cfg.out_dir.c_str());
    return res.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic/deterministic simulator for holomorphic displacement fields"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        cqsim::ExperimentKind kind;
    };
    const Sub subs[] = {
        {"validate", "run the deterministic invariant battery", cqsim::ExperimentKind::validate},
        {"mc-vs-pde", "compare path-ensemble averages with the field evolution",
         cqsim::ExperimentKind::mc_vs_pde},
        {"schrodinger-check", "cross-check the pair evolution against the wave equation",
         cqsim::ExperimentKind::schrodinger_check},
        {"spectrum", "extract the energy spectrum from an autocorrelation record",
         cqsim::ExperimentKind::spectrum},
        {"bath-correlation", "measure the oscillator-bath noise correlation",
         cqsim::ExperimentKind::bath_correlation},
    };

    std::string config_path, out_override;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        cmd->add_option("-c,--config", config_path, "JSON config file")->required();
        cmd->add_option("-o,--out", out_override, "output directory (overrides the config)");
        cmd->callback([&, kind = s.kind] {
            const int rc = run_kind(kind, config_path, out_override);
            if (rc != 0)
                throw CLI::RuntimeError(rc);
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
