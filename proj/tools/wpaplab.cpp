#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "wpap/runner.hpp"

namespace {

// exit codes by failure category
constexpr int kConfigError = 2;
constexpr int kPreconditionError = 3;
constexpr int kNumericError = 4;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wpaplab: weighted almost periodic function laboratory"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        std::string out;
        unsigned seed = 0;
        bool seed_set = false;
        bool override_gate = false;
    };

    const std::vector<std::string> subcommands = {"classify-weight", "test-pap0",
                                                  "verify-dichotomy", "fit-estimates",
                                                  "solve-mild", "heat-demo"};
    std::map<std::string, Args> args;
    for (const auto& name : subcommands) {
        CLI::App* sub = app.add_subcommand(name);
        Args& a = args[name];
        sub->add_option("--config", a.config, "run configuration file")->required();
        sub->add_option("--out", a.out, "output directory")->required();
        sub->add_option("--seed", a.seed, "seed override")->each([&a](const std::string&) {
            a.seed_set = true;
        });
        if (name == "solve-mild" || name == "heat-demo")
            sub->add_flag("--override-contraction-gate", a.override_gate,
                          "attempt the solve even when the a priori bound exceeds the gate");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    const Args& a = args[name];
    wpap::RunOptions opt;
    opt.subcommand = name;
    opt.out_dir = a.out;
    opt.seed = a.seed;
    opt.seed_set = a.seed_set;
    opt.override_gate = a.override_gate;

    try {
        const auto doc = wpap::ConfigDoc::parse_file(a.config);
        const auto manifest = wpap::run(doc, opt);
        std::printf("%s: wrote %zu files to %s\n", name.c_str(), manifest.files.size() + 1,
                    a.out.c_str());
        return 0;
    } catch (const wpap::ConfigError& e) {
        std::fprintf(stderr, "%s: configuration rejected\n%s\n", name.c_str(), e.what());
        return kConfigError;
    } catch (const wpap::PreconditionError& e) {
        std::fprintf(stderr, "%s: precondition violated: %s\n", name.c_str(), e.what());
        return kPreconditionError;
    } catch (const wpap::NumericError& e) {
        std::fprintf(stderr, "%s: numeric failure: %s\n", name.c_str(), e.what());
        return kNumericError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s: error: %s\n", name.c_str(), e.what());
        return 1;
    }
}
