// Copyright 2026 The pulsepol-dnp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pulsepol: parameter sweeps for PulsePol hyperpolarisation.
//
// Exit codes: 0 success, 2 usage error, 3 numeric-invariant failure.

#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "pulsepol/errors.hpp"
#include "pulsepol/sweeps.hpp"

namespace {

using pulsepol::sweeps::Command;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Flag {
    const char *name;
    const char *help;
};

constexpr Flag kFlags[] = {
    {"larmor-khz", "13C Larmor frequency over 2 pi (kHz)"},
    {"b0-gauss", "static field (G); Larmor = 1.0705 kHz/G x B0"},
    {"az-khz", "parallel hyperfine Az over 2 pi (kHz)"},
    {"ax-khz", "perpendicular hyperfine Ax over 2 pi (kHz)"},
    {"np", "PulsePol units per repetition"},
    {"reps", "repetitions R, or 'inf' for the asymptote"},
    {"t-min-us", "first period of the grid (us)"},
    {"t-max-us", "last period of the grid (us)"},
    {"t-steps", "number of grid points"},
    {"harmonic", "reference harmonic k for the detuning column (1, 3, 5)"},
    {"order", "analytic model order for 'rates' (1 or 2)"},
    {"p0", "initial nuclear polarisation"},
    {"out", "output CSV path (default: stdout)"},
    {"threads", "worker threads, 0 = auto"},
};

struct Invocation {
    std::string config;
    bool plot_script = false;
    std::vector<std::pair<std::string, std::string>> settings;
};

void add_flags(CLI::App &sub, Invocation &inv) {
    CLI::Option *larmor = nullptr;
    CLI::Option *b0 = nullptr;
    for (const Flag &f : kFlags) {
        const std::string key = f.name;
        CLI::Option *opt = sub.add_option_function<std::string>(
            "--" + key, [&inv, key](const std::string &v) { inv.settings.emplace_back(key, v); },
            f.help);
        if (key == "larmor-khz")
            larmor = opt;
        else if (key == "b0-gauss")
            b0 = opt;
    }
    larmor->excludes(b0);
    sub.add_option("--config", inv.config, "key=value file; flags override it")->check(CLI::ExistingFile);
    sub.add_flag("--plot-script", inv.plot_script, "also write a gnuplot script next to --out");
}

int execute(Command cmd, const Invocation &inv) {
    using namespace pulsepol::sweeps;
    RunSpec spec = RunSpec::defaults(cmd);
    if (!inv.config.empty())
        apply_config_file(spec, inv.config);
    for (const auto &[key, value] : inv.settings)
        apply_setting(spec, key, value);
    if (inv.plot_script)
        spec.plot_script = true;
    if (spec.plot_script && spec.out.empty())
        throw pulsepol::InvalidArgument("--plot-script needs --out");
    spec.validate();

    const ResultTable table = run(spec);
    std::ostringstream csv;
    write_csv(csv, table);
    if (spec.out.empty()) {
        std::cout << csv.str();
        return 0;
    }
    write_file_atomically(spec.out, csv.str());
    if (spec.plot_script)
        write_file_atomically(spec.out + ".gp", plot_script(spec, table, spec.out));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"PulsePol dynamic nuclear polarisation sweeps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pulsepol::sweeps::kToolVersion));

    const std::pair<Command, const char *> commands[] = {
        {Command::kEnvelope, "asymptotic envelope versus T: simulation and Markov models"},
        {Command::kConvergenceMap, "polarisation versus T and log-spaced repetitions"},
        {Command::kHarmonics, "single-pass polarisation across the k = 1, 3, 5 resonances"},
        {Command::kStrongCoupling, "envelope for a strongly coupled spin"},
        {Command::kRates, "measured versus analytic transition probabilities"},
    };
    Invocation inv;
    std::vector<std::pair<CLI::App *, Command>> subs;
    for (const auto &[cmd, help] : commands) {
        CLI::App *sub = app.add_subcommand(std::string(pulsepol::sweeps::command_name(cmd)), help);
        add_flags(*sub, inv);
        subs.emplace_back(sub, cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    for (const auto &[sub, cmd] : subs) {
        if (!sub->parsed())
            continue;
        try {
            return execute(cmd, inv);
        } catch (const pulsepol::InvalidArgument &e) {
            std::cerr << "usage error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const pulsepol::InvariantViolation &e) {
            std::cerr << "numeric invariant failed: " << e.what() << "\n";
            return kExitNumeric;
        } catch (const pulsepol::Degenerate &e) {
            std::cerr << "numeric invariant failed: " << e.what() << "\n";
            return kExitNumeric;
        }
    }
    return kExitUsage;
}
