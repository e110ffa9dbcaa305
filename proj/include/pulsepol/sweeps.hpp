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

#ifndef PULSEPOL_SWEEPS_HPP
#define PULSEPOL_SWEEPS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsepol/pulsepol_seq.hpp"

namespace pulsepol::sweeps {

inline constexpr std::string_view kToolVersion = "0.1.0";

// 13C gyromagnetic ratio over 2 pi.
inline constexpr double kKhzPerGauss = 1.0705;

enum class Command { kEnvelope, kConvergenceMap, kHarmonics, kStrongCoupling, kRates };

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);

// One sweep request in experiment units (kHz over 2 pi, microseconds).
struct RunSpec {
    Command command = Command::kEnvelope;
    double larmor_khz = 428.0;
    std::optional<double> b0_gauss; // overrides larmor_khz when set
    double az_khz = 0.0;
    double ax_khz = 0.0;
    int n_p = 4;
    std::optional<std::uint64_t> reps; // nullopt: asymptotic
    double t_min_us = 3.0;
    double t_max_us = 4.0;
    int t_steps = 101;
    int harmonic = 3;
    int order = 2;
    double p0 = 0.0;
    std::string out;         // empty: stdout
    bool plot_script = false;
    unsigned threads = 0;    // 0: hardware concurrency

    // Built-in defaults for each subcommand.
    static RunSpec defaults(Command c);

    double effective_larmor_khz() const;
    SystemParams params() const;

    // Linearly spaced periods in seconds, t_min..t_max inclusive; one step
    // yields {t_min}.
    std::vector<double> periods() const;

    // Throws InvalidArgument naming the offending field.
    void validate() const;
};

// Sets one field from its key=value spelling (keys are the long flag names
// without the leading dashes, e.g. "az-khz"). Throws InvalidArgument on unknown
// keys or malformed values. `reps` accepts "inf" for the asymptotic limit.
void apply_setting(RunSpec &spec, std::string_view key, std::string_view value);

// key=value lines; '#' starts a comment; blank lines ignored.
void apply_config(RunSpec &spec, std::istream &in);
void apply_config_file(RunSpec &spec, const std::string &path);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> provenance;

    // Throws InvariantViolation if any row width differs from the header.
    void validate() const;
};

// Provenance lines echoing the full spec. Thread count is omitted: it never
// affects the numbers.
std::vector<std::string> provenance_for(const RunSpec &spec);

// columns T_us, delta_kHz, P_sim, P_markov1, P_markov2
ResultTable cmd_envelope(const RunSpec &spec);
// long format T_us, R, P over T x log-spaced R (R = 0 included)
ResultTable cmd_convergence_map(const RunSpec &spec);
// columns T_us, P
ResultTable cmd_harmonics(const RunSpec &spec);
// same columns as cmd_envelope
ResultTable cmd_strong_coupling(const RunSpec &spec);
// columns T_us, delta_kHz, r_plus_sim, r_minus_sim, r_plus_model, r_minus_model
ResultTable cmd_rates(const RunSpec &spec);

ResultTable run(const RunSpec &spec);

// 0, then about eight values per decade up to r_max (always included).
std::vector<std::uint64_t> log_spaced_reps(std::uint64_t r_max);

std::string format_number(double v);
void write_csv(std::ostream &out, const ResultTable &table);

// Gnuplot script that plots the CSV at csv_path.
std::string plot_script(const RunSpec &spec, const ResultTable &table, const std::string &csv_path);

// Writes text to path through a temporary sibling and a rename, so readers
// never see a partial file.
void write_file_atomically(const std::string &path, const std::string &text);

} // namespace pulsepol::sweeps

#endif // PULSEPOL_SWEEPS_HPP
