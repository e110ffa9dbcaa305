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

#include "pulsepol/sweeps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pulsepol/channel_sim.hpp"
#include "pulsepol/markov_model.hpp"

namespace pulsepol::sweeps {

namespace {

constexpr int kMaxSteps = 1000000;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        throw InvalidArgument(std::string(key) + ": not a finite number: '" + std::string(text) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InvalidArgument(std::string(key) + ": not an integer: '" + std::string(text) + "'");
    return v;
}

std::string format_kv(std::string_view key, double v) {
    return std::string(key) + "=" + format_number(v);
}

PolarisationTrace markov_column(const RunSpec &spec, std::span<const double> periods,
                                ModelOrder order) {
    const SystemParams p = spec.params();
    const AnalyticModel model{order};
    if (!spec.reps)
        return analytic_envelope(p, periods, spec.n_p, model, spec.p0);
    PolarisationTrace trace;
    trace.abscissa.assign(periods.begin(), periods.end());
    for (double t : periods)
        trace.polarisation.push_back(
            polarisation_at_R(analytic_rates(p, t, spec.n_p, model), *spec.reps, spec.p0));
    trace.validate();
    return trace;
}

SweepOptions sweep_options(const RunSpec &spec) {
    SweepOptions opts;
    opts.n_p = spec.n_p;
    opts.reps = spec.reps;
    opts.initial = {0.0, 0.0, spec.p0};
    opts.threads = spec.threads;
    return opts;
}

ResultTable envelope_table(const RunSpec &spec) {
    spec.validate();
    const SystemParams p = spec.params();
    const std::vector<double> grid = spec.periods();
    const PolarisationTrace sim = envelope_sweep(p, grid, sweep_options(spec));
    const PolarisationTrace m1 = markov_column(spec, grid, ModelOrder::kFirst);
    const PolarisationTrace m2 = markov_column(spec, grid, ModelOrder::kSecond);

    ResultTable table;
    table.columns = {"T_us", "delta_kHz", "P_sim", "P_markov1", "P_markov2"};
    table.provenance = provenance_for(spec);
    const Harmonic k(spec.harmonic);
    for (std::size_t i = 0; i < grid.size(); ++i)
        table.rows.push_back({grid[i] * 1e6, rad_per_s_to_khz(detuning(grid[i], p, k)),
                              sim.polarisation[i], m1.polarisation[i], m2.polarisation[i]});
    table.validate();
    return table;
}

} // namespace

std::string_view command_name(Command c) {
    switch (c) {
    case Command::kEnvelope:
        return "envelope";
    case Command::kConvergenceMap:
        return "convergence-map";
    case Command::kHarmonics:
        return "harmonics";
    case Command::kStrongCoupling:
        return "strong-coupling";
    case Command::kRates:
        return "rates";
    }
    return "?";
}

std::optional<Command> parse_command(std::string_view name) {
    for (Command c : {Command::kEnvelope, Command::kConvergenceMap, Command::kHarmonics,
                      Command::kStrongCoupling, Command::kRates})
        if (command_name(c) == name)
            return c;
    return std::nullopt;
}

RunSpec RunSpec::defaults(Command c) {
    RunSpec s;
    s.command = c;
    switch (c) {
    case Command::kEnvelope: // detuned spin, Larmor-matched T = 3 pi / wL near 3.505 us
        s.az_khz = 30.0;
        s.ax_khz = 10.0;
        s.t_min_us = 3.0;
        s.t_max_us = 4.0;
        s.t_steps = 501;
        break;
    case Command::kConvergenceMap:
        s.az_khz = -50.0;
        s.ax_khz = 9.0;
        s.reps = 200000;
        s.t_min_us = 3.15;
        s.t_max_us = 3.47;
        s.t_steps = 161;
        break;
    case Command::kHarmonics: // k = 1, 3, 5 resonances near 1.15, 3.46, 5.76 us
        s.az_khz = -10.0;
        s.ax_khz = 60.0;
        s.reps = 1;
        s.t_min_us = 0.8;
        s.t_max_us = 6.5;
        s.t_steps = 2851;
        break;
    case Command::kStrongCoupling:
        s.az_khz = -10.0;
        s.ax_khz = 60.0;
        s.reps = 200000;
        s.t_min_us = 2.8;
        s.t_max_us = 4.2;
        s.t_steps = 1401;
        break;
    case Command::kRates: // |delta| / 2 pi <= 5 kHz around T_r
        s.az_khz = -50.0;
        s.ax_khz = 9.0;
        s.t_min_us = 3.27;
        s.t_max_us = 3.36;
        s.t_steps = 91;
        break;
    }
    return s;
}

double RunSpec::effective_larmor_khz() const {
    return b0_gauss ? *b0_gauss * kKhzPerGauss : larmor_khz;
}

SystemParams RunSpec::params() const {
    return SystemParams::from_khz(effective_larmor_khz(), az_khz, ax_khz);
}

std::vector<double> RunSpec::periods() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t_steps));
    if (t_steps == 1) {
        out.push_back(t_min_us * 1e-6);
        return out;
    }
    const double step = (t_max_us - t_min_us) / (t_steps - 1);
    for (int i = 0; i < t_steps; ++i)
        out.push_back((i + 1 == t_steps ? t_max_us : t_min_us + i * step) * 1e-6);
    return out;
}

void RunSpec::validate() const {
    auto require = [](bool ok, const char *what) {
        if (!ok)
            throw InvalidArgument(what);
    };
    for (double v : {larmor_khz, az_khz, ax_khz, t_min_us, t_max_us, p0})
        require(std::isfinite(v), "physical values must be finite");
    if (b0_gauss)
        require(std::isfinite(*b0_gauss) && *b0_gauss > 0.0, "b0-gauss must be positive");
    require(effective_larmor_khz() > 0.0, "larmor-khz must be positive");
    require(n_p >= 1, "np must be at least 1");
    require(t_min_us > 0.0, "t-min-us must be positive");
    require(t_min_us < t_max_us, "t-min-us must be below t-max-us");
    require(t_steps >= 1 && t_steps <= kMaxSteps, "t-steps must lie in [1, 1000000]");
    require(harmonic == 1 || harmonic == 3 || harmonic == 5, "harmonic must be 1, 3 or 5");
    require(order == 1 || order == 2, "order must be 1 or 2");
    require(p0 >= -1.0 && p0 <= 1.0, "p0 must lie in [-1, 1]");
    if (command == Command::kConvergenceMap)
        require(reps.has_value(), "convergence-map needs a finite reps");
}

void apply_setting(RunSpec &spec, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "larmor-khz") {
        spec.larmor_khz = parse_double(key, value);
        spec.b0_gauss.reset();
    } else if (key == "b0-gauss") {
        spec.b0_gauss = parse_double(key, value);
    } else if (key == "az-khz") {
        spec.az_khz = parse_double(key, value);
    } else if (key == "ax-khz") {
        spec.ax_khz = parse_double(key, value);
    } else if (key == "np") {
        spec.n_p = parse_int<int>(key, value);
    } else if (key == "reps") {
        if (value == "inf")
            spec.reps.reset();
        else
            spec.reps = parse_int<std::uint64_t>(key, value);
    } else if (key == "t-min-us") {
        spec.t_min_us = parse_double(key, value);
    } else if (key == "t-max-us") {
        spec.t_max_us = parse_double(key, value);
    } else if (key == "t-steps") {
        spec.t_steps = parse_int<int>(key, value);
    } else if (key == "harmonic") {
        spec.harmonic = parse_int<int>(key, value);
    } else if (key == "order") {
        spec.order = parse_int<int>(key, value);
    } else if (key == "p0") {
        spec.p0 = parse_double(key, value);
    } else if (key == "out") {
        spec.out = std::string(value);
    } else if (key == "threads") {
        spec.threads = parse_int<unsigned>(key, value);
    } else if (key == "plot-script") {
        if (value != "true" && value != "false")
            throw InvalidArgument("plot-script: expected true or false");
        spec.plot_script = value == "true";
    } else {
        throw InvalidArgument("unknown setting '" + std::string(key) + "'");
    }
}

void apply_config(RunSpec &spec, std::istream &in) {
    std::string line;
    int line_no = 0;
    bool saw_larmor = false, saw_b0 = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty())
            continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string_view key = trim(view.substr(0, eq));
        saw_larmor |= key == "larmor-khz";
        saw_b0 |= key == "b0-gauss";
        try {
            apply_setting(spec, key, view.substr(eq + 1));
        } catch (const InvalidArgument &e) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (saw_larmor && saw_b0)
        throw InvalidArgument("config sets both larmor-khz and b0-gauss");
}

void apply_config_file(RunSpec &spec, const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open config file '" + path + "'");
    apply_config(spec, in);
}

void ResultTable::validate() const {
    for (const auto &row : rows)
        if (row.size() != columns.size())
            throw InvariantViolation("ResultTable: ragged row");
}

std::vector<std::string> provenance_for(const RunSpec &spec) {
    std::vector<std::string> lines;
    lines.push_back("pulsepol-dnp " + std::string(kToolVersion));
    lines.push_back("command=" + std::string(command_name(spec.command)));
    lines.push_back(format_kv("larmor-khz", spec.effective_larmor_khz()));
    if (spec.b0_gauss)
        lines.push_back(format_kv("b0-gauss", *spec.b0_gauss));
    lines.push_back(format_kv("az-khz", spec.az_khz));
    lines.push_back(format_kv("ax-khz", spec.ax_khz));
    lines.push_back("np=" + std::to_string(spec.n_p));
    lines.push_back("reps=" + (spec.reps ? std::to_string(*spec.reps) : std::string("inf")));
    lines.push_back(format_kv("t-min-us", spec.t_min_us));
    lines.push_back(format_kv("t-max-us", spec.t_max_us));
    lines.push_back("t-steps=" + std::to_string(spec.t_steps));
    lines.push_back("harmonic=" + std::to_string(spec.harmonic));
    lines.push_back("order=" + std::to_string(spec.order));
    lines.push_back(format_kv("p0", spec.p0));
    lines.push_back("model=pseudospin{0,-1} fresh=|0> rabi-prefactor=full-transfer g2=g5");
    return lines;
}

ResultTable cmd_envelope(const RunSpec &spec) { return envelope_table(spec); }

ResultTable cmd_strong_coupling(const RunSpec &spec) { return envelope_table(spec); }

std::vector<std::uint64_t> log_spaced_reps(std::uint64_t r_max) {
    std::vector<std::uint64_t> out{0};
    for (int i = 0;; ++i) {
        const auto r = static_cast<std::uint64_t>(std::llround(std::pow(10.0, i / 8.0)));
        if (r >= r_max)
            break;
        if (r > out.back())
            out.push_back(r);
    }
    if (r_max > out.back())
        out.push_back(r_max);
    return out;
}

ResultTable cmd_convergence_map(const RunSpec &spec) {
    spec.validate();
    const SystemParams p = spec.params();
    const std::vector<double> grid = spec.periods();
    const std::vector<std::uint64_t> reps = log_spaced_reps(*spec.reps);
    const BlochVector b0{0.0, 0.0, spec.p0};

    std::vector<std::vector<double>> per_t(grid.size());
    parallel_for_index(grid.size(), spec.threads, [&](std::size_t i) {
        const RepetitionChannel e = extract_channel(p, grid[i], spec.n_p);
        per_t[i].reserve(reps.size());
        for (std::uint64_t r : reps)
            per_t[i].push_back(fast_forward(e, r, b0).z);
    });

    ResultTable table;
    table.columns = {"T_us", "R", "P"};
    table.provenance = provenance_for(spec);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < reps.size(); ++j) {
            const double v = per_t[i][j];
            if (!(std::abs(v) <= 1.0 + 1e-9))
                throw InvariantViolation("convergence map: |P| > 1");
            table.rows.push_back({grid[i] * 1e6, static_cast<double>(reps[j]), v});
        }
    table.validate();
    return table;
}

ResultTable cmd_harmonics(const RunSpec &spec) {
    spec.validate();
    const std::vector<double> grid = spec.periods();
    const PolarisationTrace sim = envelope_sweep(spec.params(), grid, sweep_options(spec));
    ResultTable table;
    table.columns = {"T_us", "P"};
    table.provenance = provenance_for(spec);
    for (std::size_t i = 0; i < grid.size(); ++i)
        table.rows.push_back({grid[i] * 1e6, sim.polarisation[i]});
    table.validate();
    return table;
}

ResultTable cmd_rates(const RunSpec &spec) {
    spec.validate();
    const SystemParams p = spec.params();
    const std::vector<double> grid = spec.periods();
    std::vector<TransitionProbs> measured(grid.size());
    parallel_for_index(grid.size(), spec.threads, [&](std::size_t i) {
        measured[i] = transition_probs_measured(extract_channel(p, grid[i], spec.n_p));
    });
    const AnalyticModel model{spec.order == 1 ? ModelOrder::kFirst : ModelOrder::kSecond};
    const Harmonic k(spec.harmonic);

    ResultTable table;
    table.columns = {"T_us",        "delta_kHz",    "r_plus_sim",
                     "r_minus_sim", "r_plus_model", "r_minus_model"};
    table.provenance = provenance_for(spec);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const TwoStateChain a = analytic_rates(p, grid[i], spec.n_p, model);
        const TransitionProbs &m = measured[i];
        for (double r : {m.r_plus, m.r_minus})
            if (!(r >= -1e-9 && r <= 1.0 + 1e-9))
                throw InvariantViolation("rates: transition probability outside [0, 1]");
        table.rows.push_back({grid[i] * 1e6, rad_per_s_to_khz(detuning(grid[i], p, k)), m.r_plus,
                              m.r_minus, a.r_plus, a.r_minus});
    }
    table.validate();
    return table;
}

ResultTable run(const RunSpec &spec) {
    switch (spec.command) {
    case Command::kEnvelope:
        return cmd_envelope(spec);
    case Command::kConvergenceMap:
        return cmd_convergence_map(spec);
    case Command::kHarmonics:
        return cmd_harmonics(spec);
    case Command::kStrongCoupling:
        return cmd_strong_coupling(spec);
    case Command::kRates:
        return cmd_rates(spec);
    }
    throw InvalidArgument("unknown command");
}

std::string format_number(double v) {
    if (v == 0.0)
        v = 0.0; // fold -0 so output is sign-stable
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_csv(std::ostream &out, const ResultTable &table) {
    table.validate();
    for (const auto &line : table.provenance)
        out << "# " << line << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

std::string plot_script(const RunSpec &spec, const ResultTable &table, const std::string &csv_path) {
    std::ostringstream s;
    s << "# gnuplot script for " << csv_path << "\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 'T (us)'\n";
    if (spec.command == Command::kConvergenceMap) {
        s << "set ylabel 'R'\nset logscale y\nset cblabel 'P'\nset view map\n"
          << "splot '" << csv_path << "' using 1:($2 > 0 ? $2 : 1/0):3 with points palette pt 5 ps 0.5 notitle\n";
    } else {
        s << "set ylabel '" << (spec.command == Command::kRates ? "r" : "P") << "'\n";
        const std::size_t first = spec.command == Command::kHarmonics ? 2 : 3;
        s << "plot ";
        for (std::size_t c = first; c <= table.columns.size(); ++c)
            s << (c > first ? ", \\\n     " : "") << "'" << csv_path << "' using 1:" << c
              << " with lines";
        s << "\n";
    }
    s << "pause mouse close\n";
    return s.str();
}

void write_file_atomically(const std::string &path, const std::string &text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InvalidArgument("cannot write '" + path + "'");
        out << text;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw InvalidArgument("write failed for '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InvalidArgument("cannot rename into '" + path + "': " + ec.message());
    }
}

} // namespace pulsepol::sweeps
