#ifndef HEMTFIT_EXTERNAL_SIM_HPP
#define HEMTFIT_EXTERNAL_SIM_HPP

#include <string>
#include <vector>

#include "datasets.hpp"

namespace hemtfit::extsim {

// Failure kinds are distinct so callers can report them apart; all of
// them read as a failed evaluation (+inf loss) to the optimizer.
struct SpawnError : EvalFailure {
    using EvalFailure::EvalFailure;
};
struct TimeoutError : EvalFailure {
    using EvalFailure::EvalFailure;
};
struct ExitError : EvalFailure {
    using EvalFailure::EvalFailure;
};
struct OutputParseError : EvalFailure {
    using EvalFailure::EvalFailure;
};

struct ExternalSimConfig {
    /// Shell command with `{netlist}` (required) and `{points}`
    /// (optional) placeholders.
    std::string command_template;
    double timeout_s = 60.0;
    /// Where temp netlist/points files go; empty = system temp dir.
    std::string scratch_dir;
};

struct ProcessResult {
    int exit_code = 0;
    bool timed_out = false;
    std::string stdout_text;
};

/// Runs `/bin/sh -c <command>` with a kill-on-timeout deadline,
/// capturing stdout. Throws SpawnError when the process cannot start.
ProcessResult run_process(const std::string& command, double timeout_s);

/// Whitespace-delimited numeric table from simulator stdout; `#`
/// starts a comment. Every row must have `columns` fields.
std::vector<std::vector<double>> parse_sim_table(const std::string& text, std::size_t columns);

/// One external DC simulation: writes the netlist and the requested
/// bias points (`vgs,vds` CSV), runs the command, and expects one
/// `vgs vds id` stdout row per requested point, in order.
IVDataset simulate_iv(const std::string& netlist_text, const IVDataset& points,
                      const ExternalSimConfig& cfg);

/// One external S-parameter simulation: the points file lists one
/// frequency (Hz) per row; stdout rows are `freq s11_re s11_im s21_re
/// s21_im s12_re s12_im s22_re s22_im`.
SParamDataset simulate_sparams(const std::string& netlist_text, const std::vector<double>& freqs_hz,
                               const ExternalSimConfig& cfg);

} // namespace hemtfit::extsim

#endif
