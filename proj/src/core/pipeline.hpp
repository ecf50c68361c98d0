#ifndef HEMTFIT_PIPELINE_HPP
#define HEMTFIT_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "classify.hpp"
#include "datasets.hpp"
#include "device.hpp"
#include "netlist.hpp"
#include "search_space.hpp"
#include "tpe.hpp"

namespace hemtfit::pipeline {

inline constexpr const char* kVersionString = "0.1.0";

/// Device-independent DC search space: broad, physically sensible
/// bounds, identical for every device (no per-device priors).
SearchSpace default_dc_space();
/// Same idea for the small-signal stage.
SearchSpace default_rf_space();

/// Canonical parameter orders used for theta vectors, trace CSV
/// columns and netlists.
const std::vector<std::string>& dc_param_names();
const std::vector<std::string>& rf_param_names();

device::DCParams dc_params_from_theta(const std::vector<double>& theta, const SearchSpace& space);
std::vector<double> theta_from_dc_params(const device::DCParams& p, const SearchSpace& space);
device::SmallSignalParams rf_params_from_theta(const std::vector<double>& theta,
                                               const SearchSpace& space);
std::vector<double> theta_from_rf_params(const device::SmallSignalParams& p,
                                         const SearchSpace& space);

/// Search space from a JSON array of {name, lower, upper, scale}.
/// The file must cover exactly the canonical parameter set it
/// replaces (any order).
SearchSpace load_space_json(const std::string& path, const std::vector<std::string>& required);

enum class EvaluatorKind { Surrogate, External };

struct PipelineConfig {
    std::string device_name = "device";

    // input
    std::string iv_csv;
    std::string iv_image, iv_calibration, iv_labels;
    Scale iv_x_scale = Scale::Linear;
    Scale iv_y_scale = Scale::Linear;
    std::string sparam_table;

    // optional search-space overrides
    std::string dc_space_file, rf_space_file;

    // optimizer (DC stage uses max_batches; the RF stage gets its own
    // batch count so its budget can stretch to the paper scale)
    tpe::OptimizerConfig opt;
    int rf_max_batches = 36;

    // evaluator
    EvaluatorKind evaluator = EvaluatorKind::Surrogate;
    std::string external_command;    // {netlist} and {points} placeholders
    std::string external_rf_command; // defaults to external_command
    double external_timeout_s = 60.0;

    classify::LlmConfig llm; // endpoint "" = classification off

    std::string output_dir = "out";
    bool asm_names = false;

    /// Hash of the config file this came from; empty for configs built
    /// programmatically. Copied into the report for provenance.
    std::string config_hash;

    void validate() const;
};

/// Reads the TOML-style `[section]` / `key = value` config file.
/// Unknown sections or keys are errors.
PipelineConfig load_pipeline_config(const std::string& path);

struct DcStageResult {
    device::DCParams params;
    double rmse = 0.0;
    double nrmse_pct = 0.0;
    long iterations = 0;
    tpe::History history;
    SearchSpace space;
};

struct RfStageResult {
    device::SmallSignalParams params;
    double rmse = 0.0;
    double nrmse_pct = 0.0;
    long iterations = 0;
    tpe::History history;
    SearchSpace space;
};

/// Minimizes the IV RMSE over the DC space with the configured
/// evaluator. Throws Error when the dataset is empty or every
/// evaluation failed.
DcStageResult run_dc_stage(const IVDataset& iv, const PipelineConfig& cfg);

/// Minimizes the (mask-aware) S-parameter RMSE over the RF space.
/// `dc` provides the DC half of the netlist sent to an external
/// simulator; the surrogate path does not need it.
RfStageResult run_rf_stage(const SParamDataset& sp, const PipelineConfig& cfg,
                           const device::DCParams& dc = {});

/// Flat report mirroring the per-device result columns plus
/// provenance. s_nrmse_pct stays absent when no S data was fitted.
struct ExtractionReport {
    std::string device;
    bool doc_success = false;
    std::optional<double> iv_nrmse_pct;
    std::optional<double> s_nrmse_pct;
    long iterations = 0;
    double wall_time_s = 0.0;
    std::map<std::string, double> dc_params;
    std::map<std::string, double> rf_params;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersionString;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return doc_success && errors.empty(); }
};

std::string report_to_json(const ExtractionReport& r);
ExtractionReport report_from_json(const std::string& text);

struct PipelineOutcome {
    ExtractionReport report;
    std::string report_path;
    std::string netlist_path; // empty if the model card was never written
};

/// The full run: ingest -> DC stage -> RF stage (when S data exists)
/// -> netlist + report + trace/plot CSV artifacts, all inside
/// cfg.output_dir. Ingest or stage failures are recorded in the
/// report (doc_success=false for ingest) instead of thrown;
/// outcome.report.ok() tells the caller whether to exit nonzero.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

struct TraceSummary {
    std::vector<std::string> param_names;
    std::size_t trials = 0;
    int batches = 0; // highest batch label + 1
    std::size_t finite_trials = 0;
    std::size_t failed_trials = 0;
    double best_loss = kInf;
    std::size_t best_trial = 0;
    std::vector<double> best_by_batch; // running best after each batch
};

TraceSummary summarize_trace_csv(const std::string& path);
std::string format_trace_summary(const TraceSummary& s);

/// FNV-1a hash of a file's bytes, as fixed-width hex (provenance).
std::string file_hash_hex(const std::string& path);

} // namespace hemtfit::pipeline

#endif
