// Command-line front end. Everything goes through the C API of the
// shared library; this translation unit knows nothing about the
// library internals.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "hemtfit/hemtfit.h"

namespace {

int fail(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, hemtfit_last_error());
    return 1;
}

struct FreeString {
    char* s = nullptr;
    ~FreeString() { hemtfit_string_free(s); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hemtfit - HEMT compact-model parameter extraction toolkit"};
    app.set_version_flag("--version", []() { return std::string(hemtfit_version()); });
    app.require_subcommand(1);

    // extract
    std::string config_path, out_dir, evaluator;
    long long seed = -1;
    auto* extract = app.add_subcommand("extract", "Run the full extraction pipeline");
    extract->add_option("--config", config_path, "Pipeline config file (TOML-style)")
        ->required();
    extract->add_option("--seed", seed, "Override the optimizer seed");
    extract->add_option("--evaluator", evaluator, "surrogate or external")
        ->check(CLI::IsMember({"surrogate", "external"}));
    extract->add_option("--out", out_dir, "Override the output directory");

    // digitize
    std::string image_path, calib_path, labels_path, csv_out;
    std::string x_scale = "linear", y_scale = "linear";
    auto* digitize = app.add_subcommand("digitize", "Convert a chart raster to IV data");
    digitize->add_option("--image", image_path, "PNG chart image")->required();
    digitize->add_option("--calib", calib_path, "Calibration sidecar JSON")->required();
    digitize->add_option("--labels", labels_path, "Curve label sidecar JSON")->required();
    digitize->add_option("--out", csv_out, "Output CSV (vgs,vds,id)")->required();
    digitize->add_option("--x-scale", x_scale, "linear or log10")
        ->check(CLI::IsMember({"linear", "log10"}));
    digitize->add_option("--y-scale", y_scale, "linear or log10")
        ->check(CLI::IsMember({"linear", "log10"}));

    // ingest-sparams
    std::string table_path, sp_out;
    auto* ingest = app.add_subcommand("ingest-sparams",
                                      "Normalize an S-parameter table or Touchstone file");
    ingest->add_option("--table", table_path, "Input table (.csv/.tsv/.s2p)")->required();
    ingest->add_option("--out", sp_out, "Output canonical CSV")->required();

    // report
    std::string trace_path;
    auto* report = app.add_subcommand("report", "Summarize an optimizer trace CSV");
    report->add_option("--trace", trace_path, "Trace CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (extract->parsed()) {
        FreeString report_json;
        const hemtfit_status st = hemtfit_run_extraction(
            config_path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), seed,
            evaluator.empty() ? nullptr : evaluator.c_str(), &report_json.s);
        if (report_json.s) std::fputs(report_json.s, stdout);
        if (st != HEMTFIT_OK) return fail("extract");
        return 0;
    }
    if (digitize->parsed()) {
        FreeString warnings;
        const hemtfit_status st =
            hemtfit_digitize_chart(image_path.c_str(), calib_path.c_str(), labels_path.c_str(),
                                   x_scale.c_str(), y_scale.c_str(), csv_out.c_str(),
                                   &warnings.s);
        if (st != HEMTFIT_OK) return fail("digitize");
        if (warnings.s && *warnings.s) std::fprintf(stderr, "%s", warnings.s);
        std::printf("wrote %s\n", csv_out.c_str());
        return 0;
    }
    if (ingest->parsed()) {
        if (hemtfit_ingest_sparams(table_path.c_str(), sp_out.c_str()) != HEMTFIT_OK)
            return fail("ingest-sparams");
        std::printf("wrote %s\n", sp_out.c_str());
        return 0;
    }
    if (report->parsed()) {
        FreeString text;
        if (hemtfit_trace_report(trace_path.c_str(), &text.s) != HEMTFIT_OK)
            return fail("report");
        std::fputs(text.s, stdout);
        return 0;
    }
    return 1;
}
