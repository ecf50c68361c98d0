#include "hemtfit/hemtfit.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "datasets.hpp"
#include "digitize.hpp"
#include "netlist.hpp"
#include "pipeline.hpp"
#include "raster.hpp"
#include "search_space.hpp"
#include "sparam_io.hpp"
#include "tpe.hpp"
#include "twoport.hpp"

using namespace hemtfit;

extern "C" {

struct hemtfit_space {
    std::vector<ParamSpec> specs;
};

struct hemtfit_result {
    tpe::OptimizeResult res;
    std::vector<ParamSpec> specs; // for trace export
};

} // extern "C"

namespace {

thread_local std::string g_last_error;

hemtfit_status set_error(hemtfit_status st, const std::string& msg) {
    g_last_error = msg;
    return st;
}

// Uniform exception-to-status translation at the C boundary.
template <typename Fn>
hemtfit_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, e.what());
    } catch (const ParseError& e) {
        return set_error(HEMTFIT_ERR_PARSE, e.what());
    } catch (const EvalFailure& e) {
        return set_error(HEMTFIT_ERR_EVAL, e.what());
    } catch (const std::exception& e) {
        return set_error(HEMTFIT_ERR_RUNTIME, e.what());
    } catch (...) {
        return set_error(HEMTFIT_ERR_RUNTIME, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Scale parse_scale(const char* s) {
    if (!s || std::strcmp(s, "linear") == 0) return Scale::Linear;
    if (std::strcmp(s, "log10") == 0) return Scale::Log10;
    throw std::invalid_argument("scale must be \"linear\" or \"log10\"");
}

} // namespace

extern "C" {

const char* hemtfit_version(void) { return pipeline::kVersionString; }

const char* hemtfit_last_error(void) { return g_last_error.c_str(); }

void hemtfit_string_free(char* s) { std::free(s); }

/* ---- search space ------------------------------------------------ */

hemtfit_status hemtfit_space_create(hemtfit_space** out) {
    return guarded([&] {
        if (!out) return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "out must not be NULL");
        *out = new hemtfit_space{};
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_space_add(hemtfit_space* space, const char* name, double lower,
                                 double upper, int log10_scale) {
    return guarded([&] {
        if (!space || !name)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "space and name must not be NULL");
        std::vector<ParamSpec> probe = space->specs;
        probe.push_back({name, lower, upper, log10_scale ? Scale::Log10 : Scale::Linear});
        SearchSpace validate(probe); // throws on bad bounds or duplicates
        space->specs = std::move(probe);
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_space_default_dc(hemtfit_space** out) {
    return guarded([&] {
        if (!out) return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "out must not be NULL");
        *out = new hemtfit_space{pipeline::default_dc_space().specs()};
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_space_default_rf(hemtfit_space** out) {
    return guarded([&] {
        if (!out) return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "out must not be NULL");
        *out = new hemtfit_space{pipeline::default_rf_space().specs()};
        return HEMTFIT_OK;
    });
}

size_t hemtfit_space_dimension(const hemtfit_space* space) {
    return space ? space->specs.size() : 0;
}

void hemtfit_space_destroy(hemtfit_space* space) { delete space; }

/* ---- optimizer ----------------------------------------------------- */

void hemtfit_optimizer_config_init(hemtfit_optimizer_config* config) {
    if (!config) return;
    const tpe::OptimizerConfig d;
    config->gamma = d.gamma;
    config->n_startup = d.n_startup;
    config->batch_size = d.batch_size;
    config->max_batches = d.max_batches;
    config->delta_init = d.delta_init;
    config->alpha_decay = d.alpha_decay;
    config->n_grid = d.n_grid;
    config->n_candidates = d.n_candidates;
    config->rng_seed = d.rng_seed;
    config->n_threads = d.n_threads;
}

hemtfit_status hemtfit_optimize(const hemtfit_space* space,
                                const hemtfit_optimizer_config* config,
                                hemtfit_objective_fn objective, void* user_data,
                                hemtfit_result** out) {
    return guarded([&] {
        if (!space || !config || !objective || !out)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT,
                             "space, config, objective and out must not be NULL");
        SearchSpace ss(space->specs);
        tpe::OptimizerConfig cfg;
        cfg.gamma = config->gamma;
        cfg.n_startup = config->n_startup;
        cfg.batch_size = config->batch_size;
        cfg.max_batches = config->max_batches;
        cfg.delta_init = config->delta_init;
        cfg.alpha_decay = config->alpha_decay;
        cfg.n_grid = config->n_grid;
        cfg.n_candidates = config->n_candidates;
        cfg.rng_seed = config->rng_seed;
        cfg.n_threads = config->n_threads;

        tpe::Objective obj = [&](const std::vector<double>& theta) {
            return objective(theta.data(), theta.size(), user_data);
        };
        auto* result = new hemtfit_result{tpe::optimize(obj, ss, cfg), space->specs};
        *out = result;
        return HEMTFIT_OK;
    });
}

size_t hemtfit_result_dimension(const hemtfit_result* result) {
    return result ? result->specs.size() : 0;
}

double hemtfit_result_best_loss(const hemtfit_result* result) {
    return result ? result->res.best_loss : kInf;
}

hemtfit_status hemtfit_result_best_theta(const hemtfit_result* result, double* out,
                                         size_t dimension) {
    return guarded([&] {
        if (!result || !out)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "result and out must not be NULL");
        if (dimension != result->res.best_theta.size())
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "dimension mismatch");
        std::memcpy(out, result->res.best_theta.data(), dimension * sizeof(double));
        return HEMTFIT_OK;
    });
}

size_t hemtfit_result_trial_count(const hemtfit_result* result) {
    return result ? result->res.history.size() : 0;
}

hemtfit_status hemtfit_result_trial(const hemtfit_result* result, size_t index, double* theta_out,
                                    size_t dimension, double* loss_out, int* batch_out) {
    return guarded([&] {
        if (!result) return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "result must not be NULL");
        const auto& trials = result->res.history.trials();
        if (index >= trials.size())
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "trial index out of range");
        const auto& t = trials[index];
        if (theta_out) {
            if (dimension != t.theta.size())
                return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "dimension mismatch");
            std::memcpy(theta_out, t.theta.data(), dimension * sizeof(double));
        }
        if (loss_out) *loss_out = t.loss;
        if (batch_out) *batch_out = t.batch;
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_result_write_trace_csv(const hemtfit_result* result, const char* path) {
    return guarded([&] {
        if (!result || !path)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "result and path must not be NULL");
        tpe::write_trace_csv(result->res.history, SearchSpace(result->specs), path);
        return HEMTFIT_OK;
    });
}

void hemtfit_result_destroy(hemtfit_result* result) { delete result; }

/* ---- pipeline operations ------------------------------------------- */

hemtfit_status hemtfit_digitize_chart(const char* png_path, const char* calibration_json_path,
                                      const char* labels_json_path, const char* x_scale,
                                      const char* y_scale, const char* out_csv_path,
                                      char** warnings_out) {
    return guarded([&] {
        if (!png_path || !calibration_json_path || !labels_json_path || !out_csv_path)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "paths must not be NULL");
        const Image img = read_png(png_path);
        const auto calib = digitize::load_calibration_json(calibration_json_path);
        const auto labels = digitize::load_labels_json(labels_json_path);
        const auto res =
            digitize::digitize(img, calib, labels, parse_scale(x_scale), parse_scale(y_scale));
        write_iv_csv(res.dataset, out_csv_path);
        if (warnings_out) {
            std::string w;
            for (const auto& s : res.warnings) w += s + "\n";
            *warnings_out = dup_string(w);
        }
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_ingest_sparams(const char* input_path, const char* out_csv_path) {
    return guarded([&] {
        if (!input_path || !out_csv_path)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "paths must not be NULL");
        const SParamDataset ds = sparam::load_sparam_file(input_path);
        write_text_file(out_csv_path, sparam::write_canonical_csv(ds));
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_run_extraction(const char* config_path, const char* output_dir,
                                      int64_t seed, const char* evaluator,
                                      char** report_json_out) {
    return guarded([&] {
        if (!config_path)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "config_path must not be NULL");
        pipeline::PipelineConfig cfg = pipeline::load_pipeline_config(config_path);
        if (output_dir && *output_dir) cfg.output_dir = output_dir;
        if (seed >= 0) cfg.opt.rng_seed = static_cast<uint64_t>(seed);
        if (evaluator && *evaluator) {
            if (std::strcmp(evaluator, "surrogate") == 0)
                cfg.evaluator = pipeline::EvaluatorKind::Surrogate;
            else if (std::strcmp(evaluator, "external") == 0)
                cfg.evaluator = pipeline::EvaluatorKind::External;
            else
                return set_error(HEMTFIT_ERR_INVALID_ARGUMENT,
                                 "evaluator must be \"surrogate\" or \"external\"");
        }
        cfg.validate();
        const pipeline::PipelineOutcome outcome = pipeline::run_pipeline(cfg);
        if (report_json_out) *report_json_out = dup_string(report_to_json(outcome.report));
        if (!outcome.report.ok()) {
            std::string why;
            for (const auto& e : outcome.report.errors) why += (why.empty() ? "" : "; ") + e;
            return set_error(HEMTFIT_ERR_RUNTIME,
                             why.empty() ? "extraction failed" : why);
        }
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_trace_report(const char* trace_csv_path, char** text_out) {
    return guarded([&] {
        if (!trace_csv_path || !text_out)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "arguments must not be NULL");
        *text_out = dup_string(
            pipeline::format_trace_summary(pipeline::summarize_trace_csv(trace_csv_path)));
        return HEMTFIT_OK;
    });
}

hemtfit_status hemtfit_simulate_netlist(const char* netlist_path, const char* points_csv_path,
                                        const char* kind, char** table_out) {
    return guarded([&] {
        if (!netlist_path || !points_csv_path || !table_out)
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT, "arguments must not be NULL");
        const netlist::ModelCard card = netlist::read_netlist(netlist_path);
        const std::string points = read_text_file(points_csv_path);

        std::string k = kind ? kind : "auto";
        if (k == "auto") k = points.find("freq") != std::string::npos ? "sparams" : "iv";

        std::ostringstream out;
        if (k == "iv") {
            const IVDataset grid = iv_from_csv("vgs,vds,id\n" + [&] {
                // points file carries vgs,vds rows; widen to 3 columns
                std::istringstream in(points);
                std::string l, body;
                bool header = true;
                while (std::getline(in, l)) {
                    if (l.empty() || l == "\r") continue;
                    if (header) {
                        header = false;
                        continue;
                    }
                    body += l + ",0\n";
                }
                return body;
            }());
            const IVDataset sim = device::simulate_iv_at(card.dc, grid);
            for (const auto& r : sim.rows)
                out << fmt_double(r.vgs) << " " << fmt_double(r.vds) << " " << fmt_double(r.id)
                    << "\n";
        } else if (k == "sparams") {
            std::vector<double> freqs;
            std::istringstream in(points);
            std::string l;
            bool header = true;
            while (std::getline(in, l)) {
                if (!l.empty() && l.back() == '\r') l.pop_back();
                if (l.empty()) continue;
                if (header) {
                    header = false;
                    continue;
                }
                freqs.push_back(parse_double(l));
            }
            const SParamDataset sim = device::s_params(card.rf, freqs);
            for (const auto& e : sim.entries) {
                out << fmt_double(e.freq_hz);
                for (unsigned i = 0; i < 4; ++i)
                    out << " " << fmt_double(e.s[i].real()) << " " << fmt_double(e.s[i].imag());
                out << "\n";
            }
        } else {
            return set_error(HEMTFIT_ERR_INVALID_ARGUMENT,
                             "kind must be \"iv\", \"sparams\" or \"auto\"");
        }
        *table_out = dup_string(out.str());
        return HEMTFIT_OK;
    });
}

} // extern "C"
