#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "digitize.hpp"
#include "external_sim.hpp"
#include "objective.hpp"
#include "raster.hpp"
#include "sparam_io.hpp"
#include "twoport.hpp"

namespace hemtfit::pipeline {

namespace fs = std::filesystem;

SearchSpace default_dc_space() {
    return SearchSpace({
        {"VOFF", -10.0, 5.0, Scale::Linear},
        {"NFACTOR", 0.5, 5.0, Scale::Linear},
        {"KGAIN", 1e-4, 1e2, Scale::Log10},
        {"UA", 0.0, 2.0, Scale::Linear},
        {"UB", 0.0, 1.0, Scale::Linear},
        {"DELTA", 1.0, 10.0, Scale::Linear},
        {"LAMBDA", 0.0, 0.5, Scale::Linear},
        {"RSC", 1e-2, 1e2, Scale::Log10},
        {"RDC", 1e-2, 1e2, Scale::Log10},
    });
}

SearchSpace default_rf_space() {
    return SearchSpace({
        {"GM", 1e-4, 10.0, Scale::Log10},
        {"TAU", 0.0, 1e-11, Scale::Linear},
        {"GDS", 1e-6, 1.0, Scale::Log10},
        {"CGS", 1e-15, 1e-10, Scale::Log10},
        {"CGD", 1e-15, 1e-10, Scale::Log10},
        {"CDS", 1e-15, 1e-10, Scale::Log10},
        {"RI", 1e-2, 1e2, Scale::Log10},
        {"RG", 1e-2, 1e2, Scale::Log10},
        {"RD", 1e-2, 1e2, Scale::Log10},
        {"RS", 1e-2, 1e2, Scale::Log10},
        {"LG", 1e-12, 1e-8, Scale::Log10},
        {"LD", 1e-12, 1e-8, Scale::Log10},
        {"LS", 1e-12, 1e-8, Scale::Log10},
        {"CPG", 1e-15, 1e-11, Scale::Log10},
        {"CPD", 1e-15, 1e-11, Scale::Log10},
    });
}

const std::vector<std::string>& dc_param_names() {
    static const std::vector<std::string> names = {"VOFF", "NFACTOR", "KGAIN", "UA", "UB",
                                                   "DELTA", "LAMBDA", "RSC", "RDC"};
    return names;
}

const std::vector<std::string>& rf_param_names() {
    static const std::vector<std::string> names = {"GM", "TAU", "GDS", "CGS", "CGD",
                                                   "CDS", "RI", "RG", "RD", "RS",
                                                   "LG", "LD", "LS", "CPG", "CPD"};
    return names;
}

namespace {

std::map<std::string, double> theta_by_name(const std::vector<double>& theta,
                                            const SearchSpace& space) {
    if (theta.size() != space.size()) throw Error("theta dimension mismatch");
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < theta.size(); ++i) out[space[i].name] = theta[i];
    return out;
}

double named(const std::map<std::string, double>& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw Error("search space lacks parameter '" + key + "'");
    return it->second;
}

} // namespace

device::DCParams dc_params_from_theta(const std::vector<double>& theta,
                                      const SearchSpace& space) {
    const auto m = theta_by_name(theta, space);
    device::DCParams p;
    p.voff = named(m, "VOFF");
    p.nfactor = named(m, "NFACTOR");
    p.kgain = named(m, "KGAIN");
    p.ua = named(m, "UA");
    p.ub = named(m, "UB");
    p.delta = named(m, "DELTA");
    p.lambda = named(m, "LAMBDA");
    p.rsc = named(m, "RSC");
    p.rdc = named(m, "RDC");
    return p;
}

std::vector<double> theta_from_dc_params(const device::DCParams& p, const SearchSpace& space) {
    std::map<std::string, double> m = {{"VOFF", p.voff},   {"NFACTOR", p.nfactor},
                                       {"KGAIN", p.kgain}, {"UA", p.ua},
                                       {"UB", p.ub},       {"DELTA", p.delta},
                                       {"LAMBDA", p.lambda}, {"RSC", p.rsc},
                                       {"RDC", p.rdc}};
    std::vector<double> theta(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) theta[i] = named(m, space[i].name);
    return theta;
}

device::SmallSignalParams rf_params_from_theta(const std::vector<double>& theta,
                                               const SearchSpace& space) {
    const auto m = theta_by_name(theta, space);
    device::SmallSignalParams p;
    p.gm = named(m, "GM");
    p.tau = named(m, "TAU");
    p.gds = named(m, "GDS");
    p.cgs = named(m, "CGS");
    p.cgd = named(m, "CGD");
    p.cds = named(m, "CDS");
    p.ri = named(m, "RI");
    p.rg = named(m, "RG");
    p.rd = named(m, "RD");
    p.rs = named(m, "RS");
    p.lg = named(m, "LG");
    p.ld = named(m, "LD");
    p.ls = named(m, "LS");
    p.cpg = named(m, "CPG");
    p.cpd = named(m, "CPD");
    return p;
}

std::vector<double> theta_from_rf_params(const device::SmallSignalParams& p,
                                         const SearchSpace& space) {
    std::map<std::string, double> m = {{"GM", p.gm},   {"TAU", p.tau}, {"GDS", p.gds},
                                       {"CGS", p.cgs}, {"CGD", p.cgd}, {"CDS", p.cds},
                                       {"RI", p.ri},   {"RG", p.rg},   {"RD", p.rd},
                                       {"RS", p.rs},   {"LG", p.lg},   {"LD", p.ld},
                                       {"LS", p.ls},   {"CPG", p.cpg}, {"CPD", p.cpd}};
    std::vector<double> theta(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) theta[i] = named(m, space[i].name);
    return theta;
}

SearchSpace load_space_json(const std::string& path, const std::vector<std::string>& required) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad JSON in '") + path + "': " + e.what());
    }
    if (!j.is_array()) throw ParseError("search-space file must be a JSON array");
    std::vector<ParamSpec> specs;
    for (const auto& e : j) {
        ParamSpec s;
        s.name = e.at("name").get<std::string>();
        s.lower = e.at("lower").get<double>();
        s.upper = e.at("upper").get<double>();
        const std::string sc = e.value("scale", "linear");
        if (sc == "linear")
            s.scale = Scale::Linear;
        else if (sc == "log10")
            s.scale = Scale::Log10;
        else
            throw ParseError("scale must be \"linear\" or \"log10\"");
        specs.push_back(s);
    }
    SearchSpace space(std::move(specs));
    // The stage mapping is by name, so the file must cover the
    // canonical set exactly.
    if (space.size() != required.size())
        throw Error("'" + path + "': expected " + std::to_string(required.size()) +
                    " parameters");
    for (const auto& name : required) {
        bool found = false;
        for (std::size_t i = 0; i < space.size(); ++i) found = found || space[i].name == name;
        if (!found) throw Error("'" + path + "': missing parameter '" + name + "'");
    }
    return space;
}

void PipelineConfig::validate() const {
    opt.validate();
    if (device_name.empty()) throw std::invalid_argument("device name must be nonempty");
    const bool csv = !iv_csv.empty(), img = !iv_image.empty();
    if (csv == img)
        throw std::invalid_argument("config must name exactly one IV input (iv_csv or iv_image)");
    if (img && (iv_calibration.empty() || iv_labels.empty()))
        throw std::invalid_argument("chart input needs iv_calibration and iv_labels sidecars");
    if (rf_max_batches < 1) throw std::invalid_argument("rf_max_batches must be >= 1");
    if (evaluator == EvaluatorKind::External && external_command.empty())
        throw std::invalid_argument("external evaluator needs a command template");
    if (!(external_timeout_s > 0.0)) throw std::invalid_argument("timeout must be > 0");
    if (output_dir.empty()) throw std::invalid_argument("output directory must be nonempty");
}

namespace {

struct RawConfig {
    // section -> key -> (value, consumed)
    std::map<std::string, std::map<std::string, std::pair<std::string, bool>>> sections;
    std::string dir; // for resolving relative paths
};

RawConfig parse_config_text(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // strip comments outside quotes
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line.erase(i);
                break;
            }
        }
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("malformed section header", line_no);
            section = line.substr(1, line.size() - 2);
            if (section.empty()) throw ParseError("empty section name", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b2 = s.find_first_not_of(" \t");
            const auto e2 = s.find_last_not_of(" \t");
            s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(val);
        if (key.empty()) throw ParseError("empty key", line_no);
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        if (section.empty()) throw ParseError("key outside any [section]", line_no);
        raw.sections[section][key] = {val, false};
    }
    return raw;
}

class ConfigReader {
  public:
    explicit ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return {};
        auto k = s->second.find(key);
        if (k == s->second.end()) return {};
        k->second.second = true;
        return k->second.first;
    }
    std::string get_or(const std::string& s, const std::string& k, std::string dflt) {
        auto v = get(s, k);
        return v ? *v : dflt;
    }
    std::string get_path(const std::string& s, const std::string& k) {
        auto v = get(s, k);
        if (!v || v->empty()) return "";
        fs::path p(*v);
        return p.is_absolute() ? p.string() : (fs::path(raw_.dir) / p).string();
    }
    double get_num(const std::string& s, const std::string& k, double dflt) {
        auto v = get(s, k);
        return v ? parse_double(*v) : dflt;
    }
    bool get_bool(const std::string& s, const std::string& k, bool dflt) {
        auto v = get(s, k);
        if (!v) return dflt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw Error("config " + s + "." + k + " must be true or false");
    }
    Scale get_scale(const std::string& s, const std::string& k, Scale dflt) {
        auto v = get(s, k);
        if (!v) return dflt;
        if (*v == "linear") return Scale::Linear;
        if (*v == "log10") return Scale::Log10;
        throw Error("config " + s + "." + k + " must be linear or log10");
    }
    void reject_unknown() const {
        for (const auto& [sec, keys] : raw_.sections)
            for (const auto& [key, vc] : keys)
                if (!vc.second) throw Error("unknown config key '" + sec + "." + key + "'");
    }
    const std::string& dir() const { return raw_.dir; }

  private:
    RawConfig raw_;
};

} // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    RawConfig raw = parse_config_text(read_text_file(path));
    raw.dir = fs::path(path).has_parent_path() ? fs::path(path).parent_path().string() : ".";
    ConfigReader r(std::move(raw));

    PipelineConfig cfg;
    cfg.device_name = r.get_or("device", "name", "device");

    cfg.iv_csv = r.get_path("input", "iv_csv");
    cfg.iv_image = r.get_path("input", "iv_image");
    cfg.iv_calibration = r.get_path("input", "iv_calibration");
    cfg.iv_labels = r.get_path("input", "iv_labels");
    cfg.iv_x_scale = r.get_scale("input", "iv_x_scale", Scale::Linear);
    cfg.iv_y_scale = r.get_scale("input", "iv_y_scale", Scale::Linear);
    cfg.sparam_table = r.get_path("input", "sparam_table");

    cfg.dc_space_file = r.get_path("space", "dc");
    cfg.rf_space_file = r.get_path("space", "rf");

    cfg.opt.rng_seed = static_cast<std::uint64_t>(r.get_num("optimizer", "seed", 1));
    cfg.opt.gamma = r.get_num("optimizer", "gamma", cfg.opt.gamma);
    cfg.opt.n_startup = static_cast<int>(r.get_num("optimizer", "n_startup", cfg.opt.n_startup));
    cfg.opt.batch_size =
        static_cast<int>(r.get_num("optimizer", "batch_size", cfg.opt.batch_size));
    cfg.opt.max_batches =
        static_cast<int>(r.get_num("optimizer", "max_batches", cfg.opt.max_batches));
    cfg.rf_max_batches =
        static_cast<int>(r.get_num("optimizer", "rf_max_batches", cfg.rf_max_batches));
    cfg.opt.delta_init = r.get_num("optimizer", "delta_init", cfg.opt.delta_init);
    cfg.opt.alpha_decay = r.get_num("optimizer", "alpha_decay", cfg.opt.alpha_decay);
    cfg.opt.n_grid = static_cast<int>(r.get_num("optimizer", "n_grid", cfg.opt.n_grid));
    cfg.opt.n_candidates =
        static_cast<int>(r.get_num("optimizer", "n_candidates", cfg.opt.n_candidates));
    cfg.opt.n_threads = static_cast<int>(r.get_num("optimizer", "n_threads", cfg.opt.n_threads));

    const std::string kind = r.get_or("evaluator", "kind", "surrogate");
    if (kind == "surrogate")
        cfg.evaluator = EvaluatorKind::Surrogate;
    else if (kind == "external")
        cfg.evaluator = EvaluatorKind::External;
    else
        throw Error("evaluator.kind must be surrogate or external");
    cfg.external_command = r.get_or("evaluator", "command", "");
    cfg.external_rf_command = r.get_or("evaluator", "rf_command", "");
    cfg.external_timeout_s = r.get_num("evaluator", "timeout_s", cfg.external_timeout_s);

    cfg.llm.endpoint = r.get_or("llm", "endpoint", "");
    cfg.llm.api_key_env = r.get_or("llm", "api_key_env", cfg.llm.api_key_env);
    cfg.llm.timeout_s = r.get_num("llm", "timeout_s", cfg.llm.timeout_s);

    // Output lands next to the config unless overridden with an
    // absolute path (or by the CLI).
    cfg.output_dir = r.get_path("output", "dir");
    if (cfg.output_dir.empty()) cfg.output_dir = (fs::path(r.dir()) / "out").string();
    cfg.asm_names = r.get_bool("output", "asm_names", false);

    r.reject_unknown();
    cfg.config_hash = file_hash_hex(path);
    cfg.validate();
    return cfg;
}

namespace {

SearchSpace stage_dc_space(const PipelineConfig& cfg) {
    return cfg.dc_space_file.empty() ? default_dc_space()
                                     : load_space_json(cfg.dc_space_file, dc_param_names());
}

SearchSpace stage_rf_space(const PipelineConfig& cfg) {
    return cfg.rf_space_file.empty() ? default_rf_space()
                                     : load_space_json(cfg.rf_space_file, rf_param_names());
}

std::vector<double> meas_freqs(const SParamDataset& sp) {
    std::vector<double> f;
    f.reserve(sp.entries.size());
    for (const auto& e : sp.entries) f.push_back(e.freq_hz);
    return f;
}

} // namespace

DcStageResult run_dc_stage(const IVDataset& iv, const PipelineConfig& cfg) {
    if (iv.empty()) throw std::invalid_argument("DC stage needs a nonempty IV dataset");
    SearchSpace space = stage_dc_space(cfg);
    const auto norm_values = objective::iv_magnitudes(iv);

    tpe::Objective obj;
    if (cfg.evaluator == EvaluatorKind::Surrogate) {
        obj = [&iv, &space](const std::vector<double>& theta) {
            const auto p = dc_params_from_theta(theta, space);
            return objective::rmse_iv(device::simulate_iv_at(p, iv), iv);
        };
    } else {
        extsim::ExternalSimConfig sim;
        sim.command_template = cfg.external_command;
        sim.timeout_s = cfg.external_timeout_s;
        sim.scratch_dir = cfg.output_dir;
        obj = [&iv, &space, sim, name = cfg.device_name](const std::vector<double>& theta) {
            netlist::ModelCard card;
            card.device_name = name;
            card.dc = dc_params_from_theta(theta, space);
            const IVDataset sim_iv =
                extsim::simulate_iv(netlist::emit_netlist(card, false, true), iv, sim);
            return objective::rmse_iv(sim_iv, iv);
        };
    }

    tpe::OptimizeResult res = tpe::optimize(obj, space, cfg.opt);
    if (!std::isfinite(res.best_loss))
        throw Error("DC stage: every objective evaluation failed");

    DcStageResult out{.params = dc_params_from_theta(res.best_theta, space),
                      .rmse = res.best_loss,
                      .nrmse_pct = objective::nrmse_percent(res.best_loss, norm_values),
                      .iterations = static_cast<long>(res.history.size()),
                      .history = std::move(res.history),
                      .space = std::move(space)};
    return out;
}

RfStageResult run_rf_stage(const SParamDataset& sp, const PipelineConfig& cfg,
                           const device::DCParams& dc) {
    if (sp.empty()) throw std::invalid_argument("RF stage needs a nonempty S-parameter dataset");
    sp.validate();
    SearchSpace space = stage_rf_space(cfg);
    const auto norm_values = objective::s_magnitudes(sp);
    const std::vector<double> freqs = meas_freqs(sp);

    tpe::OptimizerConfig opt = cfg.opt;
    opt.max_batches = cfg.rf_max_batches;
    opt.rng_seed = cfg.opt.rng_seed + 1; // decorrelated from the DC stage

    tpe::Objective obj;
    if (cfg.evaluator == EvaluatorKind::Surrogate) {
        obj = [&sp, &space, freqs](const std::vector<double>& theta) {
            const auto p = rf_params_from_theta(theta, space);
            return objective::rmse_s(device::s_params(p, freqs), sp);
        };
    } else {
        extsim::ExternalSimConfig sim;
        sim.command_template =
            cfg.external_rf_command.empty() ? cfg.external_command : cfg.external_rf_command;
        sim.timeout_s = cfg.external_timeout_s;
        sim.scratch_dir = cfg.output_dir;
        obj = [&sp, &space, freqs, sim, dc, name = cfg.device_name](
                  const std::vector<double>& theta) {
            netlist::ModelCard card;
            card.device_name = name;
            card.dc = dc;
            card.rf = rf_params_from_theta(theta, space);
            const SParamDataset sim_sp = extsim::simulate_sparams(
                netlist::emit_netlist(card, false, true), freqs, sim);
            return objective::rmse_s(sim_sp, sp);
        };
    }

    tpe::OptimizeResult res = tpe::optimize(obj, space, opt);
    if (!std::isfinite(res.best_loss))
        throw Error("RF stage: every objective evaluation failed");

    RfStageResult out{.params = rf_params_from_theta(res.best_theta, space),
                      .rmse = res.best_loss,
                      .nrmse_pct = objective::nrmse_percent(res.best_loss, norm_values),
                      .iterations = static_cast<long>(res.history.size()),
                      .history = std::move(res.history),
                      .space = std::move(space)};
    return out;
}

namespace {

nlohmann::json params_to_json(const std::map<std::string, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

} // namespace

std::string report_to_json(const ExtractionReport& r) {
    nlohmann::json j;
    j["device"] = r.device;
    j["doc_success"] = r.doc_success;
    j["iv_nrmse_pct"] = r.iv_nrmse_pct ? nlohmann::json(*r.iv_nrmse_pct) : nlohmann::json();
    if (r.s_nrmse_pct) j["s_nrmse_pct"] = *r.s_nrmse_pct;
    j["iterations"] = r.iterations;
    j["wall_time_s"] = r.wall_time_s;
    j["dc_params"] = params_to_json(r.dc_params);
    j["rf_params"] = params_to_json(r.rf_params);
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    j["version"] = r.version;
    j["errors"] = r.errors;
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

ExtractionReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
    ExtractionReport r;
    r.device = j.at("device").get<std::string>();
    r.doc_success = j.at("doc_success").get<bool>();
    if (j.contains("iv_nrmse_pct") && j["iv_nrmse_pct"].is_number())
        r.iv_nrmse_pct = j["iv_nrmse_pct"].get<double>();
    if (j.contains("s_nrmse_pct") && j["s_nrmse_pct"].is_number())
        r.s_nrmse_pct = j["s_nrmse_pct"].get<double>();
    r.iterations = j.at("iterations").get<long>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    for (const auto& [k, v] : j.value("dc_params", nlohmann::json::object()).items())
        r.dc_params[k] = v.get<double>();
    for (const auto& [k, v] : j.value("rf_params", nlohmann::json::object()).items())
        r.rf_params[k] = v.get<double>();
    r.config_hash = j.value("config_hash", "");
    r.seed = j.value("seed", 0ULL);
    r.version = j.value("version", "");
    for (const auto& e : j.value("errors", nlohmann::json::array()))
        r.errors.push_back(e.get<std::string>());
    for (const auto& w : j.value("warnings", nlohmann::json::array()))
        r.warnings.push_back(w.get<std::string>());
    return r;
}

namespace {

void write_iv_plot_csv(const IVDataset& meas, const IVDataset& sim, const std::string& path) {
    std::string out = "vgs,vds,id_meas,id_sim\n";
    for (std::size_t i = 0; i < meas.rows.size(); ++i)
        out += fmt_double(meas.rows[i].vgs) + "," + fmt_double(meas.rows[i].vds) + "," +
               fmt_double(meas.rows[i].id) + "," + fmt_double(sim.rows[i].id) + "\n";
    write_text_file(path, out);
}

void write_s_plot_csv(const SParamDataset& meas, const SParamDataset& sim,
                      const std::string& path) {
    static const char* names[4] = {"s11", "s21", "s12", "s22"};
    std::string out = "freq_hz";
    for (const char* n : names)
        out += std::string(",") + n + "_meas_re," + n + "_meas_im," + n + "_sim_re," + n +
               "_sim_im";
    out += ",mask_bits\n";
    for (std::size_t k = 0; k < meas.entries.size(); ++k) {
        out += fmt_double(meas.entries[k].freq_hz);
        for (unsigned i = 0; i < 4; ++i) {
            out += "," + fmt_double(meas.entries[k].s[i].real()) + "," +
                   fmt_double(meas.entries[k].s[i].imag());
            out += "," + fmt_double(sim.entries[k].s[i].real()) + "," +
                   fmt_double(sim.entries[k].s[i].imag());
        }
        out += "," + std::to_string(meas.entries[k].mask) + "\n";
    }
    write_text_file(path, out);
}

} // namespace

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    const auto artifact = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    PipelineOutcome outcome;
    ExtractionReport& rep = outcome.report;
    rep.device = cfg.device_name;
    rep.seed = cfg.opt.rng_seed;
    rep.config_hash = cfg.config_hash;

    // ---- ingest ---------------------------------------------------
    IVDataset iv;
    SParamDataset sp;
    bool have_sp = false;
    try {
        if (!cfg.iv_csv.empty()) {
            iv = read_iv_csv(cfg.iv_csv);
        } else {
            const Image img = read_png(cfg.iv_image);
            const auto calib = digitize::load_calibration_json(cfg.iv_calibration);
            const auto labels = digitize::load_labels_json(cfg.iv_labels);
            digitize::DigitizeResult dres =
                digitize::digitize(img, calib, labels, cfg.iv_x_scale, cfg.iv_y_scale);
            for (auto& w : dres.warnings) rep.warnings.push_back("digitize: " + w);
            iv = std::move(dres.dataset);
            write_iv_csv(iv, artifact("digitized_iv.csv"));
        }
        if (iv.empty()) throw Error("IV ingestion produced no data points");
        if (!cfg.sparam_table.empty()) {
            sp = sparam::load_sparam_file(cfg.sparam_table);
            have_sp = true;
        }
        rep.doc_success = true;
    } catch (const std::exception& e) {
        rep.doc_success = false;
        rep.errors.push_back(std::string("ingest: ") + e.what());
    }

    // ---- optional LLM classification (never fatal) ------------------
    if (!cfg.llm.endpoint.empty() && rep.doc_success) {
        try {
            if (!cfg.iv_image.empty()) {
                const auto res = classify::classify_image(
                    read_text_file(cfg.iv_image), fs::path(cfg.iv_image).filename().string(),
                    cfg.llm);
                if (res.category != classify::AssetCategory::IvCurve)
                    rep.warnings.push_back("classifier labeled the chart input as " +
                                           classify::to_string(res.category));
            }
            if (have_sp) {
                const auto res =
                    classify::classify_text(read_text_file(cfg.sparam_table), cfg.llm);
                if (res.category != classify::AssetCategory::SParamTable)
                    rep.warnings.push_back("classifier labeled the table input as " +
                                           classify::to_string(res.category));
                if (!sp.bias.temperature_c && res.bias.temperature_c)
                    sp.bias.temperature_c = res.bias.temperature_c;
                if (!sp.bias.vds && res.bias.vds) sp.bias.vds = res.bias.vds;
                if (!sp.bias.id && res.bias.id) sp.bias.id = res.bias.id;
            }
        } catch (const classify::ClassifyError& e) {
            rep.warnings.push_back(std::string("classification unavailable: ") + e.what());
        }
    }

    // ---- stages ----------------------------------------------------
    std::optional<DcStageResult> dc;
    std::optional<RfStageResult> rf;
    if (rep.doc_success) {
        try {
            dc = run_dc_stage(iv, cfg);
            tpe::write_trace_csv(dc->history, dc->space, artifact("dc_trace.csv"));
            write_iv_plot_csv(iv, device::simulate_iv_at(dc->params, iv),
                              artifact("plot_iv.csv"));
            rep.iv_nrmse_pct = dc->nrmse_pct;
            rep.iterations += dc->iterations;
            rep.dc_params = theta_by_name(theta_from_dc_params(dc->params, dc->space), dc->space);
        } catch (const std::exception& e) {
            rep.errors.push_back(std::string("dc stage: ") + e.what());
        }
    }
    if (dc && have_sp) {
        try {
            rf = run_rf_stage(sp, cfg, dc->params);
            tpe::write_trace_csv(rf->history, rf->space, artifact("rf_trace.csv"));
            write_s_plot_csv(sp, device::s_params(rf->params, meas_freqs(sp)),
                             artifact("plot_s.csv"));
            rep.s_nrmse_pct = rf->nrmse_pct;
            rep.iterations += rf->iterations;
            rep.rf_params = theta_by_name(theta_from_rf_params(rf->params, rf->space), rf->space);
        } catch (const std::exception& e) {
            rep.errors.push_back(std::string("rf stage: ") + e.what());
        }
    }

    // ---- artifacts ---------------------------------------------------
    if (dc) {
        netlist::ModelCard card;
        card.device_name = cfg.device_name;
        card.dc = dc->params;
        if (rf) card.rf = rf->params;
        card.fit.iv_nrmse_pct = dc->nrmse_pct;
        if (rf) card.fit.s_nrmse_pct = rf->nrmse_pct;
        card.fit.iterations = rep.iterations;
        outcome.netlist_path = artifact("model.cir");
        netlist::write_netlist(card, outcome.netlist_path, cfg.asm_names);
    }

    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    outcome.report_path = artifact("report.json");
    write_text_file(outcome.report_path, report_to_json(rep));
    return outcome;
}

TraceSummary summarize_trace_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    TraceSummary s;
    {
        std::istringstream cells(line);
        std::string c;
        std::vector<std::string> header;
        while (std::getline(cells, c, ',')) header.push_back(c);
        if (header.size() < 4 || header[0] != "trial" || header[1] != "batch" ||
            header[2] != "loss")
            throw ParseError("not a trace CSV (expected trial,batch,loss,... header)");
        s.param_names.assign(header.begin() + 3, header.end());
    }

    std::size_t line_no = 1;
    double running_best = kInf;
    int current_batch = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string c;
        std::vector<std::string> row;
        while (std::getline(cells, c, ',')) row.push_back(c);
        if (row.size() != s.param_names.size() + 3)
            throw ParseError("trace row has wrong field count", line_no);
        const int batch = static_cast<int>(parse_double(row[1]));
        const double loss = parse_double(row[2]);
        if (batch != current_batch) {
            if (current_batch >= 0) s.best_by_batch.push_back(running_best);
            current_batch = batch;
        }
        if (std::isfinite(loss)) {
            ++s.finite_trials;
            if (loss < s.best_loss) {
                s.best_loss = loss;
                s.best_trial = s.trials;
            }
        } else {
            ++s.failed_trials;
        }
        running_best = std::min(running_best, loss);
        ++s.trials;
        s.batches = std::max(s.batches, batch + 1);
    }
    if (current_batch >= 0) s.best_by_batch.push_back(running_best);
    return s;
}

std::string format_trace_summary(const TraceSummary& s) {
    std::string out;
    out += "trials:      " + std::to_string(s.trials) + " (" + std::to_string(s.finite_trials) +
           " finite, " + std::to_string(s.failed_trials) + " failed)\n";
    out += "batches:     " + std::to_string(s.batches) + "\n";
    out += "best loss:   " + fmt_double(s.best_loss) + " (trial " + std::to_string(s.best_trial) +
           ")\n";
    out += "parameters:  ";
    for (std::size_t i = 0; i < s.param_names.size(); ++i)
        out += (i ? ", " : "") + s.param_names[i];
    out += "\n";
    out += "best-by-batch:";
    for (double b : s.best_by_batch) out += " " + fmt_double(b);
    out += "\n";
    return out;
}

std::string file_hash_hex(const std::string& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace hemtfit::pipeline
