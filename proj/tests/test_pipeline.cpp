#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "chart_render.hpp"
#include "classify.hpp"
#include "external_sim.hpp"
#include "objective.hpp"
#include "pipeline.hpp"
#include "raster.hpp"
#include "sparam_io.hpp"
#include "twoport.hpp"

using namespace hemtfit;
using namespace hemtfit::pipeline;
namespace fs = std::filesystem;

namespace {

// fresh scratch directory per call, removed at scope exit
struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("hemtfit_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_script(const std::string& path, const std::string& body) {
    write_text_file(path, "#!/bin/sh\n" + body);
    fs::permissions(path, fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read);
}

device::DCParams fixture_dc() {
    device::DCParams p;
    p.voff = -2.0;
    p.nfactor = 1.2;
    p.kgain = 0.05;
    p.ua = 0.05;
    p.ub = 0.01;
    p.delta = 2.5;
    p.lambda = 0.05;
    p.rsc = 0.5;
    p.rdc = 0.5;
    return p;
}

device::SmallSignalParams fixture_rf() {
    device::SmallSignalParams p;
    p.gm = 0.05;
    p.tau = 1.5e-12;
    p.gds = 0.003;
    p.cgs = 0.9e-12;
    p.cgd = 0.08e-12;
    p.cds = 0.25e-12;
    p.ri = 2.0;
    p.rg = 1.8;
    p.rd = 1.2;
    p.rs = 0.6;
    p.lg = 0.5e-9;
    p.ld = 0.4e-9;
    p.ls = 0.05e-9;
    p.cpg = 0.1e-12;
    p.cpd = 0.12e-12;
    return p;
}

IVDataset fixture_iv(int n_vds = 10) {
    std::vector<double> vgs = {-1.0, -0.5, 0.0};
    std::vector<double> vds;
    for (int i = 0; i < n_vds; ++i) vds.push_back(8.0 * i / (n_vds - 1));
    return device::iv_sweep(fixture_dc(), vgs, vds);
}

PipelineConfig tiny_config(const TempDir& dir) {
    PipelineConfig cfg;
    cfg.device_name = "TINY";
    cfg.iv_csv = dir.file("iv.csv");
    write_iv_csv(fixture_iv(), cfg.iv_csv);
    cfg.opt.n_startup = 6;
    cfg.opt.batch_size = 4;
    cfg.opt.max_batches = 3;
    cfg.rf_max_batches = 3;
    cfg.opt.rng_seed = 7;
    cfg.output_dir = dir.file("out");
    return cfg;
}

} // namespace

TEST_CASE("default spaces: valid bounds, no device-specific values") {
    const auto dc = default_dc_space();
    const auto rf = default_rf_space();
    CHECK(dc.size() == 9);
    CHECK(rf.size() == 15);
    for (std::size_t i = 0; i < dc.size(); ++i) {
        CHECK(dc[i].lower < dc[i].upper);
        if (dc[i].scale == Scale::Log10) CHECK(dc[i].lower > 0);
    }
    // prior-knowledge-free: the spaces are constants, identical across calls
    const auto dc2 = default_dc_space();
    for (std::size_t i = 0; i < dc.size(); ++i) {
        CHECK(dc[i].name == dc2[i].name);
        CHECK(dc[i].lower == dc2[i].lower);
        CHECK(dc[i].upper == dc2[i].upper);
    }
}

TEST_CASE("default spaces: acceptance ground truths lie strictly inside") {
    const auto dc_space = default_dc_space();
    const auto dc_theta = theta_from_dc_params(fixture_dc(), dc_space);
    for (std::size_t i = 0; i < dc_space.size(); ++i) {
        CHECK(dc_theta[i] > dc_space[i].lower);
        CHECK(dc_theta[i] < dc_space[i].upper);
    }
    const auto rf_space = default_rf_space();
    const auto rf_theta = theta_from_rf_params(fixture_rf(), rf_space);
    for (std::size_t i = 0; i < rf_space.size(); ++i) {
        CHECK(rf_theta[i] > rf_space[i].lower);
        CHECK(rf_theta[i] < rf_space[i].upper);
    }
}

TEST_CASE("theta <-> params round trip, both stages") {
    const auto dc_space = default_dc_space();
    const auto p = fixture_dc();
    const auto t = theta_from_dc_params(p, dc_space);
    const auto q = dc_params_from_theta(t, dc_space);
    CHECK(q.voff == p.voff);
    CHECK(q.rdc == p.rdc);
    const auto rf_space = default_rf_space();
    const auto rp = fixture_rf();
    const auto rt = theta_from_rf_params(rp, rf_space);
    const auto rq = rf_params_from_theta(rt, rf_space);
    CHECK(rq.gm == rp.gm);
    CHECK(rq.cpd == rp.cpd);
}

TEST_CASE("config: full file parses with path resolution and hash") {
    TempDir dir;
    write_iv_csv(fixture_iv(), dir.file("meas.csv"));
    write_text_file(dir.file("cfg.toml"),
                    "[device]\n"
                    "name = \"DUT9\"\n"
                    "[input]\n"
                    "iv_csv = \"meas.csv\"   # relative to this file\n"
                    "[optimizer]\n"
                    "seed = 11\n"
                    "batch_size = 5\n"
                    "max_batches = 2\n"
                    "n_startup = 4\n"
                    "[evaluator]\n"
                    "kind = \"surrogate\"\n"
                    "[output]\n"
                    "dir = \"results\"\n");
    const auto cfg = load_pipeline_config(dir.file("cfg.toml"));
    CHECK(cfg.device_name == "DUT9");
    CHECK(cfg.iv_csv == dir.file("meas.csv"));
    CHECK(cfg.output_dir == dir.file("results"));
    CHECK(cfg.opt.rng_seed == 11);
    CHECK(cfg.opt.batch_size == 5);
    CHECK(cfg.config_hash.size() == 16);
}

TEST_CASE("config: unknown keys and invalid combinations are rejected") {
    TempDir dir;
    write_text_file(dir.file("bad1.toml"), "[input]\niv_csv = \"x.csv\"\nbogus_key = 1\n");
    CHECK_THROWS_AS(load_pipeline_config(dir.file("bad1.toml")), Error);

    write_text_file(dir.file("bad2.toml"), "[input]\niv_csv = \"a.csv\"\niv_image = \"b.png\"\n");
    CHECK_THROWS_AS(load_pipeline_config(dir.file("bad2.toml")), std::exception);

    write_text_file(dir.file("bad3.toml"),
                    "[input]\niv_csv = \"a.csv\"\n[evaluator]\nkind = \"external\"\n");
    CHECK_THROWS_AS(load_pipeline_config(dir.file("bad3.toml")), std::exception);

    write_text_file(dir.file("bad4.toml"), "[input]\niv_csv = \"a.csv\"\n[optimizer]\ngamma = 2\n");
    CHECK_THROWS_AS(load_pipeline_config(dir.file("bad4.toml")), std::invalid_argument);
}

TEST_CASE("custom search-space file must cover the canonical names") {
    TempDir dir;
    write_text_file(dir.file("space.json"),
                    R"([{"name":"VOFF","lower":-5,"upper":0},
                        {"name":"NFACTOR","lower":0.8,"upper":2},
                        {"name":"KGAIN","lower":1e-3,"upper":1,"scale":"log10"},
                        {"name":"UA","lower":0,"upper":1},
                        {"name":"UB","lower":0,"upper":0.5},
                        {"name":"DELTA","lower":1,"upper":5},
                        {"name":"LAMBDA","lower":0,"upper":0.2},
                        {"name":"RSC","lower":0.1,"upper":10,"scale":"log10"},
                        {"name":"RDC","lower":0.1,"upper":10,"scale":"log10"}])");
    const auto space = load_space_json(dir.file("space.json"), dc_param_names());
    CHECK(space.size() == 9);

    write_text_file(dir.file("short.json"), R"([{"name":"VOFF","lower":-5,"upper":0}])");
    CHECK_THROWS_AS(load_space_json(dir.file("short.json"), dc_param_names()), Error);
}

TEST_CASE("run_dc_stage: smoke run recovers a decent fit on a tiny budget") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    const auto iv = fixture_iv();
    const auto res = run_dc_stage(iv, cfg);
    CHECK(res.iterations == 6 + 4 * 3);
    CHECK(res.history.size() == 18);
    CHECK(std::isfinite(res.rmse));
    CHECK(res.nrmse_pct >= 0.0);
    CHECK(res.nrmse_pct ==
          doctest::Approx(objective::nrmse_percent(res.rmse, objective::iv_magnitudes(iv))));
}

TEST_CASE("run_dc_stage: empty dataset is a precondition error") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    CHECK_THROWS_AS(run_dc_stage(IVDataset{}, cfg), std::invalid_argument);
}

TEST_CASE("run_rf_stage: S11-only masked data still fits") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    std::vector<double> freqs;
    for (int i = 1; i <= 10; ++i) freqs.push_back(1e9 * i);
    SParamDataset meas = device::s_params(fixture_rf(), freqs);
    for (auto& e : meas.entries) e.mask = 1u << kS11; // mask everything but S11
    const auto res = run_rf_stage(meas, cfg);
    CHECK(res.iterations == 18);
    CHECK(std::isfinite(res.rmse));
    // on masked data the rmse only counts S11 residuals
    const auto sim = device::s_params(res.params, freqs);
    CHECK(res.rmse == doctest::Approx(objective::rmse_s(sim, meas)).epsilon(1e-12));
}

TEST_CASE("external_simulate: mock echoing a fixed table round-trips") {
    TempDir dir;
    const std::string table = "0 0 0.001\n0 1 0.002\n";
    write_text_file(dir.file("table.txt"), "# comment line\n" + table);
    write_script(dir.file("mock.sh"), "cat " + dir.file("table.txt") + "\n");

    extsim::ExternalSimConfig cfg;
    cfg.command_template = dir.file("mock.sh") + " {netlist} {points}";
    cfg.scratch_dir = dir.path.string();
    IVDataset pts;
    pts.rows = {{0, 0, 0}, {0, 1, 0}};
    const auto out = extsim::simulate_iv("* netlist text\n", pts, cfg);
    REQUIRE(out.rows.size() == 2);
    CHECK(out.rows[1].id == 0.002);
}

TEST_CASE("external_simulate: distinct failure kinds") {
    TempDir dir;
    extsim::ExternalSimConfig cfg;
    cfg.scratch_dir = dir.path.string();
    IVDataset pts;
    pts.rows = {{0, 0, 0}};

    SUBCASE("nonzero exit") {
        write_script(dir.file("fail.sh"), "exit 3\n");
        cfg.command_template = dir.file("fail.sh") + " {netlist}";
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", pts, cfg), extsim::ExitError);
    }
    SUBCASE("timeout") {
        write_script(dir.file("slow.sh"), "sleep 5\n");
        cfg.command_template = dir.file("slow.sh") + " {netlist}";
        cfg.timeout_s = 0.3;
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", pts, cfg), extsim::TimeoutError);
    }
    SUBCASE("command not found") {
        cfg.command_template = "/no/such/binary/anywhere {netlist}";
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", pts, cfg), extsim::SpawnError);
    }
    SUBCASE("parse failure: wrong row count") {
        write_script(dir.file("short.sh"), "echo 0 0 0.001\necho 0 1 0.002\n");
        cfg.command_template = dir.file("short.sh") + " {netlist}";
        IVDataset three;
        three.rows = {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}};
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", three, cfg), extsim::OutputParseError);
    }
    SUBCASE("parse failure: garbage cell") {
        write_script(dir.file("junk.sh"), "echo 0 0 zebra\n");
        cfg.command_template = dir.file("junk.sh") + " {netlist}";
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", pts, cfg), extsim::OutputParseError);
    }
    SUBCASE("missing placeholder") {
        cfg.command_template = "echo nothing";
        CHECK_THROWS_AS(extsim::simulate_iv("*\n", pts, cfg), Error);
    }
}

TEST_CASE("external evaluator failures become +inf trials, run continues") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    cfg.evaluator = EvaluatorKind::External;
    write_script(dir.file("flaky.sh"), "exit 9\n");
    cfg.external_command = dir.file("flaky.sh") + " {netlist} {points}";
    // every evaluation fails -> the stage reports a failure, but only
    // after the full budget ran through
    CHECK_THROWS_WITH_AS(run_dc_stage(fixture_iv(), cfg),
                         doctest::Contains("every objective evaluation failed"), Error);
}

TEST_CASE("differential: reference-simulator mock reproduces surrogate traces exactly") {
    const char* sim_path = std::getenv("HEMTFIT_SIM");
    if (!sim_path || !*sim_path) {
        MESSAGE("HEMTFIT_SIM not set; skipping the differential test");
        return;
    }
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);

    const auto iv = fixture_iv();
    const auto in_process = run_dc_stage(iv, cfg);

    cfg.evaluator = EvaluatorKind::External;
    cfg.external_command = std::string(sim_path) + " --netlist {netlist} --points {points} --kind iv";
    const auto external = run_dc_stage(iv, cfg);

    REQUIRE(in_process.history.size() == external.history.size());
    for (std::size_t i = 0; i < in_process.history.size(); ++i) {
        CHECK(in_process.history.trials()[i].theta == external.history.trials()[i].theta);
        CHECK(in_process.history.trials()[i].loss == external.history.trials()[i].loss);
    }
}

TEST_CASE("classify: offline mock rules") {
    classify::LlmConfig cfg;
    cfg.endpoint = "mock";
    const auto img = classify::classify_image("not-a-real-png", "atf38143_iv.png", cfg);
    CHECK(img.category == classify::AssetCategory::IvCurve);
    const auto other = classify::classify_image("bytes", "package_photo.png", cfg);
    CHECK(other.category == classify::AssetCategory::Other);

    const auto tbl = classify::classify_text(
        "S Parameters (Ta=25 deg)\nF(MHz),S11M,S11A\n1000,0.994,-12.2\n", cfg);
    CHECK(tbl.category == classify::AssetCategory::SParamTable);
    REQUIRE(tbl.bias.temperature_c.has_value());
    CHECK(*tbl.bias.temperature_c == 25.0);

    const auto none = classify::classify_text("resistor color codes", cfg);
    CHECK(none.category == classify::AssetCategory::Other);
}

TEST_CASE("classify: HTTP endpoint round trip and error paths") {
    httplib::Server server;
    std::string seen_auth, seen_task;
    server.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_task = req.body;
        res.set_content(R"({"category":"sparam_table","vds":3.5,"id":0.02})", "application/json");
    });
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("HEMTFIT_API_KEY", "sekrit", 1);
    classify::LlmConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/classify";
    const auto res = classify::classify_text("F(MHz),S11M,S11A", cfg);
    CHECK(res.category == classify::AssetCategory::SParamTable);
    REQUIRE(res.bias.vds.has_value());
    CHECK(*res.bias.vds == 3.5);
    CHECK(seen_auth == "Bearer sekrit");
    CHECK(seen_task.find("\"task\":\"classify\"") != std::string::npos);

    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/fail";
    CHECK_THROWS_AS(classify::classify_text("x", cfg), classify::ClassifyError);
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/garbage";
    CHECK_THROWS_AS(classify::classify_text("x", cfg), classify::ClassifyError);

    server.stop();
    th.join();
    unsetenv("HEMTFIT_API_KEY");

    // unreachable endpoint
    cfg.endpoint = "http://127.0.0.1:1/classify";
    cfg.timeout_s = 1.0;
    CHECK_THROWS_AS(classify::classify_text("x", cfg), classify::ClassifyError);
}

TEST_CASE("run_pipeline: end-to-end with S data, artifacts and determinism") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    std::vector<double> freqs;
    for (int i = 1; i <= 10; ++i) freqs.push_back(1e9 * i);
    cfg.sparam_table = dir.file("meas.s2p");
    write_text_file(cfg.sparam_table,
                    sparam::write_touchstone(device::s_params(fixture_rf(), freqs)));
    cfg.llm.endpoint = "mock";

    const auto outcome = run_pipeline(cfg);
    const auto& rep = outcome.report;
    CHECK(rep.ok());
    CHECK(rep.doc_success);
    REQUIRE(rep.iv_nrmse_pct.has_value());
    REQUIRE(rep.s_nrmse_pct.has_value());
    CHECK(rep.device == "TINY");

    // artifacts exist inside the output directory
    for (const char* name : {"report.json", "model.cir", "dc_trace.csv", "rf_trace.csv",
                             "plot_iv.csv", "plot_s.csv"})
        CHECK(fs::exists(fs::path(cfg.output_dir) / name));

    // iterations equals the persisted trace row counts
    const auto dc_sum = summarize_trace_csv((fs::path(cfg.output_dir) / "dc_trace.csv").string());
    const auto rf_sum = summarize_trace_csv((fs::path(cfg.output_dir) / "rf_trace.csv").string());
    CHECK(rep.iterations == static_cast<long>(dc_sum.trials + rf_sum.trials));
    CHECK(dc_sum.param_names == dc_param_names());
    CHECK(rf_sum.param_names == rf_param_names());

    // report JSON round trip
    const auto parsed = report_from_json(read_text_file(outcome.report_path));
    CHECK(parsed.device == rep.device);
    CHECK(parsed.iterations == rep.iterations);
    CHECK(parsed.iv_nrmse_pct == rep.iv_nrmse_pct);
    CHECK(parsed.s_nrmse_pct == rep.s_nrmse_pct);
    CHECK(parsed.dc_params == rep.dc_params);

    // rerun with the same seed: identical numeric fields (wall time
    // aside) and byte-identical netlist
    PipelineConfig cfg2 = cfg;
    cfg2.output_dir = dir.file("out2");
    const auto again = run_pipeline(cfg2);
    CHECK(again.report.iv_nrmse_pct == rep.iv_nrmse_pct);
    CHECK(again.report.s_nrmse_pct == rep.s_nrmse_pct);
    CHECK(again.report.iterations == rep.iterations);
    CHECK(again.report.dc_params == rep.dc_params);
    CHECK(again.report.rf_params == rep.rf_params);
    CHECK(read_text_file(again.netlist_path) == read_text_file(outcome.netlist_path));
}

TEST_CASE("run_pipeline: corrupt raster means doc_success=false, nonzero outcome") {
    TempDir dir;
    PipelineConfig cfg;
    cfg.device_name = "BROKEN";
    cfg.iv_image = dir.file("corrupt.png");
    write_text_file(cfg.iv_image, "this is not a png");
    cfg.iv_calibration = dir.file("calib.json");
    write_text_file(cfg.iv_calibration, "[]");
    cfg.iv_labels = dir.file("labels.json");
    write_text_file(cfg.iv_labels, "[]");
    cfg.output_dir = dir.file("out");

    const auto outcome = run_pipeline(cfg);
    CHECK_FALSE(outcome.report.ok());
    CHECK_FALSE(outcome.report.doc_success);
    CHECK_FALSE(outcome.report.errors.empty());
    CHECK(fs::exists(outcome.report_path)); // report still written
    CHECK_FALSE(outcome.report.iv_nrmse_pct.has_value());
}

TEST_CASE("run_pipeline: chart ingestion path end to end") {
    TempDir dir;
    const IVDataset truth = fixture_iv(24);
    testsupport::ChartLayout layout;
    layout.x_min = 0.0;
    layout.x_max = 8.0;
    layout.y_min = 0.0;
    layout.y_max = 0.3;
    const auto chart = testsupport::render_iv_chart(truth, layout);
    write_png(chart.image, dir.file("curves_iv.png"));

    std::string calib = "[";
    for (std::size_t i = 0; i < chart.calibration.size(); ++i) {
        const auto& c = chart.calibration[i];
        calib += std::string(i ? "," : "") + "{\"axis\":\"" +
                 (c.axis == digitize::Axis::X ? "x" : "y") + "\",\"pixel\":" +
                 fmt_double(c.pixel) + ",\"value\":" + fmt_double(c.value) + "}";
    }
    calib += "]";
    write_text_file(dir.file("calib.json"), calib);
    std::string labels = "[";
    for (std::size_t i = 0; i < chart.labels.size(); ++i) {
        const auto& l = chart.labels[i];
        labels += std::string(i ? "," : "") + "{\"text\":\"" + l.text + "\",\"value\":" +
                  fmt_double(l.value) + ",\"px\":" + fmt_double(l.px) + ",\"py\":" +
                  fmt_double(l.py) + "}";
    }
    labels += "]";
    write_text_file(dir.file("labels.json"), labels);

    PipelineConfig cfg;
    cfg.device_name = "CHART1";
    cfg.iv_image = dir.file("curves_iv.png");
    cfg.iv_calibration = dir.file("calib.json");
    cfg.iv_labels = dir.file("labels.json");
    cfg.opt.n_startup = 6;
    cfg.opt.batch_size = 4;
    cfg.opt.max_batches = 3;
    cfg.output_dir = dir.file("out");
    cfg.llm.endpoint = "mock";

    const auto outcome = run_pipeline(cfg);
    CHECK(outcome.report.ok());
    CHECK(fs::exists(fs::path(cfg.output_dir) / "digitized_iv.csv"));
    const auto digitized =
        read_iv_csv((fs::path(cfg.output_dir) / "digitized_iv.csv").string());
    CHECK(digitized.rows.size() == 300); // 3 curves x 100 points
}

TEST_CASE("stage isolation: the RF stage does not mutate DC results") {
    TempDir dir;
    PipelineConfig cfg = tiny_config(dir);
    const auto dc = run_dc_stage(fixture_iv(), cfg);

    netlist::ModelCard before;
    before.device_name = "ISO";
    before.dc = dc.params;
    const std::string dc_hash_before = netlist::emit_netlist(before);

    std::vector<double> freqs = {1e9, 2e9, 5e9};
    const auto sp = device::s_params(fixture_rf(), freqs);
    (void)run_rf_stage(sp, cfg, dc.params);

    netlist::ModelCard after;
    after.device_name = "ISO";
    after.dc = dc.params;
    CHECK(netlist::emit_netlist(after) == dc_hash_before);
}

TEST_CASE("trace summary: fields line up with the written trace") {
    TempDir dir;
    SearchSpace space({{"A", 0.0, 1.0, Scale::Linear}, {"B", 0.0, 1.0, Scale::Linear}});
    tpe::OptimizerConfig cfg;
    cfg.n_startup = 5;
    cfg.batch_size = 4;
    cfg.max_batches = 2;
    const auto res = tpe::optimize(
        [](const std::vector<double>& x) { return x[0] + x[1]; }, space, cfg);
    tpe::write_trace_csv(res.history, space, dir.file("trace.csv"));

    const auto s = summarize_trace_csv(dir.file("trace.csv"));
    CHECK(s.trials == 13);
    CHECK(s.batches == 3);
    CHECK(s.finite_trials == 13);
    CHECK(s.failed_trials == 0);
    CHECK(s.best_loss == res.best_loss);
    CHECK(s.param_names == std::vector<std::string>{"A", "B"});
    REQUIRE(s.best_by_batch.size() == 3);
    CHECK(s.best_by_batch.back() == res.best_loss);
    const std::string text = format_trace_summary(s);
    CHECK(text.find("trials:") != std::string::npos);
}
