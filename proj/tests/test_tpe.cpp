#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tpe.hpp"

using namespace hemtfit;
using namespace hemtfit::tpe;

namespace {

History make_history(const std::vector<double>& losses, int dim = 1) {
    History h;
    for (std::size_t i = 0; i < losses.size(); ++i)
        h.append(Trial{std::vector<double>(dim, static_cast<double>(i)), losses[i], 0});
    return h;
}

SearchSpace unit_space(std::size_t n = 1) {
    std::vector<ParamSpec> specs;
    for (std::size_t i = 0; i < n; ++i)
        specs.push_back({"p" + std::to_string(i), 0.0, 1.0, Scale::Linear});
    return SearchSpace(std::move(specs));
}

} // namespace

TEST_CASE("partition: lowest-loss fraction goes to the good set") {
    const auto h = make_history({3, 1, 2, 4});
    auto [good, bad] = partition(h, 0.25); // ceil(0.25*4) = 1
    REQUIRE(good.size() == 1);
    CHECK(good[0].loss == 1);
    REQUIRE(bad.size() == 3);
    CHECK(bad[0].loss == 3);
    CHECK(bad[1].loss == 2);
    CHECK(bad[2].loss == 4);
}

TEST_CASE("partition: ties break by insertion order") {
    const auto h = make_history(std::vector<double>(10, 7.0));
    auto [good, bad] = partition(h, 0.3); // ceil(3) = 3
    REQUIRE(good.size() == 3);
    // theta encodes the insertion index in make_history
    CHECK(good[0].theta[0] == 0);
    CHECK(good[1].theta[0] == 1);
    CHECK(good[2].theta[0] == 2);
}

TEST_CASE("partition: failed trials always land in the bad set") {
    const auto h = make_history({0.5, kInf, 0.4});
    auto [good, bad] = partition(h, 0.5); // 2 finite -> ceil(1) = 1 good
    REQUIRE(good.size() == 1);
    CHECK(good[0].loss == 0.4);
    REQUIRE(bad.size() == 2);
    CHECK(bad[0].loss == 0.5);
    CHECK(std::isinf(bad[1].loss));
}

TEST_CASE("partition: size is exactly ceil(gamma * n_finite)") {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rng.next_index(40);
        std::vector<double> losses;
        std::size_t n_finite = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool failed = rng.next_double() < 0.2 && n_finite + (n - i) > 2;
            if (failed) {
                losses.push_back(kInf);
            } else {
                losses.push_back(rng.next_double());
                ++n_finite;
            }
        }
        if (n_finite < 2) continue;
        const double gamma = 0.05 + 0.9 * rng.next_double();
        auto [good, bad] = partition(make_history(losses), gamma);
        CHECK(good.size() ==
              static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n_finite))));
        CHECK(good.size() + bad.size() == n);
    }
}

TEST_CASE("partition: fewer than two finite trials is an error") {
    CHECK_THROWS_AS(partition(make_history({1.0, kInf}), 0.25), Error);
    CHECK_THROWS_AS(partition(make_history({kInf, kInf, kInf}), 0.25), Error);
}

TEST_CASE("kde: single support point peak value") {
    auto w = FocusWindow::initial(unit_space(), 100);
    // bandwidth floor: 1e-3 * width = 1e-3 (sigma = 0)
    const auto m = DensityModel::fit({{0.5}}, w);
    const double h = m.bandwidths()[0];
    CHECK(h == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(m.density({0.5}) == doctest::Approx(1.0 / (h * std::sqrt(2 * M_PI))).epsilon(1e-12));
}

TEST_CASE("kde: far queries clamp to the kernel floor") {
    auto w = FocusWindow::initial(unit_space(), 100);
    const auto m = DensityModel::fit({{0.0}}, w);
    const double h = m.bandwidths()[0];
    const double floor_density =
        std::exp(-0.5 * 20.0 * 20.0) / (h * std::sqrt(2 * M_PI));
    // 20 bandwidths away and (much) further give the same floored value
    CHECK(m.density({20.0 * h}) == doctest::Approx(floor_density).epsilon(1e-12));
    CHECK(m.density({0.9}) == doctest::Approx(floor_density).epsilon(1e-12));
    CHECK(m.density({0.9}) > 0.0);
}

TEST_CASE("kde: two-point mixture value at the midpoint") {
    // support {0, 1}, unit bandwidth, query 0.5:
    // 0.5*(phi(0.5) + phi(-0.5)) = e^-0.125 / sqrt(2 pi)
    const auto unit_h = DensityModel::with_bandwidths({{0.0}, {1.0}}, {1.0});
    CHECK(unit_h.density({0.5}) == doctest::Approx(0.3520653267642995).epsilon(1e-12));

    // Scott bandwidth path: sigma = 0.5, n = 2, d = 1 -> h = 0.5 * 2^(-0.2)
    std::vector<ParamSpec> specs = {{"p", -100.0, 100.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    auto w = FocusWindow::initial(space, 100);
    const auto m = DensityModel::fit({{0.0}, {1.0}}, w);
    const double h = 0.5 * std::pow(2.0, -0.2);
    CHECK(m.bandwidths()[0] == doctest::Approx(h).epsilon(1e-12));
    const double z = 0.5 / h;
    const double expected = std::exp(-0.5 * z * z) / (h * std::sqrt(2 * M_PI));
    CHECK(m.density({0.5}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kde: dimension mismatch is an error") {
    auto w = FocusWindow::initial(unit_space(2), 10);
    const auto m = DensityModel::fit({{0.5, 0.5}}, w);
    CHECK_THROWS(m.density({0.5}));
    CHECK_THROWS(DensityModel::fit({{0.5}}, w));
}

TEST_CASE("acquisition: equal densities score 1 for any gamma") {
    for (double gamma : {0.1, 0.25, 0.5, 0.9}) {
        CHECK(acquisition_score(3.7, 3.7, gamma) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("acquisition: direct evaluation") {
    // gamma = 0.25, g/l = 3 -> 1 / (0.75*3 + 0.25) = 0.4
    CHECK(acquisition_score(1.0, 3.0, 0.25) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("acquisition: g/l -> 0 limit is 1/gamma") {
    CHECK(acquisition_score(1.0, 1e-300, 0.25) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(acquisition_score_log(0.0, -1e6, 0.25) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("acquisition: strictly increasing in l/g") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double gamma = 0.05 + 0.9 * rng.next_double();
        const double l1 = std::exp(rng.next_uniform(-5, 5));
        const double g = std::exp(rng.next_uniform(-5, 5));
        const double l2 = l1 * (1.0 + rng.next_double() + 1e-6);
        CHECK(acquisition_score(l2, g, gamma) > acquisition_score(l1, g, gamma));
    }
    // log version agrees with the plain version
    CHECK(acquisition_score_log(std::log(2.0), std::log(6.0), 0.25) ==
          doctest::Approx(acquisition_score(2.0, 6.0, 0.25)).epsilon(1e-12));
}

TEST_CASE("acquisition: nonpositive densities are an error") {
    CHECK_THROWS_AS(acquisition_score(0.0, 1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(acquisition_score(1.0, -1.0, 0.25), std::invalid_argument);
}

TEST_CASE("quantize: snaps to the window grid") {
    auto w = FocusWindow::initial(unit_space(), 100); // [0,1], step 0.01
    CHECK(quantize({0.3456}, w)[0] == doctest::Approx(0.35).epsilon(1e-12));

    SUBCASE("idempotent") {
        const auto q = quantize({0.3456}, w);
        CHECK(quantize(q, w) == q);
    }
}

TEST_CASE("quantize: coarse grid example") {
    std::vector<ParamSpec> specs = {{"p", -2.0, 2.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    auto w = FocusWindow::initial(space, 8); // step 0.5
    CHECK(w.step[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(quantize({0.7}, w)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("quantize: idempotence on random grid points") {
    Rng rng(3);
    std::vector<ParamSpec> specs = {{"a", -3.0, 7.0, Scale::Linear},
                                    {"b", 0.5, 2.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    auto w = FocusWindow::initial(space, 37);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {rng.next_uniform(-3, 7), rng.next_uniform(0.5, 2)};
        const auto q = quantize(x, w);
        CHECK(quantize(q, w) == q);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(q[j] >= w.lo[j] - 1e-12);
            CHECK(q[j] <= w.hi[j] + 1e-12);
        }
    }
}

TEST_CASE("contraction rate: k=0 gives delta_init, then decays") {
    CHECK(contraction_rate(0, 0.3, 0.15) == 0.3);
    CHECK(contraction_rate(2, 0.3, 0.15) == doctest::Approx(0.3 * std::exp(-0.3)).epsilon(1e-12));
    CHECK(contraction_rate(2, 0.3, 0.15) == doctest::Approx(0.222245).epsilon(1e-6));
    CHECK(contraction_rate(500, 0.3, 0.15) < 1e-30);
}

TEST_CASE("update_window: contraction arithmetic") {
    std::vector<ParamSpec> specs = {{"p", -100.0, 100.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    OptimizerConfig cfg;
    cfg.delta_init = 0.25;
    cfg.alpha_decay = 1e-9; // delta stays ~0.25 at k=0
    auto w = FocusWindow::initial(space, 10);
    w.range = {2.0};
    const auto w2 = update_window(w, {0.0}, cfg, space);
    CHECK(w2.range[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(w2.batch == 1);
}

TEST_CASE("update_window: center may sit on a hard bound, edges clip") {
    std::vector<ParamSpec> specs = {{"p", 0.0, 10.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    OptimizerConfig cfg;
    auto w = FocusWindow::initial(space, 10); // center 5, range 5
    const auto w2 = update_window(w, {10.0}, cfg, space);
    CHECK(w2.center[0] == 10.0);
    CHECK(w2.hi[0] == 10.0);                     // clipped at the hard bound
    CHECK(w2.lo[0] == doctest::Approx(10.0 - w2.range[0]));
    CHECK(w2.step[0] == doctest::Approx((w2.hi[0] - w2.lo[0]) / 10).epsilon(1e-12));
}

TEST_CASE("update_window: three-batch range sequence") {
    // delta_init = 0.3, alpha = 0.15, r0 = 1:
    // r1 = 0.7, r2 = 0.7*(1 - 0.3 e^-0.15), r3 = r2*(1 - 0.3 e^-0.3)
    std::vector<ParamSpec> specs = {{"p", -100.0, 100.0, Scale::Linear}};
    SearchSpace space(std::move(specs));
    OptimizerConfig cfg; // defaults delta_init=0.3, alpha=0.15
    auto w = FocusWindow::initial(space, 10);
    w.range = {1.0};
    w.batch = 0;
    const auto w1 = update_window(w, {0.0}, cfg, space);
    CHECK(w1.range[0] == doctest::Approx(0.7).epsilon(1e-12));
    const auto w2 = update_window(w1, {0.0}, cfg, space);
    CHECK(w2.range[0] == doctest::Approx(0.7 * (1 - 0.3 * std::exp(-0.15))).epsilon(1e-12));
    CHECK(w2.range[0] == doctest::Approx(0.5192513249507379).epsilon(1e-12));
    const auto w3 = update_window(w2, {0.0}, cfg, space);
    CHECK(w3.range[0] == doctest::Approx(w2.range[0] * (1 - 0.3 * std::exp(-0.3))).epsilon(1e-12));
    CHECK(w3.range[0] == doctest::Approx(0.40385007215974883).epsilon(1e-12));
}

TEST_CASE("update_window: monotone focusing and step shrinkage") {
    std::vector<ParamSpec> specs = {{"a", -5.0, 5.0, Scale::Linear},
                                    {"b", 1e-3, 1e3, Scale::Log10}};
    SearchSpace space(std::move(specs));
    OptimizerConfig cfg;
    auto w = FocusWindow::initial(space, 50);
    Rng rng(123);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> center = {rng.next_uniform(-5, 5), rng.next_uniform(-3, 3)};
        const auto w2 = update_window(w, center, cfg, space);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(w2.range[j] < w.range[j]);
            CHECK(w2.lo[j] >= space.internal_lower(j) - 1e-12);
            CHECK(w2.hi[j] <= space.internal_upper(j) + 1e-12);
        }
        w = w2;
    }
}

TEST_CASE("propose: M=1 returns the single quantized candidate, inside the window") {
    SearchSpace space = unit_space(2);
    OptimizerConfig cfg;
    cfg.n_candidates = 1;
    auto w = FocusWindow::initial(space, 100);
    History h;
    Rng seed_rng(5);
    for (int i = 0; i < 10; ++i)
        h.append(Trial{{seed_rng.next_double(), seed_rng.next_double()}, seed_rng.next_double(),
                       0});
    Rng rng(9);
    const auto theta = propose(h, w, space, cfg, rng);
    REQUIRE(theta.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(theta[j] >= 0.0);
        CHECK(theta[j] <= 1.0);
        // on the grid
        const double m = (theta[j] - w.lo[j]) / w.step[j];
        CHECK(std::abs(m - std::round(m)) < 1e-9);
    }
}

TEST_CASE("propose: clustered good trials pull proposals to the cluster") {
    SearchSpace space = unit_space(1);
    OptimizerConfig cfg;
    auto w = FocusWindow::initial(space, 200);
    const double p = 0.62;
    History h;
    // 5 good trials exactly at p, 15 bad spread out
    for (int i = 0; i < 5; ++i) h.append(Trial{{p}, 0.1, 0});
    Rng spread(77);
    for (int i = 0; i < 15; ++i) h.append(Trial{{spread.next_double()}, 10.0, 0});

    int near = 0;
    const int n_seeds = 100;
    for (int s = 0; s < n_seeds; ++s) {
        Rng rng(1000 + s);
        const auto theta = propose(h, w, space, cfg, rng);
        if (std::abs(theta[0] - p) <= w.step[0] + 1e-12) ++near;
    }
    CHECK(near > 90);
}

TEST_CASE("propose: containment inside a tight window") {
    SearchSpace space = unit_space(3);
    OptimizerConfig cfg;
    auto w = FocusWindow::initial(space, 50);
    // shrink to an interior window
    w.center = {0.5, 0.5, 0.5};
    w.range = {0.1, 0.1, 0.1};
    for (std::size_t j = 0; j < 3; ++j) {
        w.lo[j] = 0.4;
        w.hi[j] = 0.6;
        w.step[j] = 0.2 / 50;
    }
    History h;
    Rng fill(3);
    for (int i = 0; i < 30; ++i)
        h.append(Trial{{fill.next_double(), fill.next_double(), fill.next_double()},
                       fill.next_double(), 0});
    for (int s = 0; s < 20; ++s) {
        Rng rng(s);
        const auto theta = propose(h, w, space, cfg, rng);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(theta[j] >= 0.4 - 1e-12);
            CHECK(theta[j] <= 0.6 + 1e-12);
        }
    }
}

TEST_CASE("history: best-so-far is nonincreasing and ties keep the first") {
    History h;
    Rng rng(31);
    double best = kInf;
    for (int i = 0; i < 200; ++i) {
        const double loss = rng.next_double() < 0.1 ? kInf : rng.next_double();
        h.append(Trial{{0.0}, loss, 0});
        best = std::min(best, loss);
        CHECK(h.best_loss() == best);
    }
    History ties;
    ties.append(Trial{{1.0}, 5.0, 0});
    ties.append(Trial{{2.0}, 5.0, 0});
    CHECK(*ties.best_index() == 0);
}

TEST_CASE("optimize: sphere beats random search at equal budget") {
    std::vector<ParamSpec> specs;
    for (int j = 0; j < 3; ++j)
        specs.push_back({"x" + std::to_string(j), -100.0, 100.0, Scale::Linear});
    SearchSpace space(std::move(specs));
    const std::vector<double> target = {12.5, -40.0, 71.0};
    auto sphere = [&](const std::vector<double>& x) {
        double acc = 0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += (x[j] - target[j]) * (x[j] - target[j]);
        return acc;
    };

    OptimizerConfig cfg;
    cfg.n_startup = 20;
    cfg.batch_size = 20;
    cfg.max_batches = 24; // 20 + 480 = 500 evaluations
    cfg.rng_seed = 42;
    const auto res = optimize(sphere, space, cfg);
    CHECK(res.history.size() == 500);
    CHECK(res.best_loss < 1e-2);

    // random-search baseline at the same budget stays far away
    std::vector<double> random_best;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(s * 7 + 1);
        double best = kInf;
        for (int i = 0; i < 500; ++i) {
            std::vector<double> x = {rng.next_uniform(-100, 100), rng.next_uniform(-100, 100),
                                     rng.next_uniform(-100, 100)};
            best = std::min(best, sphere(x));
        }
        random_best.push_back(best);
    }
    std::sort(random_best.begin(), random_best.end());
    CHECK(random_best[5] > 1e-1); // median
}

TEST_CASE("optimize: constant objective returns the constant") {
    SearchSpace space = unit_space(2);
    OptimizerConfig cfg;
    cfg.n_startup = 5;
    cfg.batch_size = 5;
    cfg.max_batches = 3;
    const auto res = optimize([](const std::vector<double>&) { return 3.25; }, space, cfg);
    CHECK(res.best_loss == 3.25);
    CHECK(res.history.size() == 20);
}

TEST_CASE("optimize: determinism, also with concurrent evaluation") {
    SearchSpace space = unit_space(4);
    auto obj = [](const std::vector<double>& x) {
        double acc = 0;
        for (double v : x) acc += (v - 0.3) * (v - 0.3);
        return acc;
    };
    OptimizerConfig cfg;
    cfg.n_startup = 10;
    cfg.batch_size = 8;
    cfg.max_batches = 6;
    cfg.rng_seed = 2024;

    const auto a = optimize(obj, space, cfg);
    const auto b = optimize(obj, space, cfg);
    cfg.n_threads = 4;
    const auto c = optimize(obj, space, cfg);

    REQUIRE(a.history.size() == b.history.size());
    REQUIRE(a.history.size() == c.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history.trials()[i].theta == b.history.trials()[i].theta);
        CHECK(a.history.trials()[i].loss == b.history.trials()[i].loss);
        CHECK(a.history.trials()[i].theta == c.history.trials()[i].theta);
        CHECK(a.history.trials()[i].loss == c.history.trials()[i].loss);
        CHECK(a.history.trials()[i].batch == c.history.trials()[i].batch);
    }
}

TEST_CASE("optimize: failures become +inf trials and the run continues") {
    SearchSpace space = unit_space(1);
    OptimizerConfig cfg;
    cfg.n_startup = 6;
    cfg.batch_size = 4;
    cfg.max_batches = 4;
    int calls = 0;
    auto obj = [&calls](const std::vector<double>& x) -> double {
        ++calls;
        if (x[0] > 0.5) throw EvalFailure("upper half is broken");
        if (x[0] > 0.45) return std::numeric_limits<double>::quiet_NaN();
        return x[0];
    };
    const auto res = optimize(obj, space, cfg);
    CHECK(calls == 6 + 16);
    CHECK(res.history.size() == 22);
    CHECK(std::isfinite(res.best_loss));
    bool saw_failure = false;
    for (const auto& t : res.history.trials()) saw_failure = saw_failure || std::isinf(t.loss);
    CHECK(saw_failure);
}

TEST_CASE("optimize: trials stay inside the hard bounds and on the grid") {
    std::vector<ParamSpec> specs = {{"lin", -4.0, 9.0, Scale::Linear},
                                    {"log", 1e-6, 1e2, Scale::Log10}};
    SearchSpace space(std::move(specs));
    OptimizerConfig cfg;
    cfg.n_startup = 10;
    cfg.batch_size = 10;
    cfg.max_batches = 5;
    const auto res =
        optimize([](const std::vector<double>& x) { return std::abs(x[0]) + std::abs(x[1]); },
                 space, cfg);
    for (const auto& t : res.history.trials()) {
        CHECK(t.theta[0] >= -4.0 - 1e-9);
        CHECK(t.theta[0] <= 9.0 + 1e-9);
        CHECK(t.theta[1] >= 1e-6 * (1 - 1e-9));
        CHECK(t.theta[1] <= 1e2 * (1 + 1e-9));
    }
}

TEST_CASE("optimize: batch labels are 0 for startup then 1..K") {
    SearchSpace space = unit_space(1);
    OptimizerConfig cfg;
    cfg.n_startup = 4;
    cfg.batch_size = 3;
    cfg.max_batches = 2;
    const auto res =
        optimize([](const std::vector<double>& x) { return x[0]; }, space, cfg);
    REQUIRE(res.history.size() == 10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(res.history.trials()[i].batch == 0);
    for (std::size_t i = 4; i < 7; ++i) CHECK(res.history.trials()[i].batch == 1);
    for (std::size_t i = 7; i < 10; ++i) CHECK(res.history.trials()[i].batch == 2);
}

TEST_CASE("config validation rejects out-of-range fields") {
    OptimizerConfig cfg;
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.n_startup = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.delta_init = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.delta_init = 0.0; // focusing disabled is allowed
    CHECK_NOTHROW(cfg.validate());
    cfg = {};
    cfg.n_grid = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("trace CSV carries header, batches and losses") {
    std::vector<ParamSpec> specs = {{"VOFF", -10.0, 5.0, Scale::Linear},
                                    {"KGAIN", 1e-4, 1e2, Scale::Log10}};
    SearchSpace space(std::move(specs));
    History h;
    h.append(Trial{{-2.0, 0.05}, 0.5, 0});
    h.append(Trial{{-1.0, 0.1}, kInf, 1});
    const std::string csv = trace_to_csv(h, space);
    CHECK(csv.find("trial,batch,loss,VOFF,KGAIN\n") == 0);
    CHECK(csv.find("0,0,0.5,-2,0.05\n") != std::string::npos);
    CHECK(csv.find("1,1,inf,-1,0.1\n") != std::string::npos);
}
