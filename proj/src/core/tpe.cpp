#include "tpe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace hemtfit::tpe {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727; // log(sqrt(2*pi))
constexpr double kKernelZCap = 20.0;               // standardized-distance cap; sets the density floor
constexpr double kBandwidthFloorFrac = 0.05;       // KDE bandwidth floor as a fraction of window width
} // namespace

void History::append(Trial t) {
    if (std::isnan(t.loss) || t.loss < 0.0)
        throw std::invalid_argument("trial loss must be >= 0 or +inf");
    if (t.batch < 0) throw std::invalid_argument("trial batch must be >= 0");
    if (std::isfinite(t.loss)) {
        ++finite_count_;
        if (!best_ || t.loss < trials_[*best_].loss) best_ = trials_.size();
    }
    trials_.push_back(std::move(t));
}

std::optional<std::size_t> History::best_index() const { return best_; }

double History::best_loss() const { return best_ ? trials_[*best_].loss : kInf; }

void OptimizerConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    if (n_startup < 2) throw std::invalid_argument("n_startup must be >= 2");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (max_batches < 1) throw std::invalid_argument("max_batches must be >= 1");
    // delta_init = 0 is allowed and turns focusing off entirely (the
    // window is then never recentered or contracted).
    if (!(delta_init >= 0.0 && delta_init < 1.0))
        throw std::invalid_argument("delta_init must be in [0,1)");
    if (!(alpha_decay > 0.0)) throw std::invalid_argument("alpha_decay must be > 0");
    if (n_grid < 2) throw std::invalid_argument("n_grid must be >= 2");
    if (n_candidates < 1) throw std::invalid_argument("n_candidates must be >= 1");
    if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
}

FocusWindow FocusWindow::initial(const SearchSpace& space, int n_grid) {
    const std::size_t n = space.size();
    FocusWindow w;
    w.batch = 0;
    w.n_grid = n_grid;
    w.center.resize(n);
    w.range.resize(n);
    w.step.resize(n);
    w.lo.resize(n);
    w.hi.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = space.internal_lower(j);
        const double b = space.internal_upper(j);
        w.center[j] = 0.5 * (a + b);
        w.range[j] = 0.5 * (b - a);
        w.lo[j] = a;
        w.hi[j] = b;
        w.step[j] = (b - a) / n_grid;
    }
    return w;
}

std::pair<std::vector<Trial>, std::vector<Trial>> partition(const History& history, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    const auto& trials = history.trials();
    std::vector<std::size_t> finite;
    finite.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i)
        if (std::isfinite(trials[i].loss)) finite.push_back(i);
    if (finite.size() < 2) throw Error("partition needs at least 2 finite-loss trials");

    const std::size_t n_good =
        static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(finite.size())));
    // stable_sort keeps insertion order on equal losses.
    std::stable_sort(finite.begin(), finite.end(), [&](std::size_t a, std::size_t b) {
        return trials[a].loss < trials[b].loss;
    });

    std::vector<bool> is_good(trials.size(), false);
    for (std::size_t i = 0; i < n_good && i < finite.size(); ++i) is_good[finite[i]] = true;

    std::vector<Trial> good, bad;
    good.reserve(n_good);
    bad.reserve(trials.size() - n_good);
    for (std::size_t i = 0; i < trials.size(); ++i)
        (is_good[i] ? good : bad).push_back(trials[i]);
    return {std::move(good), std::move(bad)};
}

DensityModel DensityModel::fit(const std::vector<std::vector<double>>& points,
                               const FocusWindow& window) {
    if (points.empty()) throw std::invalid_argument("density model needs support points");
    const std::size_t n = points.size();
    const std::size_t d = window.center.size();
    for (const auto& p : points)
        if (p.size() != d) throw std::invalid_argument("support point dimension mismatch");

    DensityModel m;
    m.points_ = points;
    m.bandwidths_.resize(d);
    // Scott's rule per dimension, floored at 1e-3 of the window width.
    const double scott = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& p : points) mean += p[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& p : points) var += (p[j] - mean) * (p[j] - mean);
        var /= static_cast<double>(n);
        const double floor = kBandwidthFloorFrac * (window.hi[j] - window.lo[j]);
        m.bandwidths_[j] = std::max(std::sqrt(var) * scott, floor);
        if (!(m.bandwidths_[j] > 0.0)) m.bandwidths_[j] = 1e-12; // degenerate zero-width window
    }
    return m;
}

DensityModel DensityModel::with_bandwidths(const std::vector<std::vector<double>>& points,
                                           std::vector<double> bandwidths) {
    if (points.empty()) throw std::invalid_argument("density model needs support points");
    for (const auto& p : points)
        if (p.size() != bandwidths.size())
            throw std::invalid_argument("support point dimension mismatch");
    for (double h : bandwidths)
        if (!(h > 0.0)) throw std::invalid_argument("bandwidths must be > 0");
    DensityModel m;
    m.points_ = points;
    m.bandwidths_ = std::move(bandwidths);
    return m;
}

double DensityModel::log_density(const std::vector<double>& x) const {
    const std::size_t d = bandwidths_.size();
    if (x.size() != d) throw std::invalid_argument("query dimension mismatch");

    double log_h_sum = 0.0;
    for (double h : bandwidths_) log_h_sum += std::log(h);

    // logsumexp over mixture components.
    double max_e = -kInf;
    std::vector<double> exps(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double z = (x[j] - points_[i][j]) / bandwidths_[j];
            z = std::min(std::abs(z), kKernelZCap);
            e -= 0.5 * z * z;
        }
        exps[i] = e;
        max_e = std::max(max_e, e);
    }
    double acc = 0.0;
    for (double e : exps) acc += std::exp(e - max_e);
    return max_e + std::log(acc) - std::log(static_cast<double>(points_.size())) -
           static_cast<double>(d) * kLogSqrt2Pi - log_h_sum;
}

double DensityModel::density(const std::vector<double>& x) const {
    const double v = std::exp(log_density(x));
    return std::max(v, std::numeric_limits<double>::min());
}

double acquisition_score(double l_density, double g_density, double gamma) {
    if (!(l_density > 0.0) || !(g_density > 0.0))
        throw std::invalid_argument("acquisition needs positive densities");
    return 1.0 / ((1.0 - gamma) * (g_density / l_density) + gamma);
}

double acquisition_score_log(double log_l, double log_g, double gamma) {
    const double ratio = std::exp(std::min(log_g - log_l, 700.0));
    return 1.0 / ((1.0 - gamma) * ratio + gamma);
}

double contraction_rate(int k, double delta_init, double alpha_decay) {
    if (k < 0) throw std::invalid_argument("batch index must be >= 0");
    return delta_init * std::exp(-alpha_decay * static_cast<double>(k));
}

std::vector<double> quantize(const std::vector<double>& theta_internal,
                             const FocusWindow& window) {
    const std::size_t d = window.center.size();
    if (theta_internal.size() != d) throw std::invalid_argument("theta dimension mismatch");
    std::vector<double> out(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double s = window.step[j];
        if (!(s > 0.0)) {
            out[j] = window.lo[j];
            continue;
        }
        long long m = std::llround((theta_internal[j] - window.lo[j]) / s);
        m = std::clamp(m, 0LL, static_cast<long long>(window.n_grid));
        out[j] = window.lo[j] + static_cast<double>(m) * s;
    }
    return out;
}

FocusWindow update_window(const FocusWindow& window, const std::vector<double>& best_internal,
                          const OptimizerConfig& config, const SearchSpace& space) {
    const std::size_t d = window.center.size();
    if (best_internal.size() != d) throw std::invalid_argument("center dimension mismatch");
    const double delta = contraction_rate(window.batch, config.delta_init, config.alpha_decay);

    FocusWindow next;
    next.batch = window.batch + 1;
    next.n_grid = window.n_grid;
    next.center = best_internal;
    next.range.resize(d);
    next.step.resize(d);
    next.lo.resize(d);
    next.hi.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        next.range[j] = window.range[j] * (1.0 - delta);
        // Clip edges only; the center stays where the incumbent is,
        // even when that is a hard bound.
        next.lo[j] = std::max(next.center[j] - next.range[j], space.internal_lower(j));
        next.hi[j] = std::min(next.center[j] + next.range[j], space.internal_upper(j));
        next.step[j] = (next.hi[j] - next.lo[j]) / next.n_grid;
    }
    return next;
}

namespace {

std::vector<double> uniform_in_window(const FocusWindow& w, Rng& rng) {
    std::vector<double> x(w.lo.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.next_uniform(w.lo[j], w.hi[j]);
    return x;
}

bool inside_window(const std::vector<double>& x, const FocusWindow& w) {
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < w.lo[j] || x[j] > w.hi[j]) return false;
    return true;
}

// Draw one candidate from the good-model mixture, truncated to the
// window by rejection; uniform fallback after 100 rejections.
std::vector<double> sample_candidate(const DensityModel& good, const FocusWindow& w, Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const std::size_t i = rng.next_index(good.support_size());
        std::vector<double> x(w.lo.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = good.points()[i][j] + good.bandwidths()[j] * rng.next_normal();
        if (inside_window(x, w)) return x;
    }
    return uniform_in_window(w, rng);
}

} // namespace

std::vector<double> propose(const History& history, const FocusWindow& window,
                            const SearchSpace& space, const OptimizerConfig& config, Rng& rng) {
    for (std::size_t j = 0; j < window.lo.size(); ++j)
        if (!(window.lo[j] <= window.hi[j])) throw Error("empty focus window");

    auto [good, bad] = partition(history, config.gamma);
    if (good.empty() || bad.empty()) {
        // Degenerate split (gamma close to 1 with a tiny history):
        // nothing to contrast, fall back to exploration.
        return quantize(uniform_in_window(window, rng), window);
    }

    auto to_internal_points = [&](const std::vector<Trial>& ts) {
        std::vector<std::vector<double>> pts;
        pts.reserve(ts.size());
        for (const auto& t : ts) pts.push_back(space.to_internal(t.theta));
        return pts;
    };
    const DensityModel l = DensityModel::fit(to_internal_points(good), window);
    const DensityModel g = DensityModel::fit(to_internal_points(bad), window);

    std::vector<double> best_x;
    double best_score = -kInf;
    for (int c = 0; c < config.n_candidates; ++c) {
        std::vector<double> x = sample_candidate(l, window, rng);
        const double score = acquisition_score_log(l.log_density(x), g.log_density(x), config.gamma);
        if (score > best_score) {
            best_score = score;
            best_x = std::move(x);
        }
    }
    return quantize(best_x, window);
}

namespace {

// Evaluates objective(theta) for every proposal, optionally across
// threads. Failures (EvalFailure, NaN, negative) become +inf. Results
// land at the proposal's index, so ordering is thread-independent.
std::vector<double> evaluate_batch(const Objective& objective,
                                   const std::vector<std::vector<double>>& thetas, int n_threads) {
    std::vector<double> losses(thetas.size(), kInf);
    auto eval_one = [&](std::size_t i) {
        double loss = kInf;
        try {
            loss = objective(thetas[i]);
        } catch (const EvalFailure&) {
            loss = kInf;
        }
        if (std::isnan(loss) || loss < 0.0) loss = kInf;
        losses[i] = loss;
    };
    const int workers = std::min<std::size_t>(n_threads, thetas.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < thetas.size(); ++i) eval_one(i);
        return losses;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < thetas.size();) eval_one(i);
        });
    for (auto& t : pool) t.join();
    return losses;
}

} // namespace

OptimizeResult optimize(const Objective& objective, const SearchSpace& space,
                        const OptimizerConfig& config) {
    config.validate();
    Rng rng(config.rng_seed);
    FocusWindow window = FocusWindow::initial(space, config.n_grid);
    History history;

    auto run_batch = [&](const std::vector<std::vector<double>>& internal_thetas, int batch_label) {
        std::vector<std::vector<double>> external;
        external.reserve(internal_thetas.size());
        for (const auto& u : internal_thetas) external.push_back(space.to_external(u));
        const std::vector<double> losses = evaluate_batch(objective, external, config.n_threads);
        for (std::size_t i = 0; i < external.size(); ++i)
            history.append(Trial{std::move(external[i]), losses[i], batch_label});
    };

    // Startup: uniform quantized samples over the full initial window.
    std::vector<std::vector<double>> startup;
    startup.reserve(config.n_startup);
    for (int i = 0; i < config.n_startup; ++i)
        startup.push_back(quantize(uniform_in_window(window, rng), window));
    run_batch(startup, 0);

    for (int k = 0; k < config.max_batches; ++k) {
        std::vector<std::vector<double>> proposals;
        proposals.reserve(config.batch_size);
        for (int i = 0; i < config.batch_size; ++i) {
            if (history.finite_count() >= 2)
                proposals.push_back(propose(history, window, space, config, rng));
            else
                proposals.push_back(quantize(uniform_in_window(window, rng), window));
        }
        run_batch(proposals, k + 1);

        if (config.delta_init > 0.0) {
            if (auto bi = history.best_index()) {
                const auto center = space.to_internal(history.trials()[*bi].theta);
                window = update_window(window, center, config, space);
            }
            // With no finite trial yet there is no incumbent to focus
            // on; keep exploring the current window.
        }
    }

    OptimizeResult result;
    result.history = std::move(history);
    if (auto bi = result.history.best_index()) {
        result.best_theta = result.history.trials()[*bi].theta;
        result.best_loss = result.history.trials()[*bi].loss;
    }
    return result;
}

std::string trace_to_csv(const History& history, const SearchSpace& space) {
    std::string out = "trial,batch,loss";
    for (const auto& s : space.specs()) out += "," + s.name;
    out += "\n";
    const auto& trials = history.trials();
    for (std::size_t i = 0; i < trials.size(); ++i) {
        out += std::to_string(i);
        out += "," + std::to_string(trials[i].batch);
        out += "," + fmt_double(trials[i].loss);
        for (double v : trials[i].theta) out += "," + fmt_double(v);
        out += "\n";
    }
    return out;
}

void write_trace_csv(const History& history, const SearchSpace& space, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open trace file '" + path + "' for writing");
    f << trace_to_csv(history, space);
    if (!f.good()) throw Error("failed writing trace file '" + path + "'");
}

} // namespace hemtfit::tpe
