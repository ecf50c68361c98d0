#ifndef HEMTFIT_TPE_HPP
#define HEMTFIT_TPE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "search_space.hpp"

namespace hemtfit::tpe {

/// One evaluated parameter vector. `theta` is stored in external
/// (physical) coordinates; `loss` is +inf for failed evaluations.
/// Batch 0 is the uniform startup phase, batches 1..K are the focused
/// TPE batches.
struct Trial {
    std::vector<double> theta;
    double loss = kInf;
    int batch = 0;
};

/// Append-only record of every evaluation an optimizer run consumed.
class History {
  public:
    void append(Trial t);
    const std::vector<Trial>& trials() const { return trials_; }
    std::size_t size() const { return trials_.size(); }
    std::size_t finite_count() const { return finite_count_; }
    /// Index of the lowest-loss trial, earliest on ties. Empty history
    /// has no best.
    std::optional<std::size_t> best_index() const;
    double best_loss() const;

  private:
    std::vector<Trial> trials_;
    std::size_t finite_count_ = 0;
    std::optional<std::size_t> best_ = {};
};

struct OptimizerConfig {
    double gamma = 0.25;       // good/bad split fraction
    int n_startup = 20;        // uniform samples before any TPE proposal
    int batch_size = 20;       // B
    int max_batches = 25;      // K_max
    double delta_init = 0.30;  // initial contraction rate; 0 disables focusing
    double alpha_decay = 0.15; // decay constant of the contraction rate
    int n_grid = 200;          // grid points per dimension per window
    int n_candidates = 64;     // M candidates scored per proposal
    std::uint64_t rng_seed = 1;
    int n_threads = 1;         // objective evaluations per batch run concurrently when > 1

    void validate() const; // throws std::invalid_argument
};

/// The focus window for one batch, in internal coordinates (log10 for
/// log-scaled dimensions). The effective search region is
/// [center - range, center + range] clipped to the hard bounds; `lo`,
/// `hi` and `step` are derived from that clipped region.
struct FocusWindow {
    std::vector<double> center;
    std::vector<double> range;
    std::vector<double> step;
    std::vector<double> lo; // clipped lower edges
    std::vector<double> hi; // clipped upper edges
    int batch = 0;
    int n_grid = 2;

    /// Batch-0 window spanning the full hard-bounded domain: center at
    /// the bounds midpoint, range at the half-width.
    static FocusWindow initial(const SearchSpace& space, int n_grid);
};

/// Product-kernel Gaussian mixture over internal coordinates. One
/// support point per trial, one bandwidth per dimension (Scott rule
/// with a floor of 1e-3 of the window width so densities stay positive
/// and ratios stay finite).
class DensityModel {
  public:
    static DensityModel fit(const std::vector<std::vector<double>>& points,
                            const FocusWindow& window);
    /// Same mixture with caller-chosen bandwidths.
    static DensityModel with_bandwidths(const std::vector<std::vector<double>>& points,
                                        std::vector<double> bandwidths);

    double log_density(const std::vector<double>& x) const;
    /// exp(log_density), clamped to a strictly positive floor.
    double density(const std::vector<double>& x) const;

    std::size_t support_size() const { return points_.size(); }
    const std::vector<double>& bandwidths() const { return bandwidths_; }
    const std::vector<std::vector<double>>& points() const { return points_; }

  private:
    std::vector<std::vector<double>> points_;
    std::vector<double> bandwidths_;
};

/// Splits history into the ceil(gamma * n_finite) lowest-loss finite
/// trials ("good") and everything else, failed trials included
/// ("bad"). Ties break toward earlier insertion. Throws Error when
/// fewer than two finite trials exist.
std::pair<std::vector<Trial>, std::vector<Trial>> partition(const History& history, double gamma);

/// Density-ratio acquisition: 1 / ((1-gamma) * g/l + gamma), strictly
/// increasing in l/g.
double acquisition_score(double l_density, double g_density, double gamma);
/// Same score computed from log densities; immune to under/overflow.
double acquisition_score_log(double log_l, double log_g, double gamma);

/// Exponentially decaying contraction rate: delta_init * exp(-alpha * k).
double contraction_rate(int k, double delta_init, double alpha_decay);

/// Snaps every component to the window grid: lo_j + round((x_j - lo_j)
/// / step_j) * step_j, clamped to the grid. Idempotent.
std::vector<double> quantize(const std::vector<double>& theta_internal, const FocusWindow& window);

/// Recenters on the incumbent (internal coordinates), contracts the
/// range by the batch's contraction rate, clips the edges to the hard
/// bounds (the center is never moved), and recomputes the grid step.
FocusWindow update_window(const FocusWindow& window, const std::vector<double>& best_internal,
                          const OptimizerConfig& config, const SearchSpace& space);

/// One TPE proposal in internal coordinates: partitions history, fits
/// the good/bad density models, draws n_candidates from the good model
/// restricted to the window (rejection with uniform fallback), returns
/// the quantized acquisition argmax.
std::vector<double> propose(const History& history, const FocusWindow& window,
                            const SearchSpace& space, const OptimizerConfig& config, Rng& rng);

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimizeResult {
    std::vector<double> best_theta;
    double best_loss = kInf;
    History history;
};

/// Runs the full iterative-focusing loop: a uniform startup batch in
/// the initial window followed by max_batches batches of batch_size
/// proposals, the window recentering on the global best after each
/// batch. Objective failures (thrown EvalFailure, NaN, or negative
/// returns) become +inf trials; the run never aborts because of them.
/// Deterministic for a fixed (objective, space, config) triple
/// regardless of n_threads.
OptimizeResult optimize(const Objective& objective, const SearchSpace& space,
                        const OptimizerConfig& config);

/// Writes the `trial,batch,loss,<param names...>` trace.
std::string trace_to_csv(const History& history, const SearchSpace& space);
void write_trace_csv(const History& history, const SearchSpace& space, const std::string& path);

} // namespace hemtfit::tpe

#endif
