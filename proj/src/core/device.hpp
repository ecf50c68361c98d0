#ifndef HEMTFIT_DEVICE_HPP
#define HEMTFIT_DEVICE_HPP

#include <vector>

#include "datasets.hpp"

namespace hemtfit::device {

/// DC surrogate parameters. KGAIN folds geometry, mobility and barrier
/// permittivity into a single transconductance gain in A/V^2.
struct DCParams {
    double voff = -2.0;    // cut-off voltage, V
    double nfactor = 1.0;  // sub-threshold slope factor
    double kgain = 0.05;   // gain, A/V^2
    double ua = 0.0;       // first-order mobility degradation, 1/V
    double ub = 0.0;       // second-order mobility degradation, 1/V^2
    double delta = 2.0;    // velocity-saturation smoothing, >= 1
    double lambda = 0.0;   // channel-length modulation, 1/V
    double rsc = 0.0;      // source contact resistance, ohm
    double rdc = 0.0;      // drain contact resistance, ohm

    void validate() const; // throws std::invalid_argument
};

struct BiasPoint {
    double vgs = 0.0;
    double vds = 0.0;
};

/// Thermal voltage at 300 K. Temperature is not a fitting variable.
inline constexpr double kThermalVoltage = 0.02585;

/// Drain current of the DC surrogate at one bias point. Contact
/// resistances make the terminal equations implicit; they are solved
/// by a damped fixed point on Id (relative tolerance 1e-9, at most 50
/// iterations, step halved on divergence up to 20 times). Throws
/// EvalFailure when the fixed point fails to settle.
double dc_current(const DCParams& p, const BiasPoint& bias);

/// Cartesian sweep, vgs-major then vds in list order.
IVDataset iv_sweep(const DCParams& p, const std::vector<double>& vgs_list,
                   const std::vector<double>& vds_list);

/// Simulates at exactly the (vgs, vds) points of a measured dataset,
/// preserving row order. This is what the DC objective compares.
IVDataset simulate_iv_at(const DCParams& p, const IVDataset& grid);

} // namespace hemtfit::device

#endif
