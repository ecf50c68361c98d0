#include "device.hpp"

#include <cmath>

namespace hemtfit::device {

void DCParams::validate() const {
    if (!(nfactor > 0.0)) throw std::invalid_argument("NFACTOR must be > 0");
    if (!(kgain > 0.0)) throw std::invalid_argument("KGAIN must be > 0");
    if (!(delta >= 1.0)) throw std::invalid_argument("DELTA must be >= 1");
    if (ua < 0.0 || ub < 0.0) throw std::invalid_argument("UA/UB must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("LAMBDA must be >= 0");
    if (rsc < 0.0 || rdc < 0.0) throw std::invalid_argument("RSC/RDC must be >= 0");
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Closed-form channel current at the internal nodes (contact
// resistances already subtracted from the terminal voltages).
double channel_current(const DCParams& p, double vgs_int, double vds_int) {
    if (vds_int <= 0.0) return 0.0;
    const double nvt = p.nfactor * kThermalVoltage;
    const double veff = nvt * softplus((vgs_int - p.voff) / nvt);
    if (veff <= 0.0) return 0.0; // numeric underflow deep below threshold

    const double mu_red = 1.0 / (1.0 + p.ua * veff + p.ub * veff * veff);

    // vdeff = vds / (1 + (vds/veff)^DELTA)^(1/DELTA), in log form so
    // large vds/veff ratios cannot overflow.
    const double t = p.delta * std::log(vds_int / veff);
    const double vdeff = vds_int * std::exp(-softplus(t) / p.delta);

    const double id =
        p.kgain * mu_red * (veff * vdeff - 0.5 * vdeff * vdeff) * (1.0 + p.lambda * vds_int);
    return id > 0.0 ? id : 0.0;
}

} // namespace

double dc_current(const DCParams& p, const BiasPoint& bias) {
    p.validate();
    if (!std::isfinite(bias.vgs) || !std::isfinite(bias.vds))
        throw std::invalid_argument("bias must be finite");

    const double r_total = p.rsc + p.rdc;
    auto f = [&](double id) {
        return channel_current(p, bias.vgs - id * p.rsc, bias.vds - id * r_total);
    };

    // Damped fixed point on Id. The step is halved whenever the
    // residual grows, up to 20 times.
    double id = 0.0;
    double damping = 1.0;
    int halvings = 0;
    double prev_resid = kInf;
    for (int iter = 0; iter < 50; ++iter) {
        const double fid = f(id);
        const double resid = std::abs(fid - id);
        if (resid <= 1e-9 * std::max(std::abs(fid), 1e-30)) return fid;
        if (resid >= prev_resid) {
            if (halvings >= 20) break;
            damping *= 0.5;
            ++halvings;
        }
        id += damping * (fid - id);
        prev_resid = resid;
    }
    throw EvalFailure("dc operating point did not converge");
}

IVDataset iv_sweep(const DCParams& p, const std::vector<double>& vgs_list,
                   const std::vector<double>& vds_list) {
    if (vgs_list.empty() || vds_list.empty())
        throw std::invalid_argument("sweep grids must be nonempty");
    IVDataset ds;
    ds.rows.reserve(vgs_list.size() * vds_list.size());
    for (double vgs : vgs_list)
        for (double vds : vds_list)
            ds.rows.push_back({vgs, vds, dc_current(p, {vgs, vds})});
    return ds;
}

IVDataset simulate_iv_at(const DCParams& p, const IVDataset& grid) {
    IVDataset ds;
    ds.rows.reserve(grid.rows.size());
    for (const auto& r : grid.rows)
        ds.rows.push_back({r.vgs, r.vds, dc_current(p, {r.vgs, r.vds})});
    return ds;
}

} // namespace hemtfit::device
