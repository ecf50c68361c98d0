#include "objective.hpp"

#include <algorithm>
#include <cmath>

namespace hemtfit::objective {

double rmse_iv(const IVDataset& sim, const IVDataset& meas) {
    if (sim.rows.size() != meas.rows.size()) throw Error("IV grid size mismatch");
    if (meas.rows.empty()) throw Error("empty IV dataset");
    double acc = 0.0;
    for (std::size_t i = 0; i < meas.rows.size(); ++i) {
        if (sim.rows[i].vgs != meas.rows[i].vgs || sim.rows[i].vds != meas.rows[i].vds)
            throw Error("IV grid bias mismatch at row " + std::to_string(i));
        const double r = sim.rows[i].id - meas.rows[i].id;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(meas.rows.size()));
}

double rmse_s(const SParamDataset& sim, const SParamDataset& meas) {
    if (sim.entries.size() != meas.entries.size()) throw Error("frequency grid size mismatch");
    if (meas.entries.empty()) throw Error("empty S-parameter dataset");
    double acc = 0.0;
    for (std::size_t k = 0; k < meas.entries.size(); ++k) {
        const auto& a = sim.entries[k];
        const auto& b = meas.entries[k];
        if (a.freq_hz != b.freq_hz)
            throw Error("frequency grid mismatch at index " + std::to_string(k));
        const unsigned both = a.mask & b.mask;
        for (unsigned i = 0; i < 4; ++i) {
            if (!((both >> i) & 1u)) continue; // masked entries never contribute
            acc += std::norm(a.s[i] - b.s[i]);
        }
    }
    return std::sqrt(acc / static_cast<double>(meas.entries.size()));
}

double nrmse_percent(double rmse, const std::vector<double>& meas_values) {
    if (meas_values.empty()) throw Error("no measured values to normalize by");
    const auto [lo, hi] = std::minmax_element(meas_values.begin(), meas_values.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw Error("measured range is zero");
    return 100.0 * rmse / range;
}

std::vector<double> iv_magnitudes(const IVDataset& meas) {
    std::vector<double> out;
    out.reserve(meas.rows.size());
    for (const auto& r : meas.rows) out.push_back(r.id);
    return out;
}

std::vector<double> s_magnitudes(const SParamDataset& meas) {
    std::vector<double> out;
    for (const auto& e : meas.entries)
        for (unsigned i = 0; i < 4; ++i)
            if (e.has(static_cast<SIndex>(i))) out.push_back(std::abs(e.s[i]));
    return out;
}

} // namespace hemtfit::objective
