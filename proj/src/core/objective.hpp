#ifndef HEMTFIT_OBJECTIVE_HPP
#define HEMTFIT_OBJECTIVE_HPP

#include "datasets.hpp"

namespace hemtfit::objective {

/// Root-mean-square current error over matching (vgs, vds) grids.
/// Throws Error when the grids differ in size or bias points.
double rmse_iv(const IVDataset& sim, const IVDataset& meas);

/// Root-mean-square S-parameter error: sqrt((1/K) * sum_k of the
/// squared Frobenius distance over the entries present in both
/// datasets at frequency k). Throws Error on frequency-grid mismatch.
double rmse_s(const SParamDataset& sim, const SParamDataset& meas);

/// Range-normalized RMSE in percent: 100 * rmse / (max - min) of the
/// measured scalar magnitudes. Throws Error when the range is zero.
double nrmse_percent(double rmse, const std::vector<double>& meas_values);

/// The measured scalars used for normalization: drain currents for IV
/// data, entrywise complex magnitudes of present entries for S data.
std::vector<double> iv_magnitudes(const IVDataset& meas);
std::vector<double> s_magnitudes(const SParamDataset& meas);

} // namespace hemtfit::objective

#endif
