#ifndef HEMTFIT_TEST_CHART_RENDER_HPP
#define HEMTFIT_TEST_CHART_RENDER_HPP

#include <map>
#include <vector>

#include "datasets.hpp"
#include "digitize.hpp"
#include "raster.hpp"

namespace hemtfit::testsupport {

/// Layout of a rendered test chart (linear axes).
struct ChartLayout {
    int width = 800;
    int height = 600;
    int margin_left = 80;
    int margin_right = 50;
    int margin_top = 40;
    int margin_bottom = 60;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    int plot_left() const { return margin_left; }
    int plot_right() const { return width - margin_right; }
    int plot_top() const { return margin_top; }
    int plot_bottom() const { return height - margin_bottom; }

    double px_of_x(double x) const;
    double py_of_y(double y) const;
};

struct RenderedChart {
    Image image;
    ChartLayout layout;
    std::vector<digitize::CalibrationPoint> calibration;
    std::vector<digitize::CurveLabel> labels;
};

/// Draws axes plus one single-pixel-per-column polyline per curve in a
/// distinct saturated color, and builds the calibration/label sidecar
/// data a digitization run needs. Curves are rendered in ascending
/// vgs order.
RenderedChart render_iv_chart(const IVDataset& data, const ChartLayout& layout);

/// Convenience grouping: vgs -> (vds, id) pairs in row order.
std::map<double, std::vector<std::pair<double, double>>> group_by_vgs(const IVDataset& data);

} // namespace hemtfit::testsupport

#endif
