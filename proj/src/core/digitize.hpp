#ifndef HEMTFIT_DIGITIZE_HPP
#define HEMTFIT_DIGITIZE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "datasets.hpp"
#include "raster.hpp"
#include "search_space.hpp" // Scale

namespace hemtfit::digitize {

enum class Axis { X, Y };

/// One known (pixel, physical value) pair along an axis.
struct CalibrationPoint {
    Axis axis = Axis::X;
    double pixel = 0.0;
    double value = 0.0;
};

/// Pixel -> physical transform of one axis: value = alpha*p + beta for
/// linear axes, value = 10^(alpha*p + beta) for log axes.
struct AxisModel {
    Scale scale = Scale::Linear;
    double alpha = 1.0;
    double beta = 0.0;

    double apply(double pixel) const;
};

struct PixelPoint {
    int x = 0;
    int y = 0;
};

/// One segmented curve: its raw component pixels plus the per-column
/// vertical-centroid path (one fractional-y point per x column, gaps
/// of at most 5 columns filled by linear interpolation).
struct CurveTrace {
    std::vector<PixelPoint> pixels;
    std::vector<std::pair<int, double>> centerline; // (column, centroid y), ascending column
    Rgb color;
};

/// A curve's parameter annotation, e.g. "Vgs=1.0V" anchored near the
/// curve it names.
struct CurveLabel {
    std::string text;
    double value = 0.0; // parsed physical value (volts)
    double px = 0.0;
    double py = 0.0;
};

/// The two dominant orthogonal chart axes in Hough (rho, theta) form
/// plus their intersection.
struct DetectedAxes {
    double vertical_rho = 0.0; // y axis line
    double vertical_theta_deg = 0.0;
    double horizontal_rho = 0.0; // x axis line
    double horizontal_theta_deg = 90.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
};

struct DigitizedCurve {
    double vgs = 0.0;
    std::vector<std::pair<double, double>> points; // (x_phys, y_phys), x strictly ascending
};

struct DigitizedChart {
    AxisModel x_axis;
    AxisModel y_axis;
    std::vector<DigitizedCurve> curves;
};

struct DigitizeResult {
    DigitizedChart chart;
    IVDataset dataset;
    std::vector<std::string> warnings;
};

/// Least-squares (alpha, beta) from calibration points; the target is
/// the raw value on linear axes and log10(value) on log axes. Needs
/// at least two distinct pixel coordinates.
AxisModel fit_axis(const std::vector<CalibrationPoint>& points, Scale scale);

/// Applies the per-axis transforms to one pixel pair.
std::pair<double, double> map_pixel(const AxisModel& x_axis, const AxisModel& y_axis, double px,
                                    double py);

/// Standard Hough transform (1 px rho bins, 1 degree theta bins) over
/// the dark pixels; picks the strongest near-vertical and
/// near-horizontal lines (within 5 degrees of axis-aligned, at least
/// half the span in votes). Throws Error when either is missing.
DetectedAxes detect_axes(const Image& img);

/// Per-color segmentation of saturated curve pixels, 8-connected
/// components of at least 30 pixels, column centroids per component.
/// Same-color curves that touch or cross merge into one trace.
std::vector<CurveTrace> trace_curves(const Image& img);

struct LabelMatch {
    std::size_t label_index;
    std::size_t trace_index;
    double distance;
};

/// Greedy assignment by ascending label-anchor-to-trace distance; a
/// trace is used at most once; ties prefer the smaller trace index.
/// Labels left over (more labels than traces) come back unmatched.
std::pair<std::vector<LabelMatch>, std::vector<std::size_t>> match_labels(
    const std::vector<CurveLabel>& labels, const std::vector<CurveTrace>& traces);

/// Full chart-to-data conversion: axis detection (validation), curve
/// tracing, label matching, axis calibration, pixel mapping, and
/// uniform 100-point resampling per curve. Emits one IV row per
/// resampled point: (vgs from the label, vds = x, id = y).
DigitizeResult digitize(const Image& img, const std::vector<CalibrationPoint>& calibration,
                        const std::vector<CurveLabel>& labels, Scale x_scale, Scale y_scale);

/// Sidecar loaders. Calibration: JSON array of {axis:"x"|"y", pixel,
/// value}. Labels: JSON array of {text, value, px, py}.
std::vector<CalibrationPoint> load_calibration_json(const std::string& path);
std::vector<CurveLabel> load_labels_json(const std::string& path);

} // namespace hemtfit::digitize

#endif
