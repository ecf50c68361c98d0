#include "digitize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>

#include <json.hpp>

namespace hemtfit::digitize {

double AxisModel::apply(double pixel) const {
    const double v = alpha * pixel + beta;
    return scale == Scale::Log10 ? std::pow(10.0, v) : v;
}

AxisModel fit_axis(const std::vector<CalibrationPoint>& points, Scale scale) {
    if (points.size() < 2) throw Error("axis calibration needs at least 2 points");
    std::vector<double> ps, vs;
    ps.reserve(points.size());
    vs.reserve(points.size());
    for (const auto& c : points) {
        double v = c.value;
        if (scale == Scale::Log10) {
            if (!(v > 0.0)) throw Error("log axis calibration value must be > 0");
            v = std::log10(v);
        }
        ps.push_back(c.pixel);
        vs.push_back(v);
    }
    const double n = static_cast<double>(ps.size());
    double pm = 0.0, vm = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        pm += ps[i];
        vm += vs[i];
    }
    pm /= n;
    vm /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        sxx += (ps[i] - pm) * (ps[i] - pm);
        sxy += (ps[i] - pm) * (vs[i] - vm);
    }
    if (!(sxx > 0.0)) throw Error("axis calibration pixels are coincident");
    AxisModel m;
    m.scale = scale;
    m.alpha = sxy / sxx;
    m.beta = vm - m.alpha * pm;
    if (m.alpha == 0.0) throw Error("axis calibration is degenerate (alpha = 0)");
    return m;
}

std::pair<double, double> map_pixel(const AxisModel& x_axis, const AxisModel& y_axis, double px,
                                    double py) {
    return {x_axis.apply(px), y_axis.apply(py)};
}

DetectedAxes detect_axes(const Image& img) {
    const int w = img.width(), h = img.height();
    const int diag = static_cast<int>(std::ceil(std::hypot(w, h)));
    const int n_rho = 2 * diag + 1;
    std::vector<int> acc(static_cast<std::size_t>(180) * n_rho, 0);

    double cos_t[180], sin_t[180];
    for (int t = 0; t < 180; ++t) {
        cos_t[t] = std::cos(t * M_PI / 180.0);
        sin_t[t] = std::sin(t * M_PI / 180.0);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (img.luma(x, y) >= 128) continue;
            for (int t = 0; t < 180; ++t) {
                const int rho = static_cast<int>(std::lround(x * cos_t[t] + y * sin_t[t]));
                ++acc[static_cast<std::size_t>(t) * n_rho + (rho + diag)];
            }
        }

    auto best_in = [&](const std::vector<int>& thetas) {
        int best_votes = -1, best_t = 0, best_r = 0;
        for (int t : thetas)
            for (int r = 0; r < n_rho; ++r) {
                const int v = acc[static_cast<std::size_t>(t) * n_rho + r];
                if (v > best_votes) {
                    best_votes = v;
                    best_t = t;
                    best_r = r - diag;
                }
            }
        return std::tuple{best_votes, best_t, best_r};
    };

    std::vector<int> vertical_thetas = {0, 1, 2, 3, 4, 5, 175, 176, 177, 178, 179};
    std::vector<int> horizontal_thetas;
    for (int t = 85; t <= 95; ++t) horizontal_thetas.push_back(t);

    const auto [v_votes, v_t, v_r] = best_in(vertical_thetas);
    const auto [h_votes, h_t, h_r] = best_in(horizontal_thetas);
    if (v_votes < h / 2) throw Error("no vertical axis line found");
    if (h_votes < w / 2) throw Error("no horizontal axis line found");

    DetectedAxes axes;
    axes.vertical_theta_deg = v_t;
    axes.vertical_rho = v_r;
    axes.horizontal_theta_deg = h_t;
    axes.horizontal_rho = h_r;

    // Intersection of x*cos(t) + y*sin(t) = rho for both lines.
    const double c1 = cos_t[v_t], s1 = sin_t[v_t];
    const double c2 = cos_t[h_t], s2 = sin_t[h_t];
    const double det = c1 * s2 - s1 * c2;
    if (std::abs(det) < 1e-9) throw Error("detected axis lines are parallel");
    axes.origin_x = (static_cast<double>(v_r) * s2 - static_cast<double>(h_r) * s1) / det;
    axes.origin_y = (static_cast<double>(h_r) * c1 - static_cast<double>(v_r) * c2) / det;
    return axes;
}

namespace {

// Quantize each channel to {0,128,255}; curve colors survive this even
// with mild anti-aliasing at the edges.
int color_key(Rgb p) {
    auto q = [](std::uint8_t c) { return c < 64 ? 0 : c < 192 ? 1 : 2; };
    return q(p.r) * 9 + q(p.g) * 3 + q(p.b);
}

bool is_curve_pixel(Rgb p) {
    const int mx = std::max({p.r, p.g, p.b});
    const int mn = std::min({p.r, p.g, p.b});
    return mx - mn >= 60 && mx >= 80; // saturated and not near-black
}

std::vector<std::pair<int, double>> column_centroids(const std::vector<PixelPoint>& pixels) {
    std::map<int, std::pair<double, int>> cols; // x -> (sum y, count)
    for (const auto& p : pixels) {
        auto& [sum, cnt] = cols[p.x];
        sum += p.y;
        ++cnt;
    }
    std::vector<std::pair<int, double>> line;
    line.reserve(cols.size());
    for (const auto& [x, sc] : cols) line.emplace_back(x, sc.first / sc.second);

    // Fill gaps of at most 5 missing columns by linear interpolation.
    std::vector<std::pair<int, double>> filled;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (!filled.empty()) {
            const auto [x0, y0] = filled.back();
            const auto [x1, y1] = line[i];
            const int gap = x1 - x0 - 1;
            if (gap >= 1 && gap <= 5)
                for (int x = x0 + 1; x < x1; ++x)
                    filled.emplace_back(
                        x, y0 + (y1 - y0) * (static_cast<double>(x - x0) / (x1 - x0)));
        }
        filled.push_back(line[i]);
    }
    return filled;
}

} // namespace

std::vector<CurveTrace> trace_curves(const Image& img) {
    const int w = img.width(), h = img.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    std::vector<CurveTrace> traces;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (label[idx(x, y)] != -1 || !is_curve_pixel(img.at(x, y))) continue;
            // BFS one 8-connected same-color component.
            const int key = color_key(img.at(x, y));
            std::vector<PixelPoint> comp;
            std::deque<PixelPoint> queue{{x, y}};
            label[idx(x, y)] = static_cast<int>(traces.size());
            while (!queue.empty()) {
                const PixelPoint p = queue.front();
                queue.pop_front();
                comp.push_back(p);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if ((dx == 0 && dy == 0) || !img.in_bounds(nx, ny)) continue;
                        if (label[idx(nx, ny)] != -1) continue;
                        if (!is_curve_pixel(img.at(nx, ny)) ||
                            color_key(img.at(nx, ny)) != key)
                            continue;
                        label[idx(nx, ny)] = static_cast<int>(traces.size());
                        queue.push_back({nx, ny});
                    }
            }
            if (comp.size() < 30) {
                for (const auto& p : comp) label[idx(p.x, p.y)] = -2; // too small, not a curve
                continue;
            }
            CurveTrace t;
            t.pixels = std::move(comp);
            t.centerline = column_centroids(t.pixels);
            t.color = img.at(x, y);
            traces.push_back(std::move(t));
        }
    if (traces.empty()) throw Error("no curve components found");
    return traces;
}

std::pair<std::vector<LabelMatch>, std::vector<std::size_t>> match_labels(
    const std::vector<CurveLabel>& labels, const std::vector<CurveTrace>& traces) {
    if (labels.empty() || traces.empty()) throw Error("label matching needs labels and traces");

    struct Cand {
        double dist;
        std::size_t label, trace;
    };
    std::vector<Cand> cands;
    cands.reserve(labels.size() * traces.size());
    for (std::size_t li = 0; li < labels.size(); ++li)
        for (std::size_t ti = 0; ti < traces.size(); ++ti) {
            double best = kInf;
            for (const auto& p : traces[ti].pixels)
                best = std::min(best, std::hypot(p.x - labels[li].px, p.y - labels[li].py));
            cands.push_back({best, li, ti});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.trace != b.trace) return a.trace < b.trace; // tie-break: smaller trace index
        return a.label < b.label;
    });

    std::vector<bool> label_used(labels.size(), false), trace_used(traces.size(), false);
    std::vector<LabelMatch> matches;
    for (const auto& c : cands) {
        if (label_used[c.label] || trace_used[c.trace]) continue;
        label_used[c.label] = true;
        trace_used[c.trace] = true;
        matches.push_back({c.label, c.trace, c.dist});
    }
    std::vector<std::size_t> unmatched;
    for (std::size_t li = 0; li < labels.size(); ++li)
        if (!label_used[li]) unmatched.push_back(li);
    std::sort(matches.begin(), matches.end(),
              [](const LabelMatch& a, const LabelMatch& b) { return a.label_index < b.label_index; });
    return {std::move(matches), std::move(unmatched)};
}

DigitizeResult digitize(const Image& img, const std::vector<CalibrationPoint>& calibration,
                        const std::vector<CurveLabel>& labels, Scale x_scale, Scale y_scale) {
    DigitizeResult result;

    detect_axes(img); // validation only; calibration supplies the mapping

    std::vector<CalibrationPoint> xs, ys;
    for (const auto& c : calibration) (c.axis == Axis::X ? xs : ys).push_back(c);
    result.chart.x_axis = fit_axis(xs, x_scale);
    result.chart.y_axis = fit_axis(ys, y_scale);

    const auto traces = trace_curves(img);
    if (labels.empty()) {
        result.warnings.push_back("no curve labels supplied; nothing digitized");
        return result;
    }
    auto [matches, unmatched] = match_labels(labels, traces);
    for (auto li : unmatched)
        result.warnings.push_back("label '" + labels[li].text + "' has no curve; dropped");
    if (matches.size() < traces.size())
        result.warnings.push_back(std::to_string(traces.size() - matches.size()) +
                                  " trace(s) without a label; dropped");

    // Stable output order: ascending label value.
    std::sort(matches.begin(), matches.end(), [&](const LabelMatch& a, const LabelMatch& b) {
        return labels[a.label_index].value < labels[b.label_index].value;
    });

    for (const auto& m : matches) {
        const auto& cl = traces[m.trace_index].centerline;
        if (cl.size() < 2) {
            result.warnings.push_back("trace for label '" + labels[m.label_index].text +
                                      "' is degenerate; dropped");
            continue;
        }
        // Physical polyline, plus the unbridged pixel gaps (> 5
        // columns) so resampling does not invent data across them.
        std::vector<std::pair<double, double>> phys;
        std::vector<std::pair<double, double>> gaps; // x spans to skip
        phys.reserve(cl.size());
        for (std::size_t i = 0; i < cl.size(); ++i) {
            const auto [col, cy] = cl[i];
            phys.push_back(map_pixel(result.chart.x_axis, result.chart.y_axis, col, cy));
            if (i > 0 && cl[i].first - cl[i - 1].first > 6)
                gaps.emplace_back(phys[i - 1].first, phys[i].first);
        }
        if (result.chart.x_axis.alpha < 0) {
            std::reverse(phys.begin(), phys.end());
            for (auto& g : gaps) std::swap(g.first, g.second);
        }

        DigitizedCurve curve;
        curve.vgs = labels[m.label_index].value;
        const double x0 = phys.front().first, x1 = phys.back().first;
        std::size_t seg = 0;
        for (int i = 0; i < 100; ++i) {
            const double x = x0 + (x1 - x0) * (static_cast<double>(i) / 99.0);
            const bool in_gap =
                std::any_of(gaps.begin(), gaps.end(), [&](const auto& g) {
                    return x > std::min(g.first, g.second) && x < std::max(g.first, g.second);
                });
            if (in_gap) continue;
            while (seg + 2 < phys.size() && phys[seg + 1].first < x) ++seg;
            const auto [xa, ya] = phys[seg];
            const auto [xb, yb] = phys[seg + 1];
            const double t = xb == xa ? 0.0 : (x - xa) / (xb - xa);
            const double y = ya + (yb - ya) * t;
            if (!curve.points.empty() && !(x > curve.points.back().first)) continue;
            curve.points.emplace_back(x, y);
        }
        result.chart.curves.push_back(std::move(curve));
    }

    for (const auto& c : result.chart.curves)
        for (const auto& [x, y] : c.points) result.dataset.rows.push_back({c.vgs, x, y});
    return result;
}

namespace {
nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad JSON in '") + path + "': " + e.what());
    }
}
} // namespace

std::vector<CalibrationPoint> load_calibration_json(const std::string& path) {
    const auto j = load_json_file(path);
    if (!j.is_array()) throw ParseError("calibration file must be a JSON array");
    std::vector<CalibrationPoint> out;
    for (const auto& e : j) {
        CalibrationPoint c;
        const std::string axis = e.at("axis").get<std::string>();
        if (axis == "x" || axis == "X")
            c.axis = Axis::X;
        else if (axis == "y" || axis == "Y")
            c.axis = Axis::Y;
        else
            throw ParseError("calibration axis must be \"x\" or \"y\"");
        c.pixel = e.at("pixel").get<double>();
        c.value = e.at("value").get<double>();
        out.push_back(c);
    }
    return out;
}

std::vector<CurveLabel> load_labels_json(const std::string& path) {
    const auto j = load_json_file(path);
    if (!j.is_array()) throw ParseError("labels file must be a JSON array");
    std::vector<CurveLabel> out;
    for (const auto& e : j) {
        CurveLabel l;
        l.text = e.value("text", "");
        l.value = e.at("value").get<double>();
        l.px = e.at("px").get<double>();
        l.py = e.at("py").get<double>();
        out.push_back(l);
    }
    return out;
}

} // namespace hemtfit::digitize
