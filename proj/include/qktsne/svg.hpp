#ifndef QKTSNE_SVG_HPP
#define QKTSNE_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qktsne {

struct PlotSpec {
    int width = 800;
    int height = 600;
    double point_radius = 3.0;
    double margin_fraction = 0.05; // padding around the tight bounding box
    // 10-class categorical palette (matplotlib "tab10").
    std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    void validate(std::size_t n_classes) const {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("plot dimensions must be positive");
        if (palette.size() < n_classes)
            throw std::invalid_argument("palette smaller than the number of classes");
    }
};

struct PolylineSeries {
    std::string label;
    Eigen::MatrixXd points; // M x 2, in plotting order
};

struct ReferencePoint {
    std::string label;
    double x;
    double y;
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// Affine map from data space to canvas pixels, y axis flipped.
class Viewport {
public:
    Viewport(double xmin, double xmax, double ymin, double ymax, const PlotSpec& spec) {
        const double dx = xmax - xmin, dy = ymax - ymin;
        const double pad_x = dx > 0.0 ? dx * spec.margin_fraction : 1.0;
        const double pad_y = dy > 0.0 ? dy * spec.margin_fraction : 1.0;
        xmin_ = xmin - pad_x;
        ymin_ = ymin - pad_y;
        sx_ = spec.width / (dx + 2.0 * pad_x);
        sy_ = spec.height / (dy + 2.0 * pad_y);
        height_ = spec.height;
    }

    double px(double x) const { return (x - xmin_) * sx_; }
    double py(double y) const { return height_ - (y - ymin_) * sy_; }

private:
    double xmin_, ymin_, sx_, sy_, height_;
};

inline std::string svg_open(const PlotSpec& spec) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
        << spec.height << "\">\n"
        << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" fill=\"white\"/>\n";
    return out.str();
}

inline void legend_entry(std::ostringstream& out, int slot, const std::string& color,
                         const std::string& text) {
    const int x = 12, y = 16 + slot * 18;
    out << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/>"
        << "<text x=\"" << x + 14 << "\" y=\"" << y
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << text << "</text>\n";
}

inline std::string star_path(double cx, double cy, double r) {
    std::ostringstream out;
    out << "<path d=\"M";
    for (int k = 0; k < 10; ++k) {
        const double radius = (k % 2 == 0) ? r : 0.45 * r;
        const double angle = -M_PI / 2.0 + k * M_PI / 5.0;
        out << (k ? " L" : "") << fmt_coord(cx + radius * std::cos(angle)) << ' '
            << fmt_coord(cy + radius * std::sin(angle));
    }
    out << " Z\"";
    return out.str();
}

} // namespace detail

// One circle per point, colored by class label; identical inputs produce
// byte-identical output.
inline std::string scatter_svg(const Eigen::MatrixXd& y, const std::vector<int>& labels,
                               const PlotSpec& spec = {}) {
    if (y.rows() == 0) throw std::invalid_argument("empty scatter input");
    if (y.cols() != 2) throw std::invalid_argument("scatter input must be N x 2");
    if (!y.allFinite()) throw std::invalid_argument("non-finite scatter coordinates");
    const bool labeled = !labels.empty();
    if (labeled && static_cast<Eigen::Index>(labels.size()) != y.rows())
        throw std::invalid_argument("label count mismatch");

    std::map<int, int> class_slot; // label -> palette slot, ordered by label id
    if (labeled)
        for (int l : labels) class_slot.emplace(l, 0);
    int slot = 0;
    for (auto& [label, s] : class_slot) s = slot++;
    spec.validate(class_slot.empty() ? 1 : class_slot.size());

    detail::Viewport view(y.col(0).minCoeff(), y.col(0).maxCoeff(), y.col(1).minCoeff(),
                          y.col(1).maxCoeff(), spec);
    std::ostringstream out;
    out << detail::svg_open(spec);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const std::string& color =
            labeled ? spec.palette[class_slot[labels[static_cast<std::size_t>(i)]]]
                    : spec.palette[0];
        out << "<circle cx=\"" << detail::fmt_coord(view.px(y(i, 0))) << "\" cy=\""
            << detail::fmt_coord(view.py(y(i, 1))) << "\" r=\""
            << detail::fmt_coord(spec.point_radius) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"/>\n";
    }
    for (const auto& [label, s] : class_slot)
        detail::legend_entry(out, s, spec.palette[s], std::to_string(label));
    out << "</svg>\n";
    return out.str();
}

// Ordered polylines with a marker on the starting point of each trajectory
// and star markers for reference states.
inline std::string trajectory_svg(const std::vector<PolylineSeries>& trajectories,
                                  const std::vector<ReferencePoint>& reference_points,
                                  const PlotSpec& spec = {}) {
    if (trajectories.empty()) throw std::invalid_argument("no trajectories to plot");
    for (const auto& t : trajectories) {
        if (t.points.rows() < 2)
            throw std::invalid_argument("trajectory '" + t.label + "' has fewer than 2 points");
        if (t.points.cols() != 2 || !t.points.allFinite())
            throw std::invalid_argument("bad trajectory coordinates in '" + t.label + "'");
    }
    spec.validate(trajectories.size());

    double xmin = reference_points.empty() ? trajectories[0].points(0, 0) : reference_points[0].x;
    double xmax = xmin, ymin = reference_points.empty() ? trajectories[0].points(0, 1)
                                                        : reference_points[0].y;
    double ymax = ymin;
    for (const auto& t : trajectories) {
        xmin = std::min(xmin, t.points.col(0).minCoeff());
        xmax = std::max(xmax, t.points.col(0).maxCoeff());
        ymin = std::min(ymin, t.points.col(1).minCoeff());
        ymax = std::max(ymax, t.points.col(1).maxCoeff());
    }
    for (const auto& r : reference_points) {
        xmin = std::min(xmin, r.x);
        xmax = std::max(xmax, r.x);
        ymin = std::min(ymin, r.y);
        ymax = std::max(ymax, r.y);
    }

    detail::Viewport view(xmin, xmax, ymin, ymax, spec);
    std::ostringstream out;
    out << detail::svg_open(spec);
    int slot = 0;
    for (const auto& t : trajectories) {
        const std::string& color = spec.palette[slot];
        out << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" d=\"";
        for (Eigen::Index i = 0; i < t.points.rows(); ++i)
            out << (i ? " L" : "M") << detail::fmt_coord(view.px(t.points(i, 0))) << ' '
                << detail::fmt_coord(view.py(t.points(i, 1)));
        out << "\"/>\n";
        // Start-of-trajectory marker.
        out << "<circle cx=\"" << detail::fmt_coord(view.px(t.points(0, 0))) << "\" cy=\""
            << detail::fmt_coord(view.py(t.points(0, 1))) << "\" r=\""
            << detail::fmt_coord(spec.point_radius + 1.5) << "\" fill=\"" << color << "\"/>\n";
        detail::legend_entry(out, slot, color, t.label);
        ++slot;
    }
    for (const auto& r : reference_points) {
        out << detail::star_path(view.px(r.x), view.py(r.y), 4.0 * spec.point_radius)
            << " fill=\"gold\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
        out << "<text x=\"" << detail::fmt_coord(view.px(r.x) + 10.0) << "\" y=\""
            << detail::fmt_coord(view.py(r.y) + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << r.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace qktsne

#endif
