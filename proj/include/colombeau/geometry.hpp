#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace colombeau {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double t) const { return t >= lo && t <= hi; }
    double length() const { return hi - lo; }
};

/// Closed axis-aligned box with finite endpoints.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(std::span<const double> x, double slack = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }

    double max_abs_corner() const {
        double r = 0.0;
        for (int i = 0; i < dim(); ++i) r = std::max(r, std::max(std::fabs(lo[i]), std::fabs(hi[i])));
        return r;
    }

    static Box cube(int dim, double half) {
        Box b;
        b.lo.assign(dim, -half);
        b.hi.assign(dim, half);
        return b;
    }
};

/// Open box, endpoints may be infinite. This is the only domain shape in play.
struct Domain {
    std::vector<double> lo, hi; // open endpoints

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(std::span<const double> x) const {
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
        return true;
    }

    /// Closed box strictly inside the open box (with a margin on finite sides).
    bool contains_box(const Box& b, double margin = 0.0) const {
        for (int i = 0; i < dim(); ++i) {
            if (std::isfinite(lo[i]) && b.lo[i] <= lo[i] + margin) return false;
            if (std::isfinite(hi[i]) && b.hi[i] >= hi[i] - margin) return false;
        }
        return true;
    }

    static Domain all(int dim) {
        Domain d;
        d.lo.assign(dim, -std::numeric_limits<double>::infinity());
        d.hi.assign(dim, std::numeric_limits<double>::infinity());
        return d;
    }

    static Domain box(std::vector<double> lo, std::vector<double> hi) {
        return Domain{std::move(lo), std::move(hi)};
    }
};

/// Auxiliary sample cloud scaled by eps around a center point. Nets that
/// concentrate on shrinking supports (mollifier types) are invisible to a
/// fixed lattice; the patch samples center + eps*grid.
struct EpsPatch {
    std::vector<double> center;
    std::vector<double> half_width; // in units of eps
    int resolution = 17;
};

/// Compact sampling box: closed box + per-axis lattice resolution + optional
/// eps-scaled patch. Stands in for the paper-style compact exhaustion sets.
struct CompactBox {
    Box box;
    std::vector<int> resolution; // per axis; empty means default 33 everywhere
    std::optional<EpsPatch> patch;
    std::string name;

    int dim() const { return box.dim(); }

    int res(int axis) const {
        if (axis < static_cast<int>(resolution.size()) && resolution[axis] >= 1)
            return resolution[axis];
        return 33;
    }

    double min_spacing() const {
        double s = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i) {
            int r = res(i);
            if (r >= 2) s = std::min(s, (box.hi[i] - box.lo[i]) / (r - 1));
        }
        return std::isfinite(s) ? s : 1.0;
    }

    CompactBox with_doubled_resolution() const {
        CompactBox c = *this;
        c.resolution.resize(dim());
        for (int i = 0; i < dim(); ++i) c.resolution[i] = 2 * res(i) - 1;
        if (c.patch) c.patch->resolution = 2 * c.patch->resolution - 1;
        return c;
    }

    /// Visit the fixed lattice plus, when a patch is declared, the eps-scaled
    /// cloud (clipped to the box).
    void for_each_sample(double eps, const std::function<void(std::span<const double>)>& fn) const {
        const int d = dim();
        std::vector<double> x(d);
        std::vector<int> idx(d, 0);
        // lattice
        for (;;) {
            for (int i = 0; i < d; ++i) {
                int r = res(i);
                x[i] = r == 1 ? 0.5 * (box.lo[i] + box.hi[i])
                              : box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (r - 1);
            }
            fn(x);
            int axis = 0;
            while (axis < d) {
                if (++idx[axis] < res(axis)) break;
                idx[axis] = 0;
                ++axis;
            }
            if (axis == d) break;
        }
        if (!patch) return;
        const EpsPatch& p = *patch;
        idx.assign(d, 0);
        for (;;) {
            bool inside = true;
            for (int i = 0; i < d; ++i) {
                int r = p.resolution;
                double t = r == 1 ? 0.0 : -1.0 + 2.0 * idx[i] / (r - 1);
                x[i] = p.center[i] + eps * p.half_width[i] * t;
                if (x[i] < box.lo[i] || x[i] > box.hi[i]) inside = false;
            }
            if (inside) fn(x);
            int axis = 0;
            while (axis < d) {
                if (++idx[axis] < p.resolution) break;
                idx[axis] = 0;
                ++axis;
            }
            if (axis == d) break;
        }
    }
};

} // namespace colombeau
