#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace oracle {

struct IntBox
{
    std::int64_t x0, y0, x1, y1;
};

/// Exact rational IoU of integer boxes, evaluated once in double at the end.
inline double integer_iou(const IntBox &a, const IntBox &b)
{
    const std::int64_t iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const std::int64_t ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    const std::int64_t inter = (iw > 0 && ih > 0) ? iw * ih : 0;
    const std::int64_t uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
    return uni > 0 ? double(inter) / double(uni) : 0.0;
}

/// Counts sample points on a regular grid inside each box. Works for
/// arbitrary real coordinates; error shrinks with the pitch.
inline double raster_iou(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1,
                         double by1, double pitch = 0.25)
{
    const double lo_x = std::min(ax0, bx0), hi_x = std::max(ax1, bx1);
    const double lo_y = std::min(ay0, by0), hi_y = std::max(ay1, by1);
    const auto nx = static_cast<std::int64_t>(std::ceil((hi_x - lo_x) / pitch));
    const auto ny = static_cast<std::int64_t>(std::ceil((hi_y - lo_y) / pitch));
    std::int64_t in_a = 0, in_b = 0, in_both = 0;
    for (std::int64_t j = 0; j < ny; ++j) {
        const double y = lo_y + (double(j) + 0.5) * pitch;
        const bool ya = y > ay0 && y < ay1;
        const bool yb = y > by0 && y < by1;
        if (!ya && !yb)
            continue;
        for (std::int64_t i = 0; i < nx; ++i) {
            const double x = lo_x + (double(i) + 0.5) * pitch;
            const bool pa = ya && x > ax0 && x < ax1;
            const bool pb = yb && x > bx0 && x < bx1;
            in_a += pa;
            in_b += pb;
            in_both += pa && pb;
        }
    }
    const std::int64_t uni = in_a + in_b - in_both;
    return uni > 0 ? double(in_both) / double(uni) : 0.0;
}

} // namespace oracle
