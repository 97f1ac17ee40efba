#include "latefusion/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace latefusion {

ImageDims::ImageDims(int width, int height) : width(width), height(height)
{
    if (width <= 0 || height <= 0)
        throw std::invalid_argument(fmt::format("image dims must be positive, got {}x{}", width, height));
}

Box2D::Box2D(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max)
{
    if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) || !std::isfinite(y_max))
        throw std::invalid_argument("box coordinates must be finite");
    if (x_min > x_max || y_min > y_max)
        throw std::invalid_argument(fmt::format("box has negative extent: ({}, {}, {}, {})", x_min, y_min, x_max, y_max));
}

NormalizedBox::NormalizedBox(double cx, double cy, double w, double h) : cx(cx), cy(cy), w(w), h(h)
{
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h))
        throw std::invalid_argument("normalized box values must be finite");
    if (w < 0.0 || h < 0.0)
        throw std::invalid_argument("normalized box has negative size");
}

bool NormalizedBox::within_image() const noexcept
{
    return cx - w / 2 >= 0.0 && cy - h / 2 >= 0.0 && cx + w / 2 <= 1.0 && cy + h / 2 <= 1.0;
}

double area(const Box2D &b) noexcept
{
    return b.width() * b.height();
}

double intersection_area(const Box2D &a, const Box2D &b) noexcept
{
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    if (w <= 0.0 || h <= 0.0)
        return 0.0;
    return w * h;
}

double iou(const Box2D &a, const Box2D &b) noexcept
{
    const double inter = intersection_area(a, b);
    if (inter <= 0.0)
        return 0.0;
    const double uni = area(a) + area(b) - inter;
    if (uni <= 0.0)
        return 0.0;
    return std::min(1.0, inter / uni);
}

NormalizedBox normalize(const Box2D &b, const ImageDims &dims) noexcept
{
    const double w = dims.width;
    const double h = dims.height;
    NormalizedBox n;
    n.cx = (b.x_min() + b.x_max()) / (2.0 * w);
    n.cy = (b.y_min() + b.y_max()) / (2.0 * h);
    n.w = b.width() / w;
    n.h = b.height() / h;
    return n;
}

Box2D denormalize(const NormalizedBox &n, const ImageDims &dims)
{
    const double w = dims.width;
    const double h = dims.height;
    const double half_w = n.w * w / 2.0;
    const double half_h = n.h * h / 2.0;
    const double cx = n.cx * w;
    const double cy = n.cy * h;
    return Box2D(cx - half_w, cy - half_h, cx + half_w, cy + half_h);
}

std::string to_string(const Box2D &b)
{
    return fmt::format("({}, {}, {}, {})", b.x_min(), b.y_min(), b.x_max(), b.y_max());
}

} // namespace latefusion
