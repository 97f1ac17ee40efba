#pragma once

#include <string>

namespace latefusion {

/// Image size in pixels. Both sides strictly positive.
struct ImageDims
{
    int width = 1242;
    int height = 375;

    ImageDims() = default;
    ImageDims(int width, int height);

    friend bool operator==(const ImageDims &, const ImageDims &) = default;
};

/// Axis-aligned box in pixel corner form, origin at the top-left of the image.
///
/// Zero-area boxes are legal. Negative extents and non-finite coordinates are
/// rejected at construction, so every live Box2D is valid.
class Box2D
{
public:
    Box2D() = default;
    Box2D(double x_min, double y_min, double x_max, double y_max);

    double x_min() const noexcept { return x_min_; }
    double y_min() const noexcept { return y_min_; }
    double x_max() const noexcept { return x_max_; }
    double y_max() const noexcept { return y_max_; }

    double width() const noexcept { return x_max_ - x_min_; }
    double height() const noexcept { return y_max_ - y_min_; }

    friend bool operator==(const Box2D &, const Box2D &) = default;

private:
    double x_min_ = 0.0;
    double y_min_ = 0.0;
    double x_max_ = 0.0;
    double y_max_ = 0.0;
};

/// Center-form box in fractions of the image size.
struct NormalizedBox
{
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    NormalizedBox() = default;
    NormalizedBox(double cx, double cy, double w, double h);

    /// True when the box lies within the unit square (the source box was
    /// inside the image).
    bool within_image() const noexcept;

    friend bool operator==(const NormalizedBox &, const NormalizedBox &) = default;
};

double area(const Box2D &b) noexcept;
double intersection_area(const Box2D &a, const Box2D &b) noexcept;

/// Intersection over union in [0, 1]. Returns 0 when the union is empty.
double iou(const Box2D &a, const Box2D &b) noexcept;

NormalizedBox normalize(const Box2D &b, const ImageDims &dims) noexcept;
Box2D denormalize(const NormalizedBox &n, const ImageDims &dims);

std::string to_string(const Box2D &b);

} // namespace latefusion
