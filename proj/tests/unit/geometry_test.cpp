#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "latefusion/geometry.hpp"
#include "latefusion/random.hpp"
#include "oracles/iou_oracles.hpp"

using namespace latefusion;

TEST(Geometry, AreaAndIntersection)
{
    const Box2D a(0, 0, 10, 10), b(5, 0, 15, 10);
    EXPECT_DOUBLE_EQ(area(a), 100.0);
    EXPECT_DOUBLE_EQ(intersection_area(a, b), 50.0);
    EXPECT_DOUBLE_EQ(area(Box2D(3, 3, 3, 9)), 0.0);
}

TEST(Geometry, HalfShiftedSquaresGiveOneThird)
{
    // 50 / (100 + 100 - 50)
    EXPECT_NEAR(iou(Box2D(0, 0, 10, 10), Box2D(5, 0, 15, 10)), 1.0 / 3.0, 1e-12);
}

TEST(Geometry, IdenticalBoxesGiveOne)
{
    const Box2D a(12.5, 7.25, 90.0, 41.0);
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
}

TEST(Geometry, DisjointAndTouchingBoxesGiveZero)
{
    EXPECT_EQ(iou(Box2D(0, 0, 10, 10), Box2D(20, 20, 30, 30)), 0.0);
    EXPECT_EQ(iou(Box2D(0, 0, 10, 10), Box2D(10, 0, 20, 10)), 0.0);
    EXPECT_EQ(iou(Box2D(0, 0, 0, 0), Box2D(0, 0, 0, 0)), 0.0);
}

TEST(Geometry, NestedBoxIsAreaRatio)
{
    EXPECT_NEAR(iou(Box2D(0, 0, 10, 10), Box2D(2, 2, 7, 7)), 25.0 / 100.0, 1e-12);
}

TEST(Geometry, InvalidBoxesAreRejected)
{
    EXPECT_THROW(Box2D(10, 0, 5, 10), std::invalid_argument);
    EXPECT_THROW(Box2D(0, 10, 5, 5), std::invalid_argument);
    EXPECT_THROW(Box2D(0, 0, NAN, 5), std::invalid_argument);
    EXPECT_THROW(Box2D(0, 0, INFINITY, 5), std::invalid_argument);
    EXPECT_THROW(ImageDims(0, 375), std::invalid_argument);
}

TEST(Geometry, NormalizeFullImage)
{
    const NormalizedBox n = normalize(Box2D(0, 0, 1242, 375), ImageDims{});
    EXPECT_DOUBLE_EQ(n.cx, 0.5);
    EXPECT_DOUBLE_EQ(n.cy, 0.5);
    EXPECT_DOUBLE_EQ(n.w, 1.0);
    EXPECT_DOUBLE_EQ(n.h, 1.0);
    EXPECT_TRUE(n.within_image());
}

TEST(Geometry, NormalizeKnownBox)
{
    const NormalizedBox n = normalize(Box2D(100, 50, 300, 150), ImageDims(1000, 500));
    EXPECT_DOUBLE_EQ(n.cx, 0.2);
    EXPECT_DOUBLE_EQ(n.cy, 0.2);
    EXPECT_DOUBLE_EQ(n.w, 0.2);
    EXPECT_DOUBLE_EQ(n.h, 0.2);
}

TEST(Geometry, BoxOutsideImageIsFlagged)
{
    EXPECT_FALSE(normalize(Box2D(1200, 10, 1300, 40), ImageDims{}).within_image());
}

TEST(GeometryProperty, IouIsSymmetricAndBounded)
{
    Rng rng(101);
    for (int i = 0; i < 2000; ++i) {
        auto box = [&] {
            const double x = rng.uniform(-50, 500), y = rng.uniform(-50, 300);
            return Box2D(x, y, x + rng.uniform(0, 200), y + rng.uniform(0, 150));
        };
        const Box2D a = box(), b = box();
        const double ab = iou(a, b);
        EXPECT_EQ(ab, iou(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        if (area(a) > 0)
            EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    }
}

TEST(GeometryProperty, NormalizeRoundTrips)
{
    Rng rng(5);
    const ImageDims dims(1242, 375);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(0, 1000), y = rng.uniform(0, 300);
        const Box2D b(x, y, x + rng.uniform(0, 240), y + rng.uniform(0, 75));
        const Box2D r = denormalize(normalize(b, dims), dims);
        EXPECT_NEAR(r.x_min(), b.x_min(), 1e-9);
        EXPECT_NEAR(r.y_min(), b.y_min(), 1e-9);
        EXPECT_NEAR(r.x_max(), b.x_max(), 1e-9);
        EXPECT_NEAR(r.y_max(), b.y_max(), 1e-9);
    }
}

TEST(GeometryProperty, MatchesIntegerAndRasterOracles)
{
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        auto box = [&] {
            const auto x = rng.between(0, 80), y = rng.between(0, 80);
            return oracle::IntBox{x, y, x + rng.between(1, 40), y + rng.between(1, 40)};
        };
        const auto a = box(), b = box();
        const double got = iou(Box2D(double(a.x0), double(a.y0), double(a.x1), double(a.y1)),
                               Box2D(double(b.x0), double(b.y0), double(b.x1), double(b.y1)));
        EXPECT_NEAR(got, oracle::integer_iou(a, b), 1e-9);
        EXPECT_NEAR(got,
                    oracle::raster_iou(double(a.x0), double(a.y0), double(a.x1), double(a.y1), double(b.x0),
                                       double(b.y0), double(b.x1), double(b.y1)),
                    0.02);
    }
}

TEST(GeometryProperty, RasterOracleTracksFractionalBoxes)
{
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        const double ax = rng.uniform(0, 50), ay = rng.uniform(0, 50);
        const double bx = ax + rng.uniform(-20, 20), by = ay + rng.uniform(-20, 20);
        const Box2D a(ax, ay, ax + rng.uniform(5, 40), ay + rng.uniform(5, 40));
        const Box2D b(bx, by, bx + rng.uniform(5, 40), by + rng.uniform(5, 40));
        const double raster = oracle::raster_iou(a.x_min(), a.y_min(), a.x_max(), a.y_max(), b.x_min(), b.y_min(),
                                                 b.x_max(), b.y_max(), 0.05);
        EXPECT_NEAR(iou(a, b), raster, 0.02);
    }
}
