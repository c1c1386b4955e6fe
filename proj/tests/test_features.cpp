#include <doctest.h>

#include <cmath>
#include <random>

#include "keypose/features.hpp"

using namespace keypose;

namespace {

GrayImage constant_image(int w, int h, double v) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, v);
    return img;
}

GrayImage random_image(int w, int h, std::mt19937_64& rng) {
    GrayImage img = constant_image(w, h, 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& p : img.pixels) p = u(rng);
    return img;
}

FeatureGrid random_grid(int cx, int cy, std::mt19937_64& rng) {
    FeatureGrid g;
    g.cells_x = cx;
    g.cells_y = cy;
    g.channels = kOrientationBins;
    g.cell_size = 8;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    g.values.resize(static_cast<std::size_t>(cx) * cy * g.channels);
    for (auto& v : g.values) v = u(rng);
    return g;
}

PoseletFilter random_filter(int w, int h, std::mt19937_64& rng) {
    PoseletFilter f;
    f.w = w;
    f.h = h;
    f.channels = kOrientationBins;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    f.weights.resize(static_cast<std::size_t>(w) * h * f.channels);
    for (auto& v : f.weights) v = u(rng);
    f.bias = u(rng);
    return f;
}

} // namespace

TEST_CASE("constant image yields all-zero histograms") {
    const auto grid = extract_features(constant_image(32, 32, 0.7), 8);
    for (double v : grid.values) CHECK(v == 0.0);
}

TEST_CASE("vertical step edge concentrates energy in the horizontal-gradient bin") {
    // Intensity changes along x only, so gx != 0, gy == 0, theta == 0: bin 0.
    GrayImage img = constant_image(32, 32, 0.0);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x) img.at(x, y) = 1.0;
    const auto grid = extract_features(img, 8);
    bool saw_edge_cell = false;
    for (int cy = 0; cy < grid.cells_y; ++cy)
        for (int cx = 0; cx < grid.cells_x; ++cx) {
            double total = 0.0;
            for (int c = 0; c < grid.channels; ++c) total += grid.at(cx, cy, c);
            if (total == 0.0) continue;
            saw_edge_cell = true;
            CHECK(grid.at(cx, cy, 0) == doctest::Approx(total));
        }
    CHECK(saw_edge_cell);
}

TEST_CASE("unsigned orientation is invariant to 180 degree rotation") {
    std::mt19937_64 rng(1);
    const int n = 24; // 3x3 cells at cell_size 8
    const GrayImage img = random_image(n, n, rng);
    GrayImage rot = constant_image(n, n, 0.0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) rot.at(x, y) = img.at(n - 1 - x, n - 1 - y);

    const auto a = extract_features(img, 8);
    const auto b = extract_features(rot, 8);
    for (int cy = 0; cy < a.cells_y; ++cy)
        for (int cx = 0; cx < a.cells_x; ++cx)
            for (int c = 0; c < a.channels; ++c)
                CHECK(a.at(cx, cy, c) ==
                      doctest::Approx(b.at(a.cells_x - 1 - cx, a.cells_y - 1 - cy, c))
                          .epsilon(1e-9));
}

TEST_CASE("feature extraction is translation-covariant at cell granularity") {
    std::mt19937_64 rng(2);
    const GrayImage img = random_image(48, 48, rng);
    GrayImage shifted = constant_image(48, 48, 0.0);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            shifted.at(x, y) = img.at((x + 8) % 48, y); // shift left by one cell

    const auto a = extract_features(img, 8);
    const auto b = extract_features(shifted, 8);
    // Interior cells only; border cells see the wrap seam.
    for (int cy = 1; cy + 1 < a.cells_y; ++cy)
        for (int cx = 2; cx + 1 < a.cells_x; ++cx)
            for (int c = 0; c < a.channels; ++c)
                CHECK(b.at(cx - 1, cy, c) == doctest::Approx(a.at(cx, cy, c)).epsilon(1e-9));
}

TEST_CASE("too-small images are rejected") {
    CHECK_THROWS_AS(extract_features(constant_image(4, 32, 0.5), 8), ImageTooSmall);
}

TEST_CASE("pyramid level count and sizes") {
    const GrayImage img = constant_image(64, 64, 0.5);
    const auto one = build_pyramid(img, 1, 2.0, 8);
    CHECK(one.levels.size() == 1);
    CHECK(one.levels[0].scale == 1.0);

    const auto pyr = build_pyramid(img, 3, 2.0, 8);
    REQUIRE(pyr.levels.size() == 3);
    CHECK(pyr.levels[0].grid.cells_x == 8);
    CHECK(pyr.levels[1].grid.cells_x == 4);
    CHECK(pyr.levels[2].grid.cells_x == 2);
    CHECK(pyr.levels[1].scale == doctest::Approx(0.5));
    CHECK(pyr.levels[2].scale == doctest::Approx(0.25));
}

TEST_CASE("scoring level l equals scoring the resampled image at level 0") {
    std::mt19937_64 rng(3);
    const GrayImage img = random_image(64, 64, rng);
    const auto pyr = build_pyramid(img, 2, 2.0, 8);
    const auto resampled_pyr = build_pyramid(resample_bilinear(img, 0.5), 1, 2.0, 8);

    const auto filter = random_filter(2, 2, rng);
    for (int y = 0; y + 2 <= pyr.levels[1].grid.cells_y; ++y)
        for (int x = 0; x + 2 <= pyr.levels[1].grid.cells_x; ++x)
            CHECK(score_at(filter, pyr.levels[1].grid, x, y) ==
                  doctest::Approx(score_at(filter, resampled_pyr.levels[0].grid, x, y)));
}

TEST_CASE("zero filter scores its bias everywhere") {
    std::mt19937_64 rng(4);
    const auto grid = random_grid(6, 6, rng);
    PoseletFilter zero;
    zero.w = 3;
    zero.h = 2;
    zero.channels = kOrientationBins;
    zero.bias = 0.25;
    zero.weights.assign(static_cast<std::size_t>(3) * 2 * kOrientationBins, 0.0);
    for (int y = 0; y + 2 <= 6; ++y)
        for (int x = 0; x + 3 <= 6; ++x) CHECK(score_at(zero, grid, x, y) == doctest::Approx(0.25));
}

TEST_CASE("self-correlation equals the squared Frobenius norm") {
    std::mt19937_64 rng(5);
    const auto grid = random_grid(8, 8, rng);
    PoseletFilter f;
    f.w = 4;
    f.h = 4;
    f.channels = grid.channels;
    f.bias = 0.0;
    f.weights.resize(static_cast<std::size_t>(4) * 4 * grid.channels);
    double norm2 = 0.0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < grid.channels; ++c) {
                const double v = grid.at(2 + x, 3 + y, c);
                f.at(x, y, c) = v;
                norm2 += v * v;
            }
    CHECK(score_at(f, grid, 2, 3) == doctest::Approx(norm2));
}

TEST_CASE("score matches the naive triple-loop oracle") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const auto grid = random_grid(10, 9, rng);
        const auto f = random_filter(4, 4, rng);
        std::uniform_int_distribution<int> xd(0, 10 - 4), yd(0, 9 - 4);
        const int px = xd(rng), py = yd(rng);
        double expected = f.bias;
        for (int y = 0; y < f.h; ++y)
            for (int x = 0; x < f.w; ++x)
                for (int c = 0; c < f.channels; ++c)
                    expected += f.at(x, y, c) * grid.at(px + x, py + y, c);
        CHECK(score_at(f, grid, px, py) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("score is linear in the filter") {
    std::mt19937_64 rng(7);
    const auto grid = random_grid(6, 6, rng);
    auto f1 = random_filter(3, 3, rng);
    auto f2 = random_filter(3, 3, rng);
    f1.bias = 0.0;
    f2.bias = 0.0;
    const double alpha = 1.7, beta = -0.4;
    PoseletFilter mix = f1;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        mix.weights[i] = alpha * f1.weights[i] + beta * f2.weights[i];
    CHECK(score_at(mix, grid, 1, 2) ==
          doctest::Approx(alpha * score_at(f1, grid, 1, 2) + beta * score_at(f2, grid, 1, 2)));
}

TEST_CASE("out-of-bounds placement throws") {
    std::mt19937_64 rng(8);
    const auto grid = random_grid(4, 4, rng);
    const auto f = random_filter(3, 3, rng);
    CHECK_THROWS_AS(score_at(f, grid, 2, 2), OutOfBounds);
}

namespace {

FeatureGrid grid_from_values(const std::vector<double>& base, double delta,
                             const std::vector<double>& dir) {
    FeatureGrid g;
    g.cells_x = 2;
    g.cells_y = 2;
    g.channels = kOrientationBins;
    g.cell_size = 8;
    g.values.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) g.values[i] = base[i] + delta * dir[i];
    return g;
}

} // namespace

TEST_CASE("trainer separates linearly separable grids") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<double> base(static_cast<std::size_t>(2 * 2 * kOrientationBins));
    std::vector<double> dir(base.size());
    for (auto& v : base) v = u(rng);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& v : dir) v = n(rng);

    std::vector<FeatureGrid> pos, neg;
    for (int i = 0; i < 10; ++i) {
        pos.push_back(grid_from_values(base, 1.0 + 0.05 * i, dir));
        neg.push_back(grid_from_values(base, -1.0 - 0.05 * i, dir));
    }
    const auto r = train_linear_filter(pos, neg, 100, 0.05, 1e-3, 0);
    CHECK(r.accuracy == doctest::Approx(1.0));
}

TEST_CASE("identical classes give chance accuracy and tiny weights") {
    std::mt19937_64 rng(10);
    const auto g = random_grid(2, 2, rng);
    const std::vector<FeatureGrid> pos(6, g), neg(6, g);
    const auto r = train_linear_filter(pos, neg, 60, 0.05, 1e-2, 0);
    CHECK(r.accuracy <= 0.5 + 1e-12);
    double norm = 0.0;
    for (double w : r.filter.weights) norm += w * w;
    CHECK(std::sqrt(norm) < 0.5);
}

TEST_CASE("one orthogonal pair: filter sign-aligns with the positive direction") {
    // One SGD pass at lr=0.1, reg=0: both samples violate the margin, so
    // w = 0.1*(x_pos - x_neg); with orthogonal inputs the dot with x_pos is
    // positive and with x_neg negative.
    FeatureGrid p;
    p.cells_x = 1;
    p.cells_y = 1;
    p.channels = kOrientationBins;
    p.cell_size = 8;
    p.values.assign(kOrientationBins, 0.0);
    p.values[0] = 1.0;
    FeatureGrid n = p;
    n.values[0] = 0.0;
    n.values[1] = 1.0;
    const auto r = train_linear_filter({p}, {n}, 1, 0.1, 0.0, 0);
    double dot_pos = 0.0, dot_neg = 0.0;
    for (int c = 0; c < kOrientationBins; ++c) {
        dot_pos += r.filter.weights[static_cast<std::size_t>(c)] * p.values[static_cast<std::size_t>(c)];
        dot_neg += r.filter.weights[static_cast<std::size_t>(c)] * n.values[static_cast<std::size_t>(c)];
    }
    CHECK(dot_pos > 0.0);
    CHECK(dot_neg < 0.0);
    CHECK(dot_pos == doctest::Approx(0.1));
    CHECK(dot_neg == doctest::Approx(-0.1));
}

TEST_CASE("trainer validates inputs") {
    std::mt19937_64 rng(11);
    const auto g = random_grid(2, 2, rng);
    CHECK_THROWS_AS(train_linear_filter({}, {g}, 10, 0.1, 0.0, 0), EmptyClass);
    CHECK_THROWS_AS(train_linear_filter({g}, {random_grid(3, 2, rng)}, 10, 0.1, 0.0, 0),
                    DimensionMismatch);
}
