#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "keypose/errors.hpp"

namespace keypose {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // row-major, intensities in [0,1]

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Dense grid of per-cell gradient-orientation histograms.
struct FeatureGrid {
    int cells_x = 0;
    int cells_y = 0;
    int channels = 0;
    int cell_size = 0;
    std::vector<double> values; // [cy][cx][channel]

    double at(int cx, int cy, int c) const {
        return values[(static_cast<std::size_t>(cy) * cells_x + cx) * channels + c];
    }
    double& at(int cx, int cy, int c) {
        return values[(static_cast<std::size_t>(cy) * cells_x + cx) * channels + c];
    }
};

struct PyramidLevel {
    double scale = 1.0; // image was resampled by this factor
    FeatureGrid grid;
};

struct FeaturePyramid {
    std::vector<PyramidLevel> levels;
    double scale_step = 1.0;
};

/// Linear part filter over feature grids.
struct PoseletFilter {
    int w = 0; // cells
    int h = 0; // cells
    int channels = 0;
    double bias = 0.0;
    std::vector<double> weights; // [y][x][channel], same layout as FeatureGrid

    double at(int x, int y, int c) const {
        return weights[(static_cast<std::size_t>(y) * w + x) * channels + c];
    }
    double& at(int x, int y, int c) {
        return weights[(static_cast<std::size_t>(y) * w + x) * channels + c];
    }
};

inline constexpr int kOrientationBins = 9;
inline constexpr double kCellNormEpsilon = 1e-5;

/// Per-cell L2-normalized histograms of unsigned gradient orientation
/// (9 bins over [0, 180)). Gradients use central differences with
/// replicated borders.
FeatureGrid extract_features(const GrayImage& img, int cell_size);

GrayImage resample_bilinear(const GrayImage& img, double factor);

/// Level l holds features of the image resampled by scale_step^-l.
FeaturePyramid build_pyramid(const GrayImage& img, int levels, double scale_step, int cell_size);

/// Cross-correlation of the filter with the subwindow anchored at cell (x, y),
/// plus bias. Throws OutOfBounds when the subwindow does not fit.
double score_at(const PoseletFilter& filter, const FeatureGrid& grid, int x, int y);

struct TrainResult {
    PoseletFilter filter;
    double accuracy = 0.0; // training accuracy after the last epoch
};

/// Stochastic subgradient descent on L2-regularized hinge loss. The bias is
/// trained as an implicit constant-one channel and stored explicitly.
TrainResult train_linear_filter(const std::vector<FeatureGrid>& positives,
                                const std::vector<FeatureGrid>& negatives,
                                int epochs = 50, double lr = 0.05, double reg = 1e-3,
                                std::uint64_t seed = 0);

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

PoseletFilter load_filter_json(const std::string& path);
void save_filter_json(const PoseletFilter& filter, const std::string& path);

} // namespace keypose
