#include "keypose/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

namespace keypose {

namespace {

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); }

} // namespace

FeatureGrid extract_features(const GrayImage& img, int cell_size) {
    if (cell_size <= 0) throw InvalidSpec("cell_size must be positive");
    if (img.width < cell_size || img.height < cell_size)
        throw ImageTooSmall("image smaller than one cell");

    FeatureGrid grid;
    grid.cells_x = img.width / cell_size;
    grid.cells_y = img.height / cell_size;
    grid.channels = kOrientationBins;
    grid.cell_size = cell_size;
    grid.values.assign(static_cast<std::size_t>(grid.cells_x) * grid.cells_y * grid.channels, 0.0);

    const double bin_width = 180.0 / kOrientationBins;
    for (int y = 0; y < grid.cells_y * cell_size; ++y) {
        for (int x = 0; x < grid.cells_x * cell_size; ++x) {
            const double gx = 0.5 * (img.at(clampi(x + 1, 0, img.width - 1), y) -
                                     img.at(clampi(x - 1, 0, img.width - 1), y));
            const double gy = 0.5 * (img.at(x, clampi(y + 1, 0, img.height - 1)) -
                                     img.at(x, clampi(y - 1, 0, img.height - 1)));
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            if (theta < 0.0) theta += 180.0;
            if (theta >= 180.0) theta -= 180.0;
            int bin = static_cast<int>(theta / bin_width);
            if (bin >= kOrientationBins) bin = kOrientationBins - 1;
            grid.at(x / cell_size, y / cell_size, bin) += mag;
        }
    }

    for (int cy = 0; cy < grid.cells_y; ++cy) {
        for (int cx = 0; cx < grid.cells_x; ++cx) {
            double sq = 0.0;
            for (int c = 0; c < grid.channels; ++c) sq += grid.at(cx, cy, c) * grid.at(cx, cy, c);
            const double inv = 1.0 / std::sqrt(sq + kCellNormEpsilon * kCellNormEpsilon);
            if (sq > 0.0)
                for (int c = 0; c < grid.channels; ++c) grid.at(cx, cy, c) *= inv;
        }
    }
    return grid;
}

GrayImage resample_bilinear(const GrayImage& img, double factor) {
    GrayImage out;
    out.width = std::max(1, static_cast<int>(std::lround(img.width * factor)));
    out.height = std::max(1, static_cast<int>(std::lround(img.height * factor)));
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
    const double sx = static_cast<double>(img.width) / out.width;
    const double sy = static_cast<double>(img.height) / out.height;
    for (int y = 0; y < out.height; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = clampi(static_cast<int>(std::floor(fy)), 0, img.height - 1);
        const int y1 = clampi(y0 + 1, 0, img.height - 1);
        const double wy = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < out.width; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = clampi(static_cast<int>(std::floor(fx)), 0, img.width - 1);
            const int x1 = clampi(x0 + 1, 0, img.width - 1);
            const double wx = std::clamp(fx - x0, 0.0, 1.0);
            out.at(x, y) = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                           wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
        }
    }
    return out;
}

FeaturePyramid build_pyramid(const GrayImage& img, int levels, double scale_step, int cell_size) {
    if (levels <= 0) throw InvalidSpec("levels must be positive");
    if (scale_step <= 1.0) throw InvalidSpec("scale_step must exceed 1");
    FeaturePyramid pyr;
    pyr.scale_step = scale_step;
    for (int l = 0; l < levels; ++l) {
        PyramidLevel level;
        level.scale = std::pow(scale_step, -l);
        const GrayImage scaled = (l == 0) ? img : resample_bilinear(img, level.scale);
        level.grid = extract_features(scaled, cell_size); // throws ImageTooSmall
        pyr.levels.push_back(std::move(level));
    }
    return pyr;
}

double score_at(const PoseletFilter& filter, const FeatureGrid& grid, int x, int y) {
    if (filter.channels != grid.channels) throw DimensionMismatch("channel count mismatch");
    if (x < 0 || y < 0 || x + filter.w > grid.cells_x || y + filter.h > grid.cells_y)
        throw OutOfBounds("filter placement outside grid");
    double s = filter.bias;
    for (int fy = 0; fy < filter.h; ++fy) {
        const double* grow = &grid.values[(static_cast<std::size_t>(y + fy) * grid.cells_x + x) * grid.channels];
        const double* frow = &filter.weights[static_cast<std::size_t>(fy) * filter.w * filter.channels];
        const int len = filter.w * filter.channels;
        for (int i = 0; i < len; ++i) s += frow[i] * grow[i];
    }
    return s;
}

TrainResult train_linear_filter(const std::vector<FeatureGrid>& positives,
                                const std::vector<FeatureGrid>& negatives,
                                int epochs, double lr, double reg, std::uint64_t seed) {
    if (positives.empty() || negatives.empty()) throw EmptyClass("both classes must be non-empty");
    const FeatureGrid& ref = positives.front();
    auto check = [&](const FeatureGrid& g) {
        if (g.cells_x != ref.cells_x || g.cells_y != ref.cells_y || g.channels != ref.channels)
            throw DimensionMismatch("training grids have different dimensions");
    };
    for (const auto& g : positives) check(g);
    for (const auto& g : negatives) check(g);

    const std::size_t dim = ref.values.size();
    std::vector<double> w(dim, 0.0);
    double bias = 0.0;

    struct Sample {
        const std::vector<double>* x;
        double y;
    };
    std::vector<Sample> samples;
    for (const auto& g : positives) samples.push_back({&g.values, 1.0});
    for (const auto& g : negatives) samples.push_back({&g.values, -1.0});

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const Sample& s = samples[idx];
            double margin = bias;
            for (std::size_t i = 0; i < dim; ++i) margin += w[i] * (*s.x)[i];
            margin *= s.y;
            const double shrink = 1.0 - lr * reg;
            for (std::size_t i = 0; i < dim; ++i) w[i] *= shrink;
            bias *= shrink;
            if (margin < 1.0) {
                for (std::size_t i = 0; i < dim; ++i) w[i] += lr * s.y * (*s.x)[i];
                bias += lr * s.y;
            }
        }
    }

    int correct = 0;
    for (const auto& s : samples) {
        double v = bias;
        for (std::size_t i = 0; i < dim; ++i) v += w[i] * (*s.x)[i];
        if (v * s.y > 0.0) ++correct;
    }

    TrainResult r;
    r.filter.w = ref.cells_x;
    r.filter.h = ref.cells_y;
    r.filter.channels = ref.channels;
    r.filter.bias = bias;
    r.filter.weights = std::move(w);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    return r;
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("not a binary PGM: " + path);
    auto next_token = [&]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated PGM header: " + path);
    };
    GrayImage img;
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval != 255) throw IoError("unsupported PGM maxval");
    in.get(); // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw IoError("truncated PGM data: " + path);
    img.pixels.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = static_cast<unsigned char>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

PoseletFilter load_filter_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    PoseletFilter f;
    f.w = j.at("w").get<int>();
    f.h = j.at("h").get<int>();
    f.channels = j.at("channels").get<int>();
    f.bias = j.at("bias").get<double>();
    f.weights = j.at("weights").get<std::vector<double>>();
    if (f.weights.size() != static_cast<std::size_t>(f.w) * f.h * f.channels)
        throw DimensionMismatch("filter weight count does not match dimensions");
    return f;
}

void save_filter_json(const PoseletFilter& filter, const std::string& path) {
    nlohmann::json j;
    j["w"] = filter.w;
    j["h"] = filter.h;
    j["channels"] = filter.channels;
    j["bias"] = filter.bias;
    j["weights"] = filter.weights;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump() << "\n";
}

} // namespace keypose
