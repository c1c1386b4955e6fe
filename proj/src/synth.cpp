#include "keypose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace keypose {

void validate(const SyntheticMotionSpec& spec) {
    if (spec.period < 8.0) throw InvalidSpec("period must be at least 8 frames");
    if (spec.n_poselets <= 0) throw InvalidSpec("need at least one poselet");
    if (spec.duration <= 0) throw InvalidSpec("duration must be positive");
    if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 0.5)
        throw InvalidSpec("dropout_rate must be in [0, 0.5)");
    if (spec.spurious_rate < 0.0 || spec.spurious_rate >= 0.5)
        throw InvalidSpec("spurious_rate must be in [0, 0.5)");
    if (spec.noise_sigma < 0.0) throw InvalidSpec("noise_sigma must be non-negative");
    if (spec.jitter_frames < 0.0) throw InvalidSpec("jitter_frames must be non-negative");
    for (double p : spec.phase_offsets)
        if (p < 0.0 || p >= 1.0) throw InvalidSpec("phase offsets must lie in [0,1)");
    for (double p : spec.keypose_phases)
        if (p < 0.0 || p >= 1.0) throw InvalidSpec("keypose phases must lie in [0,1)");
    if (!spec.phase_offsets.empty() &&
        static_cast<int>(spec.phase_offsets.size()) != spec.n_poselets)
        throw InvalidSpec("phase_offsets size must match n_poselets");
}

namespace {

std::vector<double> effective_phases(const SyntheticMotionSpec& spec) {
    if (!spec.phase_offsets.empty()) return spec.phase_offsets;
    std::vector<double> phases(static_cast<std::size_t>(spec.n_poselets));
    for (int i = 0; i < spec.n_poselets; ++i)
        phases[static_cast<std::size_t>(i)] = static_cast<double>(i) / spec.n_poselets;
    return phases;
}

void add_bump(std::vector<double>& series, double center, double sigma) {
    const int lo = std::max(0, static_cast<int>(std::floor(center - 5.0 * sigma)));
    const int hi = std::min(static_cast<int>(series.size()) - 1,
                            static_cast<int>(std::ceil(center + 5.0 * sigma)));
    for (int t = lo; t <= hi; ++t) {
        const double z = (t - center) / sigma;
        series[static_cast<std::size_t>(t)] += std::exp(-0.5 * z * z);
    }
}

} // namespace

SyntheticDataset generate(const SyntheticMotionSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double step = spec.mode == Mode::anti_symmetric ? spec.period / 2.0 : spec.period;
    const double bump_sigma = spec.bump_sigma_frac * spec.period;
    const std::vector<double> phases = effective_phases(spec);

    SyntheticDataset ds;
    ds.scores.frames = spec.duration;
    ds.scores.poselets = spec.n_poselets;
    ds.scores.values.assign(static_cast<std::size_t>(spec.duration) * spec.n_poselets, 0.0);
    ds.scores.missing.assign(ds.scores.values.size(), 0);
    ds.gt_activations.resize(static_cast<std::size_t>(spec.n_poselets));

    for (int i = 0; i < spec.n_poselets; ++i) {
        std::vector<double> series(static_cast<std::size_t>(spec.duration), 0.0);
        std::vector<int>& gt = ds.gt_activations[static_cast<std::size_t>(i)];

        double t = spec.start_offset + phases[static_cast<std::size_t>(i)] * spec.period;
        while (t < spec.duration) {
            double jittered = t;
            if (spec.jitter_frames > 0.0)
                jittered += (2.0 * unit(rng) - 1.0) * spec.jitter_frames;
            const int frame = static_cast<int>(std::lround(jittered));
            if (frame >= 0 && frame < spec.duration &&
                (gt.empty() || frame > gt.back())) {
                gt.push_back(frame);
                const bool dropped = spec.dropout_rate > 0.0 && unit(rng) < spec.dropout_rate;
                if (!dropped) add_bump(series, frame, bump_sigma);
                if (spec.spurious_rate > 0.0 && unit(rng) < spec.spurious_rate) {
                    const double at = unit(rng) * spec.duration;
                    add_bump(series, at, bump_sigma);
                }
            }
            t += step;
        }

        if (spec.noise_sigma > 0.0)
            for (auto& v : series) v += spec.noise_sigma * gauss(rng);

        for (int f = 0; f < spec.duration; ++f)
            ds.scores.at(f, i) = series[static_cast<std::size_t>(f)];
    }

    for (double phase : spec.keypose_phases) {
        std::vector<int> frames;
        double t = spec.start_offset + phase * spec.period;
        while (t < spec.duration) {
            const int f = static_cast<int>(std::lround(t));
            if (f >= 0 && f < spec.duration) frames.push_back(f);
            if (spec.mode == Mode::anti_symmetric) {
                const int f2 = static_cast<int>(std::lround(t + spec.period / 2.0));
                if (f2 >= 0 && f2 < spec.duration) frames.push_back(f2);
            }
            t += spec.period;
        }
        std::sort(frames.begin(), frames.end());
        ds.keypose_frames.push_back(std::move(frames));
    }
    return ds;
}

namespace {

void draw_segment(GrayImage& img, Point2 a, Point2 b, double thickness) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - thickness - 1)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + thickness + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - thickness - 1)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + thickness + 1)));
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double u = 0.0;
            if (len2 > 0.0) u = std::clamp(((x - a.x) * dx + (y - a.y) * dy) / len2, 0.0, 1.0);
            const double px = a.x + u * dx - x;
            const double py = a.y + u * dy - y;
            const double d = std::sqrt(px * px + py * py);
            if (d < thickness) img.at(x, y) = std::max(img.at(x, y), 1.0);
            else if (d < thickness + 1.0)
                img.at(x, y) = std::max(img.at(x, y), thickness + 1.0 - d);
        }
    }
}

struct Arm {
    Point2 shoulder, elbow, wrist;
};

// Limb angles are computed from the integer frame phase so configurations
// repeat bit-exactly with the period.
Arm arm_at_phase(Point2 shoulder, int phase_num, int period, double upper_len, double lower_len) {
    const double tau = static_cast<double>(phase_num) / period;
    const double theta1 = std::numbers::pi / 2.0 + 0.9 * std::sin(2.0 * std::numbers::pi * tau);
    const double theta2 = theta1 + 0.4 + 0.8 * std::sin(2.0 * std::numbers::pi * tau + 1.0);
    Arm arm;
    arm.shoulder = shoulder;
    arm.elbow = {shoulder.x + upper_len * std::cos(theta1), shoulder.y + upper_len * std::sin(theta1)};
    arm.wrist = {arm.elbow.x + lower_len * std::cos(theta2), arm.elbow.y + lower_len * std::sin(theta2)};
    return arm;
}

} // namespace

RenderedDataset render_frames(const SyntheticMotionSpec& spec, int canvas_w, int canvas_h) {
    validate(spec);
    const int period = static_cast<int>(std::lround(spec.period));
    const int half = period / 2;
    const double upper_len = canvas_h * 0.22;
    const double lower_len = canvas_h * 0.20;
    if (canvas_w < 16 || canvas_h < 16 || upper_len + lower_len > canvas_h / 2.0)
        throw InvalidSpec("canvas too small for the figure");

    const Point2 left_shoulder{canvas_w * 0.42, canvas_h * 0.32};
    const Point2 right_shoulder{canvas_w * 0.58, canvas_h * 0.32};
    const Point2 hip{canvas_w * 0.5, canvas_h * 0.72};
    const Point2 neck{canvas_w * 0.5, canvas_h * 0.30};

    RenderedDataset ds;
    for (int t = 0; t < spec.duration; ++t) {
        const int phase_l = ((t % period) + period) % period;
        const int phase_r = (((t - half) % period) + period) % period;
        const Arm left = arm_at_phase(left_shoulder, phase_l, period, upper_len, lower_len);
        const Arm right = spec.mode == Mode::anti_symmetric
                              ? arm_at_phase(right_shoulder, phase_r, period, upper_len, lower_len)
                              : arm_at_phase(right_shoulder, phase_l, period, upper_len, lower_len);

        GrayImage img;
        img.width = canvas_w;
        img.height = canvas_h;
        img.pixels.assign(static_cast<std::size_t>(canvas_w) * canvas_h, 0.0);
        draw_segment(img, neck, hip, 2.0);
        draw_segment(img, left_shoulder, right_shoulder, 2.0);
        draw_segment(img, left.shoulder, left.elbow, 1.5);
        draw_segment(img, left.elbow, left.wrist, 1.5);
        draw_segment(img, right.shoulder, right.elbow, 1.5);
        draw_segment(img, right.elbow, right.wrist, 1.5);
        ds.frames.push_back(std::move(img));

        JointConfiguration lc;
        lc.frame_index = t;
        lc.joints = {left.shoulder, left.elbow, left.wrist};
        ds.left_arm.push_back(std::move(lc));
        JointConfiguration rc;
        rc.frame_index = t;
        rc.joints = {right.shoulder, right.elbow, right.wrist};
        ds.right_arm.push_back(std::move(rc));
    }
    return ds;
}

} // namespace keypose
