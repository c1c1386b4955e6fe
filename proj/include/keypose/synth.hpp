#pragma once

#include <cstdint>
#include <vector>

#include "keypose/activations.hpp"
#include "keypose/features.hpp"
#include "keypose/geometry.hpp"

namespace keypose {

/// Recipe for a ground-truthed cyclic-motion dataset.
struct SyntheticMotionSpec {
    double period = 100.0;            // frames per stroke
    Mode mode = Mode::anti_symmetric;
    int n_poselets = 15;
    std::vector<double> phase_offsets; // per poselet in [0,1); auto-spread when empty
    double noise_sigma = 0.0;          // fraction of peak amplitude
    double dropout_rate = 0.0;
    double spurious_rate = 0.0;
    double jitter_frames = 0.0;        // per-activation timing jitter, uniform +-j
    std::vector<double> keypose_phases; // in [0,1)
    int duration = 5000;
    std::uint64_t seed = 0;
    double bump_sigma_frac = 0.05;     // bump sigma as fraction of period
    double start_offset = 0.0;         // global shift of every event, in frames
};

struct SyntheticDataset {
    ScoreMatrix scores;
    std::vector<std::vector<int>> gt_activations; // per poselet, pre-corruption
    std::vector<std::vector<int>> keypose_frames; // per keypose phase
};

/// Periodic Gaussian bump trains plus white noise. Bumps are dropped with
/// dropout_rate and spurious bumps injected with spurious_rate; ground truth
/// is recorded before corruption. Deterministic per seed.
SyntheticDataset generate(const SyntheticMotionSpec& spec);

struct RenderedDataset {
    std::vector<GrayImage> frames;
    std::vector<JointConfiguration> left_arm;  // one configuration per frame
    std::vector<JointConfiguration> right_arm;
};

/// Stick figure with sinusoidal limb angles; joint annotations are emitted
/// for clustering tests. In anti-symmetric mode the right limb lags the left
/// by half a period exactly.
RenderedDataset render_frames(const SyntheticMotionSpec& spec, int canvas_w, int canvas_h);

void validate(const SyntheticMotionSpec& spec);

} // namespace keypose
