#pragma once

#include <optional>
#include <string>
#include <vector>

#include "keypose/features.hpp"
#include "keypose/geometry.hpp"

namespace keypose {

/// Filter placement: cell coordinates on a pyramid level. Projected placements
/// (scale 1) may carry fractional coordinates.
struct Placement {
    double x = 0.0;
    double y = 0.0;
    double s = 1.0;  // level scale
    double w = 0.0;  // cells
    double h = 0.0;
    int level = 0;
};

/// Star-model deformation: mean offset from the root and 2x2 covariance,
/// both in original-image pixel coordinates.
struct DeformationParams {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double s_xx = 1.0;
    double s_xy = 0.0;
    double s_yy = 1.0;
};

struct PoseletPart {
    PoseletFilter filter;
    DeformationParams deform;
};

struct PoseletMixture {
    PoseletFilter root;
    std::vector<PoseletPart> parts;
    double gamma = 3.0;
};

struct PartScore {
    bool found = false;
    double value = 0.0;
    Placement placement;
};

/// Per-frame vector of constrained max part scores. `missing[i]` marks parts
/// whose search region was empty; their score entry is meaningless.
struct FrameDescriptor {
    std::vector<double> scores;
    std::vector<bool> missing;
    Placement root;
    int frame_index = 0;
};

inline constexpr double kSigmaRegularization = 1e-3; // px^2

/// Center of a placement in original-image pixel coordinates.
Point2 placement_center_image(const Placement& p, int cell_size);

/// Argmax of the root score over every position of every level. Ties broken
/// by lowest level index, then lowest y, then lowest x.
Placement best_root_placement(const PoseletFilter& root, const FeaturePyramid& pyramid);

/// Scale the placement to the original image: divide coordinates and size by
/// its level scale.
Placement project_root(const Placement& p0);

/// Max part score over the Mahalanobis-constrained region around the
/// projected root. Empty region is a legal outcome (found == false).
PartScore constrained_part_score(const PoseletFilter& part, const DeformationParams& deform,
                                 const Placement& root_hat, const FeaturePyramid& pyramid,
                                 double gamma, bool root_level_only = false,
                                 int root_level = 0);

FrameDescriptor frame_descriptor(const PoseletMixture& mixture, const FeaturePyramid& pyramid,
                                 int frame_index, bool root_level_only = false);

/// Fit (mu, Sigma) from paired root/part boxes: mu is the mean of
/// part-center minus root-center offsets, Sigma the unbiased sample
/// covariance plus a small ridge keeping it invertible.
DeformationParams fit_deformation(const std::vector<Placement>& root_boxes,
                                  const std::vector<Placement>& part_boxes,
                                  int cell_size = 1);

PoseletMixture load_mixture_json(const std::string& path);
void save_mixture_json(const PoseletMixture& mixture, const std::string& path);

/// Descriptor stream as CSV: header `frame,poselet_1,...,poselet_n`,
/// missing scores as empty fields.
void save_descriptors_csv(const std::vector<FrameDescriptor>& descriptors, const std::string& path);

} // namespace keypose
