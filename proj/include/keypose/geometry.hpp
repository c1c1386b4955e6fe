#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "keypose/errors.hpp"

namespace keypose {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// One frame's joint annotation: an ordered list of 2-D joint locations.
/// Joint order must be identical across all configurations that are compared.
struct JointConfiguration {
    std::vector<Point2> joints;
    int frame_index = 0;
    std::string video;
};

/// Result of aligning configuration B onto A with translation and a
/// non-negative uniform scale. `distance` is the Sibson-normalized residual.
struct AlignmentResult {
    double scale = 0.0;
    Point2 translation;
    double distance = 0.0;
};

struct ConfigurationCluster {
    std::vector<int> members;   // indices into the input configuration list
    JointConfiguration centroid; // mean-corrected, unit Sibson norm
    double cost = 0.0;
};

/// Subtract the centroid from every joint.
JointConfiguration mean_correct(const JointConfiguration& config);

/// Rotation-free Procrustes distance. The scale factor is clamped to be
/// non-negative (a negative scale would be a point reflection), and the
/// residual is divided by the centered energy of `a` so distances between
/// different pairs are comparable. Asymmetric: the denominator uses `a` only.
///
/// Throws DegenerateConfiguration when either configuration has all joints
/// coincident, DimensionMismatch when joint counts differ.
AlignmentResult procrustes_distance(const JointConfiguration& a, const JointConfiguration& b);

/// Centroid of a cluster: each member is scaled onto the reference via its
/// optimal non-negative scale, the aligned joints are averaged, and the result
/// is normalized to unit centered energy. `reference` defaults to the first
/// member when null.
JointConfiguration centroid_update(const std::vector<JointConfiguration>& members,
                                   const JointConfiguration* reference = nullptr);

/// k-means over the rotation-free distance, evaluated as d(config, centroid).
/// Farthest-point seeding from a seeded PRNG; empty clusters are reseeded with
/// the member farthest from its centroid. Deterministic for a fixed seed.
std::vector<ConfigurationCluster> kmeans_temporal(const std::vector<JointConfiguration>& configs,
                                                  int k, std::uint64_t seed, int max_iter = 100);

/// Total within-cluster cost, sum of d(member, centroid).
double clustering_cost(const std::vector<JointConfiguration>& configs,
                       const std::vector<ConfigurationCluster>& clusters);

std::vector<JointConfiguration> load_configurations_json(const std::string& path);
void save_configurations_json(const std::vector<JointConfiguration>& configs, const std::string& path);
void save_clusters_json(const std::vector<ConfigurationCluster>& clusters, const std::string& path,
                        const std::string& config_json = "");

} // namespace keypose
