#include "keypose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace keypose {

namespace {

Point2 centroid_of(const JointConfiguration& c) {
    Point2 m;
    for (const auto& p : c.joints) {
        m.x += p.x;
        m.y += p.y;
    }
    const double n = static_cast<double>(c.joints.size());
    m.x /= n;
    m.y /= n;
    return m;
}

double centered_energy(const JointConfiguration& c) {
    double e = 0.0;
    for (const auto& p : c.joints) e += p.x * p.x + p.y * p.y;
    return e;
}

} // namespace

JointConfiguration mean_correct(const JointConfiguration& config) {
    if (config.joints.size() < 2) throw DegenerateConfiguration("configuration needs at least 2 joints");
    const Point2 m = centroid_of(config);
    JointConfiguration out = config;
    for (auto& p : out.joints) {
        p.x -= m.x;
        p.y -= m.y;
    }
    return out;
}

AlignmentResult procrustes_distance(const JointConfiguration& a, const JointConfiguration& b) {
    if (a.joints.size() != b.joints.size())
        throw DimensionMismatch("configurations have different joint counts");
    const JointConfiguration ac = mean_correct(a);
    const JointConfiguration bc = mean_correct(b);

    double tr_aa = 0.0, tr_bb = 0.0, tr_ab = 0.0;
    for (std::size_t i = 0; i < ac.joints.size(); ++i) {
        tr_aa += ac.joints[i].x * ac.joints[i].x + ac.joints[i].y * ac.joints[i].y;
        tr_bb += bc.joints[i].x * bc.joints[i].x + bc.joints[i].y * bc.joints[i].y;
        tr_ab += ac.joints[i].x * bc.joints[i].x + ac.joints[i].y * bc.joints[i].y;
    }
    if (tr_aa <= 0.0 || tr_bb <= 0.0)
        throw DegenerateConfiguration("all joints coincide");

    AlignmentResult r;
    r.scale = std::max(0.0, tr_ab / tr_bb);
    double residual = 0.0;
    for (std::size_t i = 0; i < ac.joints.size(); ++i) {
        const double dx = ac.joints[i].x - r.scale * bc.joints[i].x;
        const double dy = ac.joints[i].y - r.scale * bc.joints[i].y;
        residual += dx * dx + dy * dy;
    }
    r.distance = residual / tr_aa;
    const Point2 ma = centroid_of(a);
    const Point2 mb = centroid_of(b);
    r.translation = {ma.x - r.scale * mb.x, ma.y - r.scale * mb.y};
    return r;
}

JointConfiguration centroid_update(const std::vector<JointConfiguration>& members,
                                   const JointConfiguration* reference) {
    if (members.empty()) throw DegenerateConfiguration("empty cluster");

    JointConfiguration ref;
    if (reference != nullptr) {
        ref = mean_correct(*reference);
    } else {
        ref = mean_correct(members.front());
    }
    const double ref_energy = centered_energy(ref);
    if (ref_energy <= 0.0) throw DegenerateConfiguration("degenerate reference");

    JointConfiguration acc;
    acc.joints.assign(members.front().joints.size(), Point2{});
    for (const auto& m : members) {
        if (m.joints.size() != acc.joints.size())
            throw DimensionMismatch("cluster members have different joint counts");
        const JointConfiguration mc = mean_correct(m);
        double tr_bb = 0.0, tr_ab = 0.0;
        for (std::size_t i = 0; i < mc.joints.size(); ++i) {
            tr_bb += mc.joints[i].x * mc.joints[i].x + mc.joints[i].y * mc.joints[i].y;
            tr_ab += ref.joints[i].x * mc.joints[i].x + ref.joints[i].y * mc.joints[i].y;
        }
        if (tr_bb <= 0.0) throw DegenerateConfiguration("degenerate cluster member");
        const double s = std::max(0.0, tr_ab / tr_bb);
        for (std::size_t i = 0; i < mc.joints.size(); ++i) {
            acc.joints[i].x += s * mc.joints[i].x;
            acc.joints[i].y += s * mc.joints[i].y;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(members.size());
    for (auto& p : acc.joints) {
        p.x *= inv_n;
        p.y *= inv_n;
    }
    acc = mean_correct(acc);
    const double energy = centered_energy(acc);
    if (energy <= 0.0) throw DegenerateConfiguration("cluster members cancel out");
    const double inv_norm = 1.0 / std::sqrt(energy);
    for (auto& p : acc.joints) {
        p.x *= inv_norm;
        p.y *= inv_norm;
    }
    return acc;
}

double clustering_cost(const std::vector<JointConfiguration>& configs,
                       const std::vector<ConfigurationCluster>& clusters) {
    double total = 0.0;
    for (const auto& cl : clusters)
        for (int idx : cl.members)
            total += procrustes_distance(configs[static_cast<std::size_t>(idx)], cl.centroid).distance;
    return total;
}

std::vector<ConfigurationCluster> kmeans_temporal(const std::vector<JointConfiguration>& configs,
                                                  int k, std::uint64_t seed, int max_iter) {
    const int n = static_cast<int>(configs.size());
    if (k <= 0 || k > n) throw InvalidSpec("k must be in [1, #configs]");

    // Ingestion check: reject unusable annotations up front.
    std::vector<JointConfiguration> normalized;
    normalized.reserve(configs.size());
    for (const auto& c : configs) {
        JointConfiguration mc = mean_correct(c);
        const double e = centered_energy(mc);
        if (e <= 0.0) throw DegenerateConfiguration("degenerate configuration at ingestion");
        normalized.push_back(mc);
    }

    // Farthest-point seeding under the clustering distance.
    std::mt19937_64 rng(seed);
    std::vector<int> seeds;
    seeds.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(n)));
    std::vector<double> min_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(seeds.size()) < k) {
        for (int i = 0; i < n; ++i) {
            const double d =
                procrustes_distance(configs[static_cast<std::size_t>(i)],
                                    configs[static_cast<std::size_t>(seeds.back())]).distance;
            min_dist[static_cast<std::size_t>(i)] = std::min(min_dist[static_cast<std::size_t>(i)], d);
        }
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < n; ++i) {
            if (std::find(seeds.begin(), seeds.end(), i) != seeds.end()) continue;
            if (min_dist[static_cast<std::size_t>(i)] > best_d) {
                best_d = min_dist[static_cast<std::size_t>(i)];
                best = i;
            }
        }
        seeds.push_back(best);
    }

    std::vector<JointConfiguration> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    for (int s : seeds)
        centroids.push_back(centroid_update({configs[static_cast<std::size_t>(s)]}));

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        // Assignment: d(config, centroid), config is the target A being explained.
        for (int i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = procrustes_distance(configs[static_cast<std::size_t>(i)],
                                                     centroids[static_cast<std::size_t>(c)]).distance;
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best_c) {
                assign[static_cast<std::size_t>(i)] = best_c;
                changed = true;
            }
        }

        // Empty clusters: reseed with the member farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (std::count(assign.begin(), assign.end(), c) > 0) continue;
            int farthest = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                const int a = assign[static_cast<std::size_t>(i)];
                if (std::count(assign.begin(), assign.end(), a) <= 1) continue;
                const double d = procrustes_distance(configs[static_cast<std::size_t>(i)],
                                                     centroids[static_cast<std::size_t>(a)]).distance;
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest >= 0) {
                assign[static_cast<std::size_t>(farthest)] = c;
                centroids[static_cast<std::size_t>(c)] =
                    centroid_update({configs[static_cast<std::size_t>(farthest)]});
                changed = true;
            }
        }

        if (!changed) break;

        for (int c = 0; c < k; ++c) {
            std::vector<JointConfiguration> members;
            for (int i = 0; i < n; ++i)
                if (assign[static_cast<std::size_t>(i)] == c)
                    members.push_back(configs[static_cast<std::size_t>(i)]);
            if (!members.empty())
                centroids[static_cast<std::size_t>(c)] =
                    centroid_update(members, &centroids[static_cast<std::size_t>(c)]);
        }
    }

    std::vector<ConfigurationCluster> clusters(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) clusters[static_cast<std::size_t>(c)].centroid = centroids[static_cast<std::size_t>(c)];
    for (int i = 0; i < n; ++i)
        clusters[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].members.push_back(i);
    for (auto& cl : clusters) {
        cl.cost = 0.0;
        for (int idx : cl.members)
            cl.cost += procrustes_distance(configs[static_cast<std::size_t>(idx)], cl.centroid).distance;
    }
    return clusters;
}

std::vector<JointConfiguration> load_configurations_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    std::vector<JointConfiguration> out;
    for (const auto& item : j) {
        JointConfiguration c;
        c.frame_index = item.at("frame").get<int>();
        if (item.contains("video")) c.video = item["video"].get<std::string>();
        for (const auto& pt : item.at("joints"))
            c.joints.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        out.push_back(std::move(c));
    }
    return out;
}

void save_configurations_json(const std::vector<JointConfiguration>& configs, const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : configs) {
        nlohmann::json item;
        item["frame"] = c.frame_index;
        item["video"] = c.video;
        nlohmann::json joints = nlohmann::json::array();
        for (const auto& p : c.joints) joints.push_back({p.x, p.y});
        item["joints"] = joints;
        j.push_back(item);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

void save_clusters_json(const std::vector<ConfigurationCluster>& clusters, const std::string& path,
                        const std::string& config_json) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        nlohmann::json item;
        item["cluster"] = static_cast<int>(c);
        item["members"] = clusters[c].members;
        nlohmann::json joints = nlohmann::json::array();
        for (const auto& p : clusters[c].centroid.joints) joints.push_back({p.x, p.y});
        item["centroid"] = joints;
        item["cost"] = clusters[c].cost;
        j.push_back(item);
    }
    nlohmann::json doc;
    doc["clusters"] = j;
    if (!config_json.empty()) doc["config"] = nlohmann::json::parse(config_json);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

} // namespace keypose
