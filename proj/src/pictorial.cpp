#include "keypose/pictorial.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace keypose {

Point2 placement_center_image(const Placement& p, int cell_size) {
    return {(p.x + p.w / 2.0) * cell_size / p.s, (p.y + p.h / 2.0) * cell_size / p.s};
}

Placement best_root_placement(const PoseletFilter& root, const FeaturePyramid& pyramid) {
    Placement best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t l = 0; l < pyramid.levels.size(); ++l) {
        const FeatureGrid& grid = pyramid.levels[l].grid;
        if (grid.cells_x < root.w || grid.cells_y < root.h) continue;
        for (int y = 0; y + root.h <= grid.cells_y; ++y) {
            for (int x = 0; x + root.w <= grid.cells_x; ++x) {
                const double s = score_at(root, grid, x, y);
                if (s > best_score) {
                    best_score = s;
                    best = Placement{static_cast<double>(x), static_cast<double>(y),
                                     pyramid.levels[l].scale, static_cast<double>(root.w),
                                     static_cast<double>(root.h), static_cast<int>(l)};
                    found = true;
                }
            }
        }
    }
    if (!found) throw NoValidPlacement("no level can host the root filter");
    return best;
}

Placement project_root(const Placement& p0) {
    Placement p = p0;
    p.x /= p0.s;
    p.y /= p0.s;
    p.w /= p0.s;
    p.h /= p0.s;
    p.s = 1.0;
    return p;
}

namespace {

struct SigmaInverse {
    double i_xx, i_xy, i_yy;
};

SigmaInverse invert(const DeformationParams& d) {
    const double det = d.s_xx * d.s_yy - d.s_xy * d.s_xy;
    return {d.s_yy / det, -d.s_xy / det, d.s_xx / det};
}

} // namespace

PartScore constrained_part_score(const PoseletFilter& part, const DeformationParams& deform,
                                 const Placement& root_hat, const FeaturePyramid& pyramid,
                                 double gamma, bool root_level_only, int root_level) {
    const SigmaInverse inv = invert(deform);
    PartScore best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < pyramid.levels.size(); ++l) {
        if (root_level_only && static_cast<int>(l) != root_level) continue;
        const PyramidLevel& level = pyramid.levels[l];
        const FeatureGrid& grid = level.grid;
        if (grid.cells_x < part.w || grid.cells_y < part.h) continue;
        const int cell_size = grid.cell_size;
        const Point2 r = placement_center_image(root_hat, cell_size);
        for (int y = 0; y + part.h <= grid.cells_y; ++y) {
            for (int x = 0; x + part.w <= grid.cells_x; ++x) {
                Placement p{static_cast<double>(x), static_cast<double>(y), level.scale,
                            static_cast<double>(part.w), static_cast<double>(part.h),
                            static_cast<int>(l)};
                const Point2 c = placement_center_image(p, cell_size);
                const double zx = c.x - (r.x + deform.mu_x);
                const double zy = c.y - (r.y + deform.mu_y);
                const double m2 = zx * (inv.i_xx * zx + inv.i_xy * zy) +
                                  zy * (inv.i_xy * zx + inv.i_yy * zy);
                if (!(std::sqrt(std::max(0.0, m2)) < gamma)) continue;
                const double s = score_at(part, grid, x, y);
                if (s > best.value) {
                    best.value = s;
                    best.placement = p;
                    best.found = true;
                }
            }
        }
    }
    return best;
}

FrameDescriptor frame_descriptor(const PoseletMixture& mixture, const FeaturePyramid& pyramid,
                                 int frame_index, bool root_level_only) {
    const Placement p0 = best_root_placement(mixture.root, pyramid);
    const Placement root_hat = project_root(p0);
    FrameDescriptor d;
    d.frame_index = frame_index;
    d.root = p0;
    d.scores.reserve(mixture.parts.size());
    d.missing.reserve(mixture.parts.size());
    for (const auto& part : mixture.parts) {
        const PartScore ps = constrained_part_score(part.filter, part.deform, root_hat, pyramid,
                                                    mixture.gamma, root_level_only, p0.level);
        d.scores.push_back(ps.found ? ps.value : -std::numeric_limits<double>::infinity());
        d.missing.push_back(!ps.found);
    }
    return d;
}

DeformationParams fit_deformation(const std::vector<Placement>& root_boxes,
                                  const std::vector<Placement>& part_boxes,
                                  int cell_size) {
    if (root_boxes.size() != part_boxes.size())
        throw DimensionMismatch("root and part box lists differ in length");
    if (root_boxes.size() < 2) throw InsufficientPairs("need at least 2 paired boxes");

    std::vector<Point2> offsets;
    offsets.reserve(root_boxes.size());
    for (std::size_t i = 0; i < root_boxes.size(); ++i) {
        const Point2 r = placement_center_image(root_boxes[i], cell_size);
        const Point2 p = placement_center_image(part_boxes[i], cell_size);
        offsets.push_back({p.x - r.x, p.y - r.y});
    }

    DeformationParams d;
    for (const auto& o : offsets) {
        d.mu_x += o.x;
        d.mu_y += o.y;
    }
    d.mu_x /= static_cast<double>(offsets.size());
    d.mu_y /= static_cast<double>(offsets.size());

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& o : offsets) {
        const double dx = o.x - d.mu_x;
        const double dy = o.y - d.mu_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double denom = static_cast<double>(offsets.size()) - 1.0;
    d.s_xx = sxx / denom + kSigmaRegularization;
    d.s_xy = sxy / denom;
    d.s_yy = syy / denom + kSigmaRegularization;
    return d;
}

namespace {

nlohmann::json filter_to_json(const PoseletFilter& f) {
    nlohmann::json j;
    j["w"] = f.w;
    j["h"] = f.h;
    j["channels"] = f.channels;
    j["bias"] = f.bias;
    j["weights"] = f.weights;
    return j;
}

PoseletFilter filter_from_json(const nlohmann::json& j) {
    PoseletFilter f;
    f.w = j.at("w").get<int>();
    f.h = j.at("h").get<int>();
    f.channels = j.at("channels").get<int>();
    f.bias = j.at("bias").get<double>();
    f.weights = j.at("weights").get<std::vector<double>>();
    return f;
}

} // namespace

PoseletMixture load_mixture_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    PoseletMixture m;
    m.root = filter_from_json(j.at("root"));
    m.gamma = j.at("gamma").get<double>();
    for (const auto& pj : j.at("parts")) {
        PoseletPart part;
        part.filter = filter_from_json(pj.at("filter"));
        part.deform.mu_x = pj.at("mu").at(0).get<double>();
        part.deform.mu_y = pj.at("mu").at(1).get<double>();
        part.deform.s_xx = pj.at("sigma").at(0).at(0).get<double>();
        part.deform.s_xy = pj.at("sigma").at(0).at(1).get<double>();
        part.deform.s_yy = pj.at("sigma").at(1).at(1).get<double>();
        m.parts.push_back(std::move(part));
    }
    return m;
}

void save_mixture_json(const PoseletMixture& mixture, const std::string& path) {
    nlohmann::json j;
    j["root"] = filter_to_json(mixture.root);
    j["gamma"] = mixture.gamma;
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : mixture.parts) {
        nlohmann::json pj;
        pj["filter"] = filter_to_json(p.filter);
        pj["mu"] = {p.deform.mu_x, p.deform.mu_y};
        pj["sigma"] = {{p.deform.s_xx, p.deform.s_xy}, {p.deform.s_xy, p.deform.s_yy}};
        parts.push_back(std::move(pj));
    }
    j["parts"] = parts;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump() << "\n";
}

void save_descriptors_csv(const std::vector<FrameDescriptor>& descriptors, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const std::size_t n = descriptors.empty() ? 0 : descriptors.front().scores.size();
    out << "frame";
    for (std::size_t i = 1; i <= n; ++i) out << ",poselet_" << i;
    out << "\n";
    out.precision(17);
    for (const auto& d : descriptors) {
        out << d.frame_index;
        for (std::size_t i = 0; i < n; ++i) {
            out << ",";
            if (!d.missing[i]) out << d.scores[i];
        }
        out << "\n";
    }
}

} // namespace keypose
