#include "keypose/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace keypose {

MatchResult match(std::vector<int> preds, std::vector<int> gts, double window) {
    std::sort(preds.begin(), preds.end());
    std::sort(gts.begin(), gts.end());

    struct Pair {
        double dist;
        std::size_t p, g;
    };
    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < preds.size(); ++p)
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double d = std::abs(static_cast<double>(preds[p]) - gts[g]);
            if (d <= window) pairs.push_back({d, p, g});
        }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (preds[a.p] != preds[b.p]) return preds[a.p] < preds[b.p];
        return gts[a.g] < gts[b.g];
    });

    std::vector<bool> p_used(preds.size(), false), g_used(gts.size(), false);
    MatchResult r;
    for (const auto& pr : pairs) {
        if (p_used[pr.p] || g_used[pr.g]) continue;
        p_used[pr.p] = true;
        g_used[pr.g] = true;
        r.pairs.push_back({preds[pr.p], gts[pr.g], pr.dist});
    }
    r.tp = static_cast<int>(r.pairs.size());
    r.fp = static_cast<int>(preds.size()) - r.tp;
    r.fn = static_cast<int>(gts.size()) - r.tp;
    return r;
}

double RecallCurve::recall_at(double x) const {
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] <= x) best = recall[i];
    return best;
}

RecallCurve curve(const MatchResult& result, double f_stroke, const std::vector<double>& grid) {
    if (f_stroke <= 0.0) throw InvalidSpec("f_stroke must be positive");
    RecallCurve c;
    c.grid = grid;
    if (std::find(c.grid.begin(), c.grid.end(), 0.03) == c.grid.end()) {
        c.grid.push_back(0.03);
        std::sort(c.grid.begin(), c.grid.end());
    }
    const int gts = result.tp + result.fn;
    for (double x : c.grid) {
        int hits = 0;
        for (const auto& p : result.pairs)
            if (p.deviation_frames / f_stroke <= x) ++hits;
        c.recall.push_back(gts > 0 ? static_cast<double>(hits) / gts : 0.0);
    }
    const int preds = result.tp + result.fp;
    c.no_predictions = preds == 0;
    c.precision = preds > 0 ? static_cast<double>(result.tp) / preds : 1.0;
    c.tp = result.tp;
    c.fp = result.fp;
    c.fn = result.fn;
    c.f_stroke = f_stroke;
    return c;
}

std::vector<double> default_deviation_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(i * 0.01);
    return g;
}

void save_curve_csv(const RecallCurve& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "deviation,recall\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i) out << c.grid[i] << "," << c.recall[i] << "\n";
}

void save_summary_json(const RecallCurve& c, const std::string& path,
                       const std::string& config_json) {
    nlohmann::json j;
    j["recall_at_003"] = c.recall_at(0.03);
    j["precision"] = c.precision;
    j["no_predictions"] = c.no_predictions;
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["fn"] = c.fn;
    j["f_stroke"] = c.f_stroke;
    if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace keypose
