#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <vector>

#include "keypose/eval.hpp"

using namespace keypose;

namespace {

// Exhaustive maximum-cardinality matching within the window; exponential but
// fine for the tiny instances used here. Serves as an upper-bound oracle.
int optimal_match_count(const std::vector<int>& preds, const std::vector<int>& gts,
                        double window, std::size_t pi = 0, std::vector<bool>* used = nullptr) {
    std::vector<bool> local;
    if (!used) {
        local.assign(gts.size(), false);
        used = &local;
    }
    if (pi == preds.size()) return 0;
    int best = optimal_match_count(preds, gts, window, pi + 1, used); // skip this pred
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if ((*used)[g] || std::abs(preds[pi] - gts[g]) > window) continue;
        (*used)[g] = true;
        best = std::max(best, 1 + optimal_match_count(preds, gts, window, pi + 1, used));
        (*used)[g] = false;
    }
    return best;
}

} // namespace

TEST_CASE("perfect predictions match one-to-one with zero deviation") {
    const auto r = match({10, 110, 210}, {10, 110, 210});
    CHECK(r.tp == 3);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    for (const auto& p : r.pairs) CHECK(p.deviation_frames == doctest::Approx(0.0));
}

TEST_CASE("equidistant predictions break the tie toward the lower frame") {
    const auto r = match({99, 101}, {100});
    REQUIRE(r.tp == 1);
    CHECK(r.pairs[0].pred == 99);
    CHECK(r.fp == 1);
    CHECK(r.fn == 0);
}

TEST_CASE("matches outside the window do not count") {
    const auto r = match({0}, {11}, 10.0);
    CHECK(r.tp == 0);
    CHECK(r.fp == 1);
    CHECK(r.fn == 1);

    const auto edge = match({0}, {10}, 10.0);
    CHECK(edge.tp == 1); // window is inclusive
}

TEST_CASE("counting identities always hold") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> frame(0, 300);
    std::uniform_int_distribution<int> count(0, 8);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<int> preds, gts;
        for (int i = count(rng); i > 0; --i) preds.push_back(frame(rng));
        for (int i = count(rng); i > 0; --i) gts.push_back(frame(rng));
        std::sort(preds.begin(), preds.end());
        std::sort(gts.begin(), gts.end());
        preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
        gts.erase(std::unique(gts.begin(), gts.end()), gts.end());

        const auto r = match(preds, gts, 10.0);
        CHECK(r.tp + r.fp == static_cast<int>(preds.size()));
        CHECK(r.tp + r.fn == static_cast<int>(gts.size()));
        CHECK(static_cast<int>(r.pairs.size()) == r.tp);
        for (const auto& p : r.pairs) CHECK(p.deviation_frames <= 10.0);

        // One-to-one: no pred or gt appears twice.
        std::vector<int> seen_p, seen_g;
        for (const auto& p : r.pairs) {
            seen_p.push_back(p.pred);
            seen_g.push_back(p.gt);
        }
        std::sort(seen_p.begin(), seen_p.end());
        std::sort(seen_g.begin(), seen_g.end());
        CHECK(std::adjacent_find(seen_p.begin(), seen_p.end()) == seen_p.end());
        CHECK(std::adjacent_find(seen_g.begin(), seen_g.end()) == seen_g.end());

        // Greedy never exceeds the optimal assignment.
        CHECK(r.tp <= optimal_match_count(preds, gts, 10.0));
    }
}

TEST_CASE("greedy equals optimal when events are well separated") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> jitter(-4, 4);
    std::bernoulli_distribution drop(0.3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<int> gts, preds;
        for (int t = 50; t < 500; t += 50) {
            gts.push_back(t);
            if (!drop(rng)) preds.push_back(t + jitter(rng));
        }
        const auto r = match(preds, gts, 10.0);
        CHECK(r.tp == optimal_match_count(preds, gts, 10.0));
        CHECK(r.tp == static_cast<int>(preds.size()));
    }
}

TEST_CASE("recall curve is monotone and hits the fixed operating point") {
    // f_stroke 100: deviations 1, 2, 5 frames = 0.01, 0.02, 0.05 of a stroke.
    const auto r = match({11, 112, 215}, {10, 110, 210, 310});
    const auto c = curve(r, 100.0, default_deviation_grid());
    REQUIRE(c.grid.size() == c.recall.size());
    for (std::size_t i = 1; i < c.recall.size(); ++i) CHECK(c.recall[i] >= c.recall[i - 1]);
    CHECK(c.recall_at(0.03) == doctest::Approx(2.0 / 4.0)); // dev 5 > 3 frames
    CHECK(c.recall_at(0.05) == doctest::Approx(3.0 / 4.0));
    CHECK(c.precision == doctest::Approx(1.0));
    CHECK(c.fn == 1);
}

TEST_CASE("precision counts unmatched predictions") {
    const auto r = match({10, 50, 110}, {10, 110});
    const auto c = curve(r, 100.0, default_deviation_grid());
    CHECK(c.precision == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(c.no_predictions);
}

TEST_CASE("zero predictions report precision one with a flag") {
    const auto r = match({}, {10, 110});
    const auto c = curve(r, 100.0, default_deviation_grid());
    CHECK(c.precision == doctest::Approx(1.0));
    CHECK(c.no_predictions);
    CHECK(c.recall_at(0.03) == doctest::Approx(0.0));
}

TEST_CASE("the default grid contains the operating point") {
    const auto g = default_deviation_grid();
    CHECK(std::find_if(g.begin(), g.end(),
                       [](double x) { return std::abs(x - 0.03) < 1e-12; }) != g.end());
    CHECK(std::is_sorted(g.begin(), g.end()));
}

TEST_CASE("curve artifacts serialize") {
    const auto r = match({10, 110}, {12, 110});
    const auto c = curve(r, 100.0, default_deviation_grid());
    save_curve_csv(c, "curve_roundtrip.csv");
    save_summary_json(c, "summary_roundtrip.json");
    // Sanity: the summary carries the operating-point fields.
    std::ifstream in("summary_roundtrip.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("recall_at_003") != std::string::npos);
    CHECK(text.find("precision") != std::string::npos);
}
