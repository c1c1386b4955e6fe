#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "keypose/estimator.hpp"

using namespace keypose;

namespace {

RegularInterval iv(int start, int end, int poselet = 0, int mid = -1) {
    RegularInterval r;
    r.poselet = poselet;
    r.start = start;
    r.end = end;
    if (mid >= 0) {
        r.mid = mid;
        r.has_mid = true;
    }
    return r;
}

double log_normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

} // namespace

TEST_CASE("occurrence coefficient is a normalized interval position") {
    CHECK(occurrence_coefficient(iv(100, 200), 140.0) == doctest::Approx(0.4));
    CHECK(occurrence_coefficient(iv(100, 200), 100.0) == doctest::Approx(0.0));
    CHECK(occurrence_coefficient(iv(0, 50), 25.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(occurrence_coefficient(iv(100, 200), 240.0), GroundTruthOutsideInterval);
    CHECK_THROWS_AS(occurrence_coefficient(iv(100, 200), 99.0), GroundTruthOutsideInterval);
}

TEST_CASE("symmetric fit recovers a constant coefficient with the sigma floor") {
    // Three intervals of length 100, ground truth always at c = 0.3.
    std::vector<RegularInterval> ivs{iv(0, 100), iv(100, 200), iv(200, 300)};
    const std::vector<int> gt{30, 130, 230};
    const auto model = fit_likelihoods(ivs, gt, Mode::symmetric);
    REQUIRE(model.likelihoods.size() == 1);
    CHECK(model.likelihoods[0].mu == doctest::Approx(0.3));
    CHECK(model.likelihoods[0].sigma == doctest::Approx(kSigmaMin));
    CHECK(model.likelihoods[0].samples == 3);
}

TEST_CASE("anti-symmetric fit folds each pair onto the smaller coefficient") {
    // Each interval of length 100 encloses ground truths at c and c + 0.5.
    std::vector<RegularInterval> ivs{iv(0, 100, 0, 50), iv(100, 200, 0, 150)};
    const std::vector<int> gt{20, 70, 120, 170};
    const auto model = fit_likelihoods(ivs, gt, Mode::anti_symmetric);
    REQUIRE(model.likelihoods.size() == 1);
    CHECK(model.likelihoods[0].mu == doctest::Approx(0.2));
    CHECK(model.likelihoods[0].samples == 2);
}

TEST_CASE("intervals with the wrong ground-truth count are skipped") {
    // Second symmetric interval holds two ground truths: skipped, not fatal.
    std::vector<RegularInterval> ivs{iv(0, 100), iv(100, 200), iv(200, 300)};
    const std::vector<int> gt{30, 130, 160, 230};
    const auto model = fit_likelihoods(ivs, gt, Mode::symmetric);
    REQUIRE(model.likelihoods.size() == 1);
    CHECK(model.likelihoods[0].samples == 2);
}

TEST_CASE("poselets with one sample are dropped; an empty model throws") {
    std::vector<RegularInterval> ivs{iv(0, 100, 0), iv(100, 200, 0), iv(0, 100, 1)};
    const auto model = fit_likelihoods(ivs, {30, 130}, Mode::symmetric);
    REQUIRE(model.likelihoods.size() == 1);
    CHECK(model.likelihoods[0].poselet == 0);

    CHECK_THROWS_AS(fit_likelihoods({iv(0, 100)}, {30}, Mode::symmetric), InsufficientSamples);
    CHECK_THROWS_AS(fit_likelihoods({iv(0, 100)}, {}, Mode::symmetric), InsufficientSamples);
}

TEST_CASE("fitted sigma matches a 1000-sample Gaussian within 5 percent") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> coeff(0.30, 0.05);
    std::vector<RegularInterval> ivs;
    std::vector<int> gt;
    // Use long intervals so rounding to integer frames costs < 0.1% in c.
    const int len = 10000;
    for (int i = 0; i < 1000; ++i) {
        const int start = i * (len + 10);
        ivs.push_back(iv(start, start + len));
        double c = std::clamp(coeff(rng), 0.01, 0.99);
        gt.push_back(start + static_cast<int>(std::lround(c * len)));
    }
    const auto model = fit_likelihoods(ivs, gt, Mode::symmetric);
    REQUIRE(model.likelihoods.size() == 1);
    CHECK(model.likelihoods[0].mu == doctest::Approx(0.30).epsilon(0.05));
    CHECK(model.likelihoods[0].sigma == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("candidate de-normalization into a concrete interval") {
    KeyPoseModel model;
    model.mode = Mode::symmetric;
    model.likelihoods.push_back({0, 0.4, 0.03, 5});
    const std::vector<RegularInterval> ivs{iv(200, 260)};
    const auto cands = predict_candidates(model, ivs);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].mu_pos == doctest::Approx(200 + 0.4 * 60)); // 224
    CHECK(cands[0].sigma_pos == doctest::Approx(0.03 * 60));   // 1.8
}

TEST_CASE("anti-symmetric candidates come in half-stroke pairs") {
    KeyPoseModel model;
    model.mode = Mode::anti_symmetric;
    model.likelihoods.push_back({0, 0.2, 0.02, 4});
    const std::vector<RegularInterval> ivs{iv(100, 200, 0, 150)};
    const auto cands = predict_candidates(model, ivs);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].mu_pos == doctest::Approx(120.0));
    CHECK(cands[1].mu_pos == doctest::Approx(170.0)); // +0.5 * 100
    CHECK(cands[0].sigma_pos == doctest::Approx(cands[1].sigma_pos));
}

TEST_CASE("occurrence estimation votes candidate pairs to the density argmax") {
    // Two candidates centered at 224 and 226: argmax of the summed log pdfs
    // on the integer grid is 225.
    std::vector<Candidate> cands{{224.0, 3.0}, {226.0, 3.0}};
    const auto preds = estimate_occurrences(cands, 20.0, 2, 5.0);
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].frame == 225);
    CHECK(preds[0].support == 2);
    const double expect = log_normal_pdf(225, 224, 3) + log_normal_pdf(225, 226, 3);
    CHECK(preds[0].log_score == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("grid argmax agrees with a dense scan") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pos(100.0, 140.0), sd(2.0, 6.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Candidate> cands;
        for (int i = 0; i < 5; ++i) cands.push_back({pos(rng), sd(rng)});
        const auto preds = estimate_occurrences(cands, 200.0, 2, 8.0);
        REQUIRE(preds.size() >= 1);
        // Wide subwindow + heavy smoothing: a single prediction covering all.
        double best = -1e300;
        int best_t = 0;
        for (int t = 0; t < 300; ++t) {
            double s = 0.0;
            for (const auto& c : cands) s += log_normal_pdf(t, c.mu_pos, c.sigma_pos);
            if (s > best) {
                best = s;
                best_t = t;
            }
        }
        CHECK(preds[0].frame == best_t);
    }
}

TEST_CASE("min_support filters lonely candidates") {
    std::vector<Candidate> cands{{100.0, 2.0}, {102.0, 2.0}, {500.0, 2.0}};
    const auto strict = estimate_occurrences(cands, 20.0, 2, 4.0);
    REQUIRE(strict.size() == 1);
    CHECK(strict[0].frame == 101);

    const auto lax = estimate_occurrences(cands, 20.0, 1, 4.0);
    REQUIRE(lax.size() == 2);
    CHECK(lax[1].frame == 500);
    CHECK(lax[1].support == 1);
}

TEST_CASE("no candidates is an error") {
    CHECK_THROWS_AS(estimate_occurrences({}, 20.0, 2, 4.0), NoCandidates);
}

TEST_CASE("prior built from one annotation covers enclosing intervals only") {
    const std::vector<RegularInterval> ivs{iv(0, 100, 0), iv(100, 200, 0), iv(40, 140, 1)};
    const auto prior = build_prior(60.0, ivs, Mode::symmetric);
    REQUIRE(prior.mu.size() == 2);
    CHECK(prior.mu[0].first == 0);
    CHECK(prior.mu[0].second == doctest::Approx(0.6));
    CHECK(prior.mu[1].first == 1);
    CHECK(prior.mu[1].second == doctest::Approx(0.2));

    CHECK_THROWS_AS(build_prior(1000.0, ivs, Mode::symmetric), AnnotationNotCovered);
}

TEST_CASE("anti-symmetric prior folds large coefficients") {
    const std::vector<RegularInterval> ivs{iv(0, 100, 0, 50)};
    const auto prior = build_prior(80.0, ivs, Mode::anti_symmetric);
    REQUIRE(prior.mu.size() == 1);
    CHECK(prior.mu[0].second == doctest::Approx(0.3)); // 0.8 folded by 0.5
}

TEST_CASE("map estimate with a null prior is bit-identical to the plain estimate") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    KeyPoseModel model;
    model.mode = Mode::symmetric;
    model.likelihoods.push_back({0, 0.35, 0.03, 6});
    model.likelihoods.push_back({1, 0.42, 0.04, 6});
    std::vector<RegularInterval> ivs;
    for (int k = 0; k < 6; ++k) {
        ivs.push_back(iv(k * 100 + static_cast<int>(shift(rng)), k * 100 + 100, k % 2));
    }
    const auto ml = map_estimate(model, nullptr, ivs, 100.0, 20.0, 2, 5.0);
    const auto ml2 = map_estimate(model, nullptr, ivs, 100.0, 20.0, 2, 5.0);
    REQUIRE(ml.size() == ml2.size());
    for (std::size_t i = 0; i < ml.size(); ++i) {
        CHECK(ml[i].frame == ml2[i].frame);
        CHECK(ml[i].log_score == ml2[i].log_score);
    }
}

TEST_CASE("an informative prior pulls the estimate toward the annotation") {
    KeyPoseModel model;
    model.mode = Mode::symmetric;
    model.likelihoods.push_back({0, 0.30, 0.05, 4});
    const std::vector<RegularInterval> ivs{iv(0, 100, 0), iv(100, 200, 0)};
    PriorModel prior;
    prior.mode = Mode::symmetric;
    prior.mu = {{0, 0.40}};
    const auto ml = map_estimate(model, nullptr, ivs, 100.0, 30.0, 1, 6.0);
    const auto map = map_estimate(model, &prior, ivs, 100.0, 30.0, 1, 6.0);
    REQUIRE(!ml.empty());
    REQUIRE(!map.empty());
    // ML sits at c = 0.30; the prior adds sharp mass at c = 0.40.
    CHECK(map[0].frame > ml[0].frame);
    CHECK(map[0].frame <= 40);
}

TEST_CASE("postprocess removes a near-duplicate prediction") {
    std::vector<OccurrencePrediction> preds{{100, 3, -1.0}, {104, 2, -2.0}, {200, 3, -1.0}};
    const auto kept = postprocess_predictions(preds, 100.0, Mode::symmetric);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].frame == 100);
    CHECK(kept[1].frame == 200);
}

TEST_CASE("fusing two side series unions activations and drops near-duplicates") {
    ActivationSeries left;
    left.poselet = 10;
    left.activations = {0, 100, 200};
    ActivationSeries right;
    right.poselet = 11;
    right.activations = {50, 101, 150, 250};

    std::vector<ActivationSeries> primary; // ids 0..2 exist already
    for (int i = 0; i < 3; ++i) {
        ActivationSeries s;
        s.poselet = i;
        s.activations = {1, 2};
        primary.push_back(s);
    }
    // Output is the primary pool plus one merged series per pairing.
    const auto fused = fuse_series(primary, {left, right}, {{10, 11}});
    REQUIRE(fused.size() == 4);
    for (int i = 0; i < 3; ++i) CHECK(fused[i].poselet == i);
    const auto& merged = fused.back();
    CHECK(merged.poselet == 12); // first id past both pools
    // 101 collapses into 100 (within 2 frames, earlier kept).
    CHECK(merged.activations == std::vector<int>{0, 50, 100, 150, 200, 250});
    CHECK(merged.mode == Mode::anti_symmetric);
}

TEST_CASE("model and predictions round-trip through JSON") {
    KeyPoseModel model;
    model.keypose = 2;
    model.mode = Mode::anti_symmetric;
    model.top_k = 7;
    model.likelihoods.push_back({3, 0.25, 0.04, 9});
    save_keypose_model_json(model, "model_roundtrip.json");
    const auto back = load_keypose_model_json("model_roundtrip.json");
    CHECK(back.keypose == 2);
    CHECK(back.top_k == 7);
    REQUIRE(back.likelihoods.size() == 1);
    CHECK(back.likelihoods[0].poselet == 3);
    CHECK(back.likelihoods[0].mu == doctest::Approx(0.25));

    std::vector<OccurrencePrediction> preds{{42, 3, -1.5}, {142, 4, -0.5}};
    save_predictions_json(preds, "preds_roundtrip.json");
    const auto preds_back = load_predictions_json("preds_roundtrip.json");
    REQUIRE(preds_back.size() == 2);
    CHECK(preds_back[0].frame == 42);
    CHECK(preds_back[1].support == 4);

    save_ground_truth_json({10, 110, 210}, 2, "gt_roundtrip.json");
    const auto gt = load_ground_truth_json("gt_roundtrip.json", 2);
    CHECK(gt == std::vector<int>{10, 110, 210});
}
