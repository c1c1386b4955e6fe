#include "keypose/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

namespace keypose {

namespace {

double log_normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

double occurrence_coefficient(const RegularInterval& interval, double ground_truth) {
    if (ground_truth < interval.start || ground_truth > interval.end)
        throw GroundTruthOutsideInterval("ground truth not enclosed by interval");
    return (ground_truth - interval.start) / static_cast<double>(interval.end - interval.start);
}

KeyPoseModel fit_likelihoods(const std::vector<RegularInterval>& intervals,
                             const std::vector<int>& ground_truth, Mode mode, int keypose,
                             double sigma_min) {
    std::map<int, std::vector<double>> samples; // poselet -> c values
    const int expected = mode == Mode::anti_symmetric ? 2 : 1;
    for (const auto& iv : intervals) {
        std::vector<double> cs;
        for (int g : ground_truth)
            if (g >= iv.start && g <= iv.end)
                cs.push_back(occurrence_coefficient(iv, g));
        if (static_cast<int>(cs.size()) != expected) continue;
        std::sort(cs.begin(), cs.end());
        samples[iv.poselet].push_back(cs.front());
    }

    KeyPoseModel model;
    model.keypose = keypose;
    model.mode = mode;
    for (const auto& [poselet, cs] : samples) {
        if (cs.size() < 2) continue;
        double mean = 0.0;
        for (double c : cs) mean += c;
        mean /= static_cast<double>(cs.size());
        double var = 0.0;
        for (double c : cs) var += (c - mean) * (c - mean);
        var /= static_cast<double>(cs.size() - 1);
        PoseletLikelihood lk;
        lk.poselet = poselet;
        lk.mu = mean;
        lk.sigma = std::max(std::sqrt(var), sigma_min);
        lk.samples = static_cast<int>(cs.size());
        model.likelihoods.push_back(lk);
    }
    if (model.likelihoods.empty())
        throw InsufficientSamples("no poselet accumulated at least 2 coefficient samples");
    return model;
}

std::vector<Candidate> predict_candidates(const KeyPoseModel& model,
                                          const std::vector<RegularInterval>& intervals) {
    std::vector<Candidate> out;
    for (const auto& iv : intervals) {
        const PoseletLikelihood* lk = nullptr;
        for (const auto& l : model.likelihoods)
            if (l.poselet == iv.poselet) {
                lk = &l;
                break;
            }
        if (!lk) continue;
        const double len = static_cast<double>(iv.end - iv.start);
        Candidate c;
        c.mu_pos = iv.start + lk->mu * len;
        c.sigma_pos = std::max(lk->sigma * len, 1e-6);
        out.push_back(c);
        if (model.mode == Mode::anti_symmetric)
            out.push_back({c.mu_pos + 0.5 * len, c.sigma_pos});
    }
    return out;
}

std::vector<Candidate> prior_candidates(const PriorModel& prior,
                                        const std::vector<RegularInterval>& intervals,
                                        double f_stroke) {
    std::vector<Candidate> out;
    const double sigma = std::max(prior.sigma_frac * f_stroke, 1e-6);
    for (const auto& iv : intervals) {
        const double* mu = nullptr;
        for (const auto& [poselet, m] : prior.mu)
            if (poselet == iv.poselet) {
                mu = &m;
                break;
            }
        if (!mu) continue;
        const double len = static_cast<double>(iv.end - iv.start);
        const double pos = iv.start + *mu * len;
        out.push_back({pos, sigma});
        if (prior.mode == Mode::anti_symmetric) out.push_back({pos + 0.5 * len, sigma});
    }
    return out;
}

std::vector<OccurrencePrediction> estimate_occurrences(const std::vector<Candidate>& candidates,
                                                       double subwindow_width, int min_support,
                                                       double density_sigma) {
    if (candidates.empty()) throw NoCandidates("no occurrence candidates");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        lo = std::min(lo, c.mu_pos - 4.0 * c.sigma_pos);
        hi = std::max(hi, c.mu_pos + 4.0 * c.sigma_pos);
    }
    const int grid_lo = static_cast<int>(std::floor(lo)) - 1;
    const int grid_hi = static_cast<int>(std::ceil(hi)) + 1;
    const int n = grid_hi - grid_lo + 1;

    std::vector<double> density(static_cast<std::size_t>(n), 0.0);
    for (const auto& c : candidates) {
        const int a = std::max(grid_lo, static_cast<int>(std::floor(c.mu_pos - 5.0 * c.sigma_pos)));
        const int b = std::min(grid_hi, static_cast<int>(std::ceil(c.mu_pos + 5.0 * c.sigma_pos)));
        for (int x = a; x <= b; ++x)
            density[static_cast<std::size_t>(x - grid_lo)] += normal_pdf(x, c.mu_pos, c.sigma_pos);
    }

    const std::vector<double> smoothed = smooth(density, std::max(density_sigma, 0.5));
    const ActivationSeries maxima = detect_activations(smoothed);

    std::vector<OccurrencePrediction> out;
    for (int m : maxima.activations) {
        const double center = m + grid_lo;
        const double half = subwindow_width / 2.0;
        std::vector<const Candidate*> members;
        for (const auto& c : candidates)
            if (c.mu_pos >= center - half && c.mu_pos <= center + half) members.push_back(&c);
        if (static_cast<int>(members.size()) < min_support) continue;

        const int xa = static_cast<int>(std::ceil(center - half));
        const int xb = static_cast<int>(std::floor(center + half));
        int best_x = xa;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int x = xa; x <= xb; ++x) {
            double v = 0.0;
            for (const Candidate* c : members) v += log_normal_pdf(x, c->mu_pos, c->sigma_pos);
            if (v > best_v) {
                best_v = v;
                best_x = x;
            }
        }
        OccurrencePrediction p;
        p.frame = best_x;
        p.support = static_cast<int>(members.size());
        p.log_score = best_v;
        if (out.empty() || out.back().frame != p.frame) out.push_back(p);
    }
    return out;
}

PriorModel build_prior(double annotation, const std::vector<RegularInterval>& intervals, Mode mode) {
    std::map<int, std::vector<double>> cs;
    for (const auto& iv : intervals) {
        if (annotation < iv.start || annotation > iv.end) continue;
        double c = occurrence_coefficient(iv, annotation);
        if (mode == Mode::anti_symmetric && c >= 0.5) c -= 0.5;
        cs[iv.poselet].push_back(c);
    }
    if (cs.empty()) throw AnnotationNotCovered("annotation lies inside no regular interval");

    PriorModel prior;
    prior.mode = mode;
    for (const auto& [poselet, vals] : cs) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        prior.mu.emplace_back(poselet, mean / static_cast<double>(vals.size()));
    }
    return prior;
}

std::vector<OccurrencePrediction> map_estimate(const KeyPoseModel& model, const PriorModel* prior,
                                               const std::vector<RegularInterval>& intervals,
                                               double f_stroke, double subwindow_width,
                                               int min_support, double density_sigma) {
    std::vector<Candidate> pool = predict_candidates(model, intervals);
    if (prior) {
        const auto pc = prior_candidates(*prior, intervals, f_stroke);
        pool.insert(pool.end(), pc.begin(), pc.end());
    }
    return estimate_occurrences(pool, subwindow_width, min_support, density_sigma);
}

std::vector<OccurrencePrediction> postprocess_predictions(
    const std::vector<OccurrencePrediction>& preds, double f_stroke, Mode mode, double min_frac) {
    const double expected = mode == Mode::anti_symmetric ? f_stroke / 2.0 : f_stroke;
    std::vector<OccurrencePrediction> sorted = preds;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.frame < b.frame; });
    std::vector<double> times;
    times.reserve(sorted.size());
    for (const auto& p : sorted) times.push_back(p.frame);
    const auto kept = prune_event_indices(times, expected, min_frac);
    std::vector<OccurrencePrediction> out;
    out.reserve(kept.size());
    for (std::size_t i : kept) out.push_back(sorted[i]);
    return out;
}

std::vector<ActivationSeries> fuse_series(const std::vector<ActivationSeries>& primary,
                                          const std::vector<ActivationSeries>& secondary,
                                          const std::vector<std::pair<int, int>>& pairing) {
    auto find = [](const std::vector<ActivationSeries>& pool, int id) -> const ActivationSeries* {
        for (const auto& s : pool)
            if (s.poselet == id) return &s;
        return nullptr;
    };

    int next_id = 0;
    for (const auto& s : primary) next_id = std::max(next_id, s.poselet + 1);
    for (const auto& s : secondary) next_id = std::max(next_id, s.poselet + 1);

    std::vector<ActivationSeries> out = primary;
    for (const auto& [ida, idb] : pairing) {
        const ActivationSeries* a = find(secondary, ida);
        const ActivationSeries* b = find(secondary, idb);
        if (!a || !b) throw MisalignedSeries("pairing references an unknown secondary series");

        std::vector<int> merged = a->activations;
        merged.insert(merged.end(), b->activations.begin(), b->activations.end());
        std::sort(merged.begin(), merged.end());
        std::vector<int> dedup;
        for (int f : merged) {
            if (!dedup.empty() && f - dedup.back() <= 2) continue;
            dedup.push_back(f);
        }

        ActivationSeries fused;
        fused.poselet = next_id++;
        fused.activations = std::move(dedup);
        // Two per-side series interleave, so the merged series peaks twice a
        // stroke like a side-view one.
        fused.mode = Mode::anti_symmetric;
        out.push_back(std::move(fused));
    }
    return out;
}

void save_keypose_model_json(const KeyPoseModel& model, const std::string& path) {
    nlohmann::json j;
    j["keypose"] = model.keypose;
    j["mode"] = mode_to_string(model.mode);
    j["top_k"] = model.top_k;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& lk : model.likelihoods)
        arr.push_back({{"poselet", lk.poselet}, {"mu", lk.mu}, {"sigma", lk.sigma}, {"n", lk.samples}});
    j["likelihoods"] = arr;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

KeyPoseModel load_keypose_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    KeyPoseModel m;
    m.keypose = j.at("keypose").get<int>();
    m.mode = mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("top_k")) m.top_k = j["top_k"].get<int>();
    for (const auto& lj : j.at("likelihoods")) {
        PoseletLikelihood lk;
        lk.poselet = lj.at("poselet").get<int>();
        lk.mu = lj.at("mu").get<double>();
        lk.sigma = lj.at("sigma").get<double>();
        lk.samples = lj.at("n").get<int>();
        m.likelihoods.push_back(lk);
    }
    return m;
}

void save_predictions_json(const std::vector<OccurrencePrediction>& preds, const std::string& path,
                           const std::string& config_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : preds)
        arr.push_back({{"frame", p.frame}, {"support", p.support}, {"logscore", p.log_score}});
    nlohmann::json doc;
    doc["predictions"] = arr;
    if (!config_json.empty()) doc["config"] = nlohmann::json::parse(config_json);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::vector<OccurrencePrediction> load_predictions_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    const nlohmann::json& arr = doc.is_array() ? doc : doc.at("predictions");
    std::vector<OccurrencePrediction> out;
    for (const auto& pj : arr) {
        OccurrencePrediction p;
        p.frame = pj.at("frame").get<int>();
        if (pj.contains("support")) p.support = pj["support"].get<int>();
        if (pj.contains("logscore")) p.log_score = pj["logscore"].get<double>();
        out.push_back(p);
    }
    return out;
}

std::vector<int> load_ground_truth_json(const std::string& path, int keypose) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json arr;
    in >> arr;
    std::vector<int> out;
    for (const auto& item : arr) {
        if (keypose >= 0 && item.contains("keypose") && item["keypose"].get<int>() != keypose)
            continue;
        out.push_back(item.at("frame").get<int>());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void save_ground_truth_json(const std::vector<int>& frames, int keypose, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (int f : frames) arr.push_back({{"keypose", keypose}, {"frame", f}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << arr.dump(2) << "\n";
}

} // namespace keypose
