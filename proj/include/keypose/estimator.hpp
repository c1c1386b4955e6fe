#pragma once

#include <optional>
#include <string>
#include <vector>

#include "keypose/activations.hpp"

namespace keypose {

/// Gaussian over the normalized occurrence coefficient c for one poselet.
struct PoseletLikelihood {
    int poselet = 0;
    double mu = 0.0;    // in (0, 1)
    double sigma = 0.0;
    int samples = 0;
};

struct KeyPoseModel {
    int keypose = 0;
    Mode mode = Mode::anti_symmetric;
    int top_k = 5;
    std::vector<PoseletLikelihood> likelihoods;
};

/// Built from a single expert annotation; the uncertainty is a fixed fraction
/// of the stroke length instead of a fitted deviation. May cover only the
/// poselets whose regular intervals enclose the annotation.
struct PriorModel {
    Mode mode = Mode::anti_symmetric;
    double sigma_frac = 0.04; // of f_stroke
    std::vector<std::pair<int, double>> mu; // (poselet, folded c)
};

struct Candidate {
    double mu_pos = 0.0;
    double sigma_pos = 0.0;
};

struct OccurrencePrediction {
    int frame = 0;
    int support = 0;
    double log_score = 0.0;
};

inline constexpr double kSigmaMin = 0.01;
inline constexpr double kDefaultSubwindowFrac = 0.2;
inline constexpr double kDefaultDensitySigmaFrac = 0.05;
inline constexpr int kDefaultMinSupport = 2;

/// Position of a ground truth inside a regular interval, normalized by the
/// interval length. Throws GroundTruthOutsideInterval.
double occurrence_coefficient(const RegularInterval& interval, double ground_truth);

/// Fit one Gaussian per poselet over the normalized coefficients of the
/// enclosed ground truths. An anti-symmetric interval encloses two ground
/// truths roughly half a stroke apart; the Gaussian is fitted on the smaller
/// coefficient of each pair and prediction later emits the folded second
/// candidate. Intervals enclosing the wrong number of ground truths are
/// skipped; poselets ending with fewer than two samples are omitted.
KeyPoseModel fit_likelihoods(const std::vector<RegularInterval>& intervals,
                             const std::vector<int>& ground_truth, Mode mode, int keypose = 0,
                             double sigma_min = kSigmaMin);

/// De-normalize each poselet's Gaussian into every regular interval of that
/// poselet. Anti-symmetric intervals also emit the folded candidate half an
/// interval later.
std::vector<Candidate> predict_candidates(const KeyPoseModel& model,
                                          const std::vector<RegularInterval>& intervals);

std::vector<Candidate> prior_candidates(const PriorModel& prior,
                                        const std::vector<RegularInterval>& intervals,
                                        double f_stroke);

/// Sum the candidate densities on the integer frame grid, smooth, and place a
/// subwindow at every local maximum; within each subwindow the occurrence is
/// the integer argmax of the summed log-densities of the enclosed candidates.
/// Subwindows holding fewer than min_support candidates are discarded.
std::vector<OccurrencePrediction> estimate_occurrences(const std::vector<Candidate>& candidates,
                                                       double subwindow_width, int min_support,
                                                       double density_sigma);

PriorModel build_prior(double annotation, const std::vector<RegularInterval>& intervals, Mode mode);

/// Pool ML and (optional) prior candidates into one occurrence estimation.
/// A null prior reduces to the plain ML estimate.
std::vector<OccurrencePrediction> map_estimate(const KeyPoseModel& model, const PriorModel* prior,
                                               const std::vector<RegularInterval>& intervals,
                                               double f_stroke, double subwindow_width,
                                               int min_support, double density_sigma);

/// Same greedy pruning rule used on single activation series, applied to the
/// key-pose prediction train.
std::vector<OccurrencePrediction> postprocess_predictions(
    const std::vector<OccurrencePrediction>& preds, double f_stroke, Mode mode,
    double min_frac = 0.5);

/// Condense pairs of per-side series from a second view into new series that
/// join the pool: sorted union of activations with near-duplicates (within 2
/// frames) collapsed.
std::vector<ActivationSeries> fuse_series(const std::vector<ActivationSeries>& primary,
                                          const std::vector<ActivationSeries>& secondary,
                                          const std::vector<std::pair<int, int>>& pairing);

void save_keypose_model_json(const KeyPoseModel& model, const std::string& path);
KeyPoseModel load_keypose_model_json(const std::string& path);
void save_predictions_json(const std::vector<OccurrencePrediction>& preds, const std::string& path,
                           const std::string& config_json = "");
std::vector<OccurrencePrediction> load_predictions_json(const std::string& path);
std::vector<int> load_ground_truth_json(const std::string& path, int keypose = -1);
void save_ground_truth_json(const std::vector<int>& frames, int keypose, const std::string& path);

} // namespace keypose
