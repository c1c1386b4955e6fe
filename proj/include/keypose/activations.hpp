#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "keypose/errors.hpp"

namespace keypose {

/// Two score peaks per stroke (side view of freestyle-like motion) vs one.
enum class Mode { anti_symmetric, symmetric };

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

/// T x n score matrix, column i is the time series of poselet i.
struct ScoreMatrix {
    int frames = 0;
    int poselets = 0;
    double frame_rate = 50.0;
    std::vector<double> values;       // [frame][poselet]
    std::vector<std::uint8_t> missing; // same layout, 1 = no placement

    double at(int t, int i) const { return values[static_cast<std::size_t>(t) * poselets + i]; }
    double& at(int t, int i) { return values[static_cast<std::size_t>(t) * poselets + i]; }
    bool is_missing(int t, int i) const {
        return missing[static_cast<std::size_t>(t) * poselets + i] != 0;
    }
    std::vector<double> column(int i) const;
    std::vector<std::uint8_t> column_missing(int i) const;
};

struct ActivationSeries {
    int poselet = 0;
    std::vector<int> activations; // strictly increasing frame indices
    Mode mode = Mode::anti_symmetric;
};

struct StrokeEstimate {
    double f_stroke = 0.0;     // frames per stroke
    std::vector<int> histogram;
    double bin_width = 0.0;
    double window = 0.0;
};

/// Span between alternate activations (anti-symmetric) or adjacent ones
/// (symmetric) whose length matches the stroke period within lambda.
struct RegularInterval {
    int poselet = 0;
    int start = 0;
    int end = 0;
    int mid = 0;       // enclosed activation, anti-symmetric mode only
    bool has_mid = false;
};

/// Gaussian smoothing, kernel truncated at +-4 sigma, reflected boundaries.
/// Missing samples are linearly interpolated before filtering.
std::vector<double> smooth(const std::vector<double>& series, double sigma_frames,
                           const std::vector<std::uint8_t>* missing = nullptr);

/// Strict local maxima; plateaus contribute their leftmost index, endpoints
/// are excluded.
ActivationSeries detect_activations(const std::vector<double>& series, int poselet = 0,
                                    Mode mode = Mode::anti_symmetric);

/// Modal bin of the stroke-interval histogram across all series, refined by
/// the mean of the intervals inside that bin. `window` caps usable interval
/// lengths (<= 0 disables the cap).
StrokeEstimate estimate_stroke_frequency(const std::vector<ActivationSeries>& acts,
                                         double window = 0.0, double bin_width = 4.0);

/// Greedy deletion of activations producing gaps much smaller than the
/// expected spacing; of each offending pair, the member whose removal leaves
/// the most regular spacing goes.
ActivationSeries prune_activations(const ActivationSeries& acts, double f_stroke,
                                   double min_frac = 0.5);

/// Kept indices after applying the pruning rule to arbitrary event times.
std::vector<std::size_t> prune_event_indices(const std::vector<double>& times,
                                             double expected_gap, double min_frac);

std::vector<RegularInterval> regular_intervals(const ActivationSeries& acts, double f_stroke,
                                               double lambda);

/// Drop intervals overlapping a run of missing frames longer than
/// max_missing_run.
std::vector<RegularInterval> drop_gapped_intervals(const std::vector<RegularInterval>& intervals,
                                                   const std::vector<std::uint8_t>& missing,
                                                   double max_missing_run);

/// Regularity score, ascending = better: mean normalized gap error plus the
/// fraction of expected activations that are absent over the spanned range.
/// Series with fewer than two activations rank last.
std::vector<std::pair<int, double>> goodness_rank(const std::vector<ActivationSeries>& all_series,
                                                  double f_stroke);

double series_goodness(const ActivationSeries& s, double f_stroke);

ScoreMatrix load_scores_csv(const std::string& path);
void save_scores_csv(const ScoreMatrix& m, const std::string& path);
void save_activations_json(const std::vector<ActivationSeries>& series,
                           const std::vector<std::pair<int, double>>& goodness, double f_stroke,
                           const std::string& path, const std::string& config_json = "");
struct ActivationsFile {
    std::vector<ActivationSeries> series;
    double f_stroke = 0.0;
};
ActivationsFile load_activations_json(const std::string& path);

} // namespace keypose
