#pragma once

#include <string>
#include <vector>

#include "keypose/errors.hpp"

namespace keypose {

struct MatchPair {
    int pred = 0;
    int gt = 0;
    double deviation_frames = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct RecallCurve {
    std::vector<double> grid;   // deviation thresholds, fraction of stroke length
    std::vector<double> recall;
    double precision = 1.0;
    bool no_predictions = false;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double f_stroke = 0.0;

    double recall_at(double x) const;
};

/// Greedy nearest-first one-to-one matching within the frame window; ties on
/// distance break toward the lower prediction frame. Unmatched predictions
/// count as FP, unmatched ground truths as FN.
MatchResult match(std::vector<int> preds, std::vector<int> gts, double window = 10.0);

/// recall(x) = fraction of ground truths matched with normalized deviation
/// <= x. Precision comes from the fixed-window match; with zero predictions
/// it is reported as 1.0 and flagged.
RecallCurve curve(const MatchResult& result, double f_stroke, const std::vector<double>& grid);

std::vector<double> default_deviation_grid();

void save_curve_csv(const RecallCurve& c, const std::string& path);
void save_summary_json(const RecallCurve& c, const std::string& path,
                       const std::string& config_json = "");

} // namespace keypose
