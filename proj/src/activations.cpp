#include "keypose/activations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace keypose {

Mode mode_from_string(const std::string& s) {
    if (s == "anti_symmetric" || s == "anti") return Mode::anti_symmetric;
    if (s == "symmetric" || s == "sym") return Mode::symmetric;
    throw InvalidSpec("unknown mode: " + s);
}

std::string mode_to_string(Mode m) {
    return m == Mode::anti_symmetric ? "anti_symmetric" : "symmetric";
}

std::vector<double> ScoreMatrix::column(int i) const {
    std::vector<double> col(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) col[static_cast<std::size_t>(t)] = at(t, i);
    return col;
}

std::vector<std::uint8_t> ScoreMatrix::column_missing(int i) const {
    std::vector<std::uint8_t> col(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t)
        col[static_cast<std::size_t>(t)] = missing[static_cast<std::size_t>(t) * poselets + i];
    return col;
}

namespace {

// Fill missing samples by linear interpolation, extending the nearest known
// value past the ends.
std::vector<double> interpolate_missing(const std::vector<double>& series,
                                        const std::vector<std::uint8_t>& missing) {
    std::vector<double> out = series;
    const int n = static_cast<int>(series.size());
    int prev = -1;
    for (int i = 0; i < n; ++i) {
        if (!missing[static_cast<std::size_t>(i)]) {
            if (prev < i - 1) {
                if (prev < 0) {
                    for (int j = 0; j < i; ++j) out[static_cast<std::size_t>(j)] = series[static_cast<std::size_t>(i)];
                } else {
                    const double a = series[static_cast<std::size_t>(prev)];
                    const double b = series[static_cast<std::size_t>(i)];
                    for (int j = prev + 1; j < i; ++j)
                        out[static_cast<std::size_t>(j)] =
                            a + (b - a) * static_cast<double>(j - prev) / static_cast<double>(i - prev);
                }
            }
            prev = i;
        }
    }
    if (prev < 0) {
        std::fill(out.begin(), out.end(), 0.0);
    } else if (prev < n - 1) {
        for (int j = prev + 1; j < n; ++j)
            out[static_cast<std::size_t>(j)] = series[static_cast<std::size_t>(prev)];
    }
    return out;
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

} // namespace

std::vector<double> smooth(const std::vector<double>& series, double sigma_frames,
                           const std::vector<std::uint8_t>* missing) {
    if (sigma_frames <= 0.0) throw InvalidSpec("sigma must be positive");
    std::vector<double> input = missing ? interpolate_missing(series, *missing) : series;
    const int n = static_cast<int>(input.size());
    if (n == 0) return input;

    const int radius = static_cast<int>(std::ceil(4.0 * sigma_frames));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i / sigma_frames) * (i / sigma_frames));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : kernel) v /= sum;

    std::vector<double> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
            acc += kernel[static_cast<std::size_t>(i + radius)] *
                   input[static_cast<std::size_t>(reflect_index(t + i, n))];
        out[static_cast<std::size_t>(t)] = acc;
    }
    return out;
}

ActivationSeries detect_activations(const std::vector<double>& series, int poselet, Mode mode) {
    ActivationSeries acts;
    acts.poselet = poselet;
    acts.mode = mode;
    const int n = static_cast<int>(series.size());
    int t = 1;
    while (t < n - 1) {
        if (series[static_cast<std::size_t>(t)] > series[static_cast<std::size_t>(t - 1)]) {
            int u = t;
            while (u + 1 < n && series[static_cast<std::size_t>(u + 1)] == series[static_cast<std::size_t>(t)]) ++u;
            if (u < n - 1 && series[static_cast<std::size_t>(u + 1)] < series[static_cast<std::size_t>(t)]) {
                acts.activations.push_back(t);
            }
            t = u + 1;
        } else {
            ++t;
        }
    }
    return acts;
}

namespace {

std::vector<double> stroke_intervals(const ActivationSeries& s) {
    std::vector<double> out;
    const auto& m = s.activations;
    if (s.mode == Mode::anti_symmetric) {
        for (std::size_t t = 1; t + 1 < m.size(); ++t)
            out.push_back(static_cast<double>(m[t + 1] - m[t - 1]));
    } else {
        for (std::size_t t = 0; t + 1 < m.size(); ++t)
            out.push_back(static_cast<double>(m[t + 1] - m[t]));
    }
    return out;
}

} // namespace

StrokeEstimate estimate_stroke_frequency(const std::vector<ActivationSeries>& acts,
                                         double window, double bin_width) {
    if (bin_width <= 0.0) throw InvalidSpec("bin_width must be positive");
    std::vector<double> intervals;
    for (const auto& s : acts) {
        const auto iv = stroke_intervals(s);
        for (double v : iv)
            if (window <= 0.0 || v <= window) intervals.push_back(v);
    }
    if (intervals.empty()) throw InsufficientActivations("no stroke intervals available");

    const double max_v = *std::max_element(intervals.begin(), intervals.end());
    const int bins = static_cast<int>(max_v / bin_width) + 1;
    std::vector<int> hist(static_cast<std::size_t>(bins), 0);
    for (double v : intervals) ++hist[static_cast<std::size_t>(v / bin_width)];

    int modal = 0;
    for (int b = 1; b < bins; ++b)
        if (hist[static_cast<std::size_t>(b)] > hist[static_cast<std::size_t>(modal)]) modal = b;

    double sum = 0.0;
    int count = 0;
    for (double v : intervals) {
        if (static_cast<int>(v / bin_width) == modal) {
            sum += v;
            ++count;
        }
    }

    StrokeEstimate est;
    est.f_stroke = sum / count;
    est.histogram = std::move(hist);
    est.bin_width = bin_width;
    est.window = window;
    return est;
}

std::vector<std::size_t> prune_event_indices(const std::vector<double>& times,
                                             double expected_gap, double min_frac) {
    std::vector<std::size_t> kept(times.size());
    std::iota(kept.begin(), kept.end(), std::size_t{0});

    auto total_error = [&](const std::vector<std::size_t>& idx) {
        double e = 0.0;
        for (std::size_t i = 1; i < idx.size(); ++i)
            e += std::abs(times[idx[i]] - times[idx[i - 1]] - expected_gap);
        return e;
    };

    while (kept.size() >= 2) {
        // Smallest offending gap first.
        std::size_t offend = kept.size(); // index into kept of the right pair member
        double smallest = expected_gap * min_frac;
        for (std::size_t i = 1; i < kept.size(); ++i) {
            const double gap = times[kept[i]] - times[kept[i - 1]];
            if (gap < smallest) {
                smallest = gap;
                offend = i;
            }
        }
        if (offend == kept.size()) break;

        std::vector<std::size_t> drop_left = kept;
        drop_left.erase(drop_left.begin() + static_cast<std::ptrdiff_t>(offend - 1));
        std::vector<std::size_t> drop_right = kept;
        drop_right.erase(drop_right.begin() + static_cast<std::ptrdiff_t>(offend));
        kept = total_error(drop_left) < total_error(drop_right) ? std::move(drop_left)
                                                                : std::move(drop_right);
    }
    return kept;
}

ActivationSeries prune_activations(const ActivationSeries& acts, double f_stroke, double min_frac) {
    const double expected = acts.mode == Mode::anti_symmetric ? f_stroke / 2.0 : f_stroke;
    std::vector<double> times(acts.activations.begin(), acts.activations.end());
    const auto kept = prune_event_indices(times, expected, min_frac);
    ActivationSeries out;
    out.poselet = acts.poselet;
    out.mode = acts.mode;
    out.activations.reserve(kept.size());
    for (std::size_t i : kept) out.activations.push_back(acts.activations[i]);
    return out;
}

std::vector<RegularInterval> regular_intervals(const ActivationSeries& acts, double f_stroke,
                                               double lambda) {
    std::vector<RegularInterval> out;
    const auto& m = acts.activations;
    if (acts.mode == Mode::anti_symmetric) {
        for (std::size_t t = 1; t + 1 < m.size(); ++t) {
            if (std::abs(static_cast<double>(m[t + 1] - m[t - 1]) - f_stroke) < lambda) {
                out.push_back({acts.poselet, m[t - 1], m[t + 1], m[t], true});
            }
        }
    } else {
        for (std::size_t t = 0; t + 1 < m.size(); ++t) {
            if (std::abs(static_cast<double>(m[t + 1] - m[t]) - f_stroke) < lambda) {
                out.push_back({acts.poselet, m[t], m[t + 1], 0, false});
            }
        }
    }
    return out;
}

std::vector<RegularInterval> drop_gapped_intervals(const std::vector<RegularInterval>& intervals,
                                                   const std::vector<std::uint8_t>& missing,
                                                   double max_missing_run) {
    // Long missing runs mean the series carries no signal there.
    std::vector<std::pair<int, int>> runs;
    int start = -1;
    const int n = static_cast<int>(missing.size());
    for (int i = 0; i <= n; ++i) {
        const bool miss = i < n && missing[static_cast<std::size_t>(i)] != 0;
        if (miss && start < 0) start = i;
        if (!miss && start >= 0) {
            if (i - start > max_missing_run) runs.emplace_back(start, i - 1);
            start = -1;
        }
    }
    std::vector<RegularInterval> out;
    for (const auto& iv : intervals) {
        bool gapped = false;
        for (const auto& [a, b] : runs)
            if (iv.start <= b && a <= iv.end) {
                gapped = true;
                break;
            }
        if (!gapped) out.push_back(iv);
    }
    return out;
}

double series_goodness(const ActivationSeries& s, double f_stroke) {
    const auto& m = s.activations;
    if (m.size() < 2) return std::numeric_limits<double>::infinity();
    const double expected = s.mode == Mode::anti_symmetric ? f_stroke / 2.0 : f_stroke;
    double err = 0.0;
    for (std::size_t i = 1; i < m.size(); ++i)
        err += std::abs(static_cast<double>(m[i] - m[i - 1]) - expected) / expected;
    err /= static_cast<double>(m.size() - 1);

    const double span = static_cast<double>(m.back() - m.front());
    const int expected_gaps = std::max(1, static_cast<int>(std::lround(span / expected)));
    const int missing = std::max(0, expected_gaps - static_cast<int>(m.size() - 1));
    return err + static_cast<double>(missing) / static_cast<double>(expected_gaps);
}

std::vector<std::pair<int, double>> goodness_rank(const std::vector<ActivationSeries>& all_series,
                                                  double f_stroke) {
    std::vector<std::pair<int, double>> out;
    out.reserve(all_series.size());
    for (const auto& s : all_series) out.emplace_back(s.poselet, series_goodness(s, f_stroke));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    return out;
}

ScoreMatrix load_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')); // poselet columns

    ScoreMatrix m;
    m.poselets = cols;
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ','); // frame index, implied by row order
        for (int c = 0; c < cols; ++c) {
            if (!std::getline(ss, field, ',')) field.clear();
            if (field.empty()) {
                values.push_back(0.0);
                missing.push_back(1);
            } else {
                values.push_back(std::stod(field));
                missing.push_back(0);
            }
        }
        ++m.frames;
    }
    m.values = std::move(values);
    m.missing = std::move(missing);
    return m;
}

void save_scores_csv(const ScoreMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "frame";
    for (int i = 1; i <= m.poselets; ++i) out << ",poselet_" << i;
    out << "\n";
    out.precision(17);
    for (int t = 0; t < m.frames; ++t) {
        out << t;
        for (int i = 0; i < m.poselets; ++i) {
            out << ",";
            if (!m.is_missing(t, i)) out << m.at(t, i);
        }
        out << "\n";
    }
}

void save_activations_json(const std::vector<ActivationSeries>& series,
                           const std::vector<std::pair<int, double>>& goodness, double f_stroke,
                           const std::string& path, const std::string& config_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : series) {
        nlohmann::json item;
        item["poselet"] = s.poselet;
        item["activations"] = s.activations;
        item["mode"] = mode_to_string(s.mode);
        for (const auto& [id, g] : goodness)
            if (id == s.poselet) {
                if (std::isfinite(g))
                    item["goodness"] = g;
                else
                    item["goodness"] = nullptr;
                break;
            }
        arr.push_back(std::move(item));
    }
    nlohmann::json doc;
    doc["series"] = arr;
    doc["f_stroke"] = f_stroke;
    if (!config_json.empty()) doc["config"] = nlohmann::json::parse(config_json);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

ActivationsFile load_activations_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    ActivationsFile f;
    f.f_stroke = doc.at("f_stroke").get<double>();
    for (const auto& item : doc.at("series")) {
        ActivationSeries s;
        s.poselet = item.at("poselet").get<int>();
        s.activations = item.at("activations").get<std::vector<int>>();
        s.mode = mode_from_string(item.at("mode").get<std::string>());
        f.series.push_back(std::move(s));
    }
    return f;
}

} // namespace keypose
