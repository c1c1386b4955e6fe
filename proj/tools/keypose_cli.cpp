// Subcommand front-end wiring the pipeline stages through files.
//
//   synth            generate a ground-truthed synthetic dataset
//   cluster          temporal k-means over joint configurations
//   train-detectors  train a linear filter from PGM patch directories
//   score            run a mixture over PGM frames, emit the descriptor CSV
//   activations      score CSV -> activation series + f_stroke
//   fit-keypose      activations + annotations -> key-pose model
//   predict          activations + model [-- prior annotation] -> predictions
//   evaluate         predictions vs ground truth -> curve + summary
//
// Every output embeds the configuration and seed that produced it.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "keypose/activations.hpp"
#include "keypose/estimator.hpp"
#include "keypose/eval.hpp"
#include "keypose/geometry.hpp"
#include "keypose/pictorial.hpp"
#include "keypose/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PipelineConfig {
    int cell_size = 8;
    int pyramid_levels = 3;
    double scale_step = 1.25;
    double gamma = 3.0;
    double smoothing_sigma = 2.0;
    double bin_width = 4.0;
    double lambda_frac = 0.1;
    double min_frac = 0.5;
    int top_k = 5;
    int min_support = 2;
    double subwindow_frac = 0.2;
    double density_sigma_frac = 0.05;
    std::string mode = "anti_symmetric";
    std::uint64_t seed = 0;

    json to_json() const {
        return json{{"cell_size", cell_size},
                    {"pyramid_levels", pyramid_levels},
                    {"scale_step", scale_step},
                    {"gamma", gamma},
                    {"smoothing_sigma", smoothing_sigma},
                    {"bin_width", bin_width},
                    {"lambda_frac", lambda_frac},
                    {"min_frac", min_frac},
                    {"top_k", top_k},
                    {"min_support", min_support},
                    {"subwindow_frac", subwindow_frac},
                    {"density_sigma_frac", density_sigma_frac},
                    {"mode", mode},
                    {"seed", seed}};
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw keypose::IoError("cannot open config file " + path);
        json j;
        in >> j;
        if (j.contains("cell_size")) cell_size = j["cell_size"];
        if (j.contains("pyramid_levels")) pyramid_levels = j["pyramid_levels"];
        if (j.contains("scale_step")) scale_step = j["scale_step"];
        if (j.contains("gamma")) gamma = j["gamma"];
        if (j.contains("smoothing_sigma")) smoothing_sigma = j["smoothing_sigma"];
        if (j.contains("bin_width")) bin_width = j["bin_width"];
        if (j.contains("lambda_frac")) lambda_frac = j["lambda_frac"];
        if (j.contains("min_frac")) min_frac = j["min_frac"];
        if (j.contains("top_k")) top_k = j["top_k"];
        if (j.contains("min_support")) min_support = j["min_support"];
        if (j.contains("subwindow_frac")) subwindow_frac = j["subwindow_frac"];
        if (j.contains("density_sigma_frac")) density_sigma_frac = j["density_sigma_frac"];
        if (j.contains("mode")) mode = j["mode"];
        if (j.contains("seed")) seed = j["seed"];
    }

    void validate() const {
        if (cell_size <= 0 || pyramid_levels <= 0 || scale_step <= 1.0 || gamma <= 0.0 ||
            smoothing_sigma <= 0.0 || bin_width <= 0.0 || lambda_frac <= 0.0 ||
            min_frac < 0.0 || top_k < 1 || min_support < 1 || subwindow_frac <= 0.0 ||
            density_sigma_frac <= 0.0)
            throw keypose::InvalidSpec("invalid pipeline configuration");
        keypose::mode_from_string(mode); // throws on bad value
    }
};

std::vector<keypose::ActivationSeries> pipeline_activations(const keypose::ScoreMatrix& scores,
                                                            const PipelineConfig& cfg) {
    const keypose::Mode mode = keypose::mode_from_string(cfg.mode);
    std::vector<keypose::ActivationSeries> series;
    for (int i = 0; i < scores.poselets; ++i) {
        const auto col_missing = scores.column_missing(i);
        const auto smoothed = keypose::smooth(scores.column(i), cfg.smoothing_sigma, &col_missing);
        series.push_back(keypose::detect_activations(smoothed, i, mode));
    }
    return series;
}

int run_synth(const PipelineConfig& cfg, const keypose::SyntheticMotionSpec& spec,
              const std::string& out_prefix, bool render, int canvas) {
    const keypose::SyntheticDataset ds = keypose::generate(spec);
    keypose::save_scores_csv(ds.scores, out_prefix + "_scores.csv");

    json gt;
    gt["config"] = cfg.to_json();
    gt["seed"] = spec.seed;
    gt["period"] = spec.period;
    gt["mode"] = keypose::mode_to_string(spec.mode);
    gt["activations"] = ds.gt_activations;
    gt["keyposes"] = json::array();
    for (std::size_t k = 0; k < ds.keypose_frames.size(); ++k)
        for (int f : ds.keypose_frames[k]) gt["keyposes"].push_back({{"keypose", static_cast<int>(k)}, {"frame", f}});
    std::ofstream out(out_prefix + "_truth.json");
    out << gt.dump(2) << "\n";

    if (render) {
        const keypose::RenderedDataset rd = keypose::render_frames(spec, canvas, canvas);
        for (std::size_t t = 0; t < rd.frames.size(); ++t) {
            std::ostringstream name;
            name << out_prefix << "_frame_" << t << ".pgm";
            keypose::save_pgm(rd.frames[t], name.str());
        }
        keypose::save_configurations_json(rd.left_arm, out_prefix + "_joints.json");
    }
    return 0;
}

std::vector<keypose::GrayImage> load_pgm_dir(const std::string& dir) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".pgm") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<keypose::GrayImage> imgs;
    for (const auto& p : paths) imgs.push_back(keypose::load_pgm(p.string()));
    if (imgs.empty()) throw keypose::IoError("no PGM files in " + dir);
    return imgs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"key-pose prediction pipeline for cyclic motion"};
    app.require_subcommand(1);

    PipelineConfig cfg;
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file; flags override its values");
    app.add_option("--cell-size", cfg.cell_size);
    app.add_option("--levels", cfg.pyramid_levels);
    app.add_option("--scale-step", cfg.scale_step);
    app.add_option("--gamma", cfg.gamma);
    app.add_option("--smoothing-sigma", cfg.smoothing_sigma);
    app.add_option("--bin-width", cfg.bin_width);
    app.add_option("--lambda-frac", cfg.lambda_frac);
    app.add_option("--min-frac", cfg.min_frac);
    app.add_option("--top-k", cfg.top_k);
    app.add_option("--min-support", cfg.min_support);
    app.add_option("--subwindow-frac", cfg.subwindow_frac);
    app.add_option("--density-sigma-frac", cfg.density_sigma_frac);
    app.add_option("--mode", cfg.mode, "anti_symmetric | symmetric");
    app.add_option("--seed", cfg.seed);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    keypose::SyntheticMotionSpec spec;
    std::string out_prefix = "synthetic";
    bool render = false;
    int canvas = 128;
    synth->add_option("--period", spec.period);
    synth->add_option("--n-poselets", spec.n_poselets);
    synth->add_option("--noise", spec.noise_sigma);
    synth->add_option("--dropout", spec.dropout_rate);
    synth->add_option("--spurious", spec.spurious_rate);
    synth->add_option("--jitter", spec.jitter_frames);
    synth->add_option("--duration", spec.duration);
    synth->add_option("--keypose-phases", spec.keypose_phases);
    synth->add_option("--out", out_prefix, "output path prefix");
    synth->add_flag("--render", render, "also render stick-figure PGM frames");
    synth->add_option("--canvas", canvas);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "temporal k-means over joint configurations");
    std::string cluster_in, cluster_out = "clusters.json";
    int k = 15;
    cluster->add_option("--input", cluster_in)->required();
    cluster->add_option("--k", k);
    cluster->add_option("--out", cluster_out);

    // train-detectors
    auto* train = app.add_subcommand("train-detectors", "train a linear filter from PGM patches");
    std::string pos_dir, neg_dir, filter_out = "filter.json";
    int epochs = 50;
    double lr = 0.05, reg = 1e-3;
    train->add_option("--positives", pos_dir)->required();
    train->add_option("--negatives", neg_dir)->required();
    train->add_option("--epochs", epochs);
    train->add_option("--lr", lr);
    train->add_option("--reg", reg);
    train->add_option("--out", filter_out);

    // score
    auto* score = app.add_subcommand("score", "score a mixture over PGM frames");
    std::string frames_dir, mixture_path, scores_out = "scores.csv";
    bool root_level_only = false;
    score->add_option("--frames", frames_dir)->required();
    score->add_option("--mixture", mixture_path)->required();
    score->add_option("--out", scores_out);
    score->add_flag("--root-level-only", root_level_only, "restrict parts to the root's level");

    // activations
    auto* acts_cmd = app.add_subcommand("activations", "extract activation series from a score CSV");
    std::string scores_in, acts_out = "activations.json";
    acts_cmd->add_option("--scores", scores_in)->required();
    acts_cmd->add_option("--out", acts_out);

    // fit-keypose
    auto* fit = app.add_subcommand("fit-keypose", "fit a key-pose model from annotations");
    std::string fit_acts, fit_gt, model_out = "model.json";
    int keypose_id = 0;
    fit->add_option("--activations", fit_acts)->required();
    fit->add_option("--ground-truth", fit_gt)->required();
    fit->add_option("--keypose", keypose_id);
    fit->add_option("--out", model_out);

    // predict
    auto* predict = app.add_subcommand("predict", "predict key-pose occurrences");
    std::string pred_acts, model_in, pred_out = "predictions.json";
    double prior_annotation = -1.0;
    bool no_postprocess = false;
    predict->add_option("--activations", pred_acts)->required();
    predict->add_option("--model", model_in)->required();
    predict->add_option("--prior-annotation", prior_annotation,
                        "single annotated frame used to build a prior (MAP)");
    predict->add_flag("--no-postprocess", no_postprocess);
    predict->add_option("--out", pred_out);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "match predictions against ground truth");
    std::string eval_preds, eval_gt, summary_out = "summary.json", curve_out = "curve.csv";
    double match_window = 10.0, eval_f_stroke = 0.0;
    int eval_keypose = -1;
    evaluate->add_option("--predictions", eval_preds)->required();
    evaluate->add_option("--ground-truth", eval_gt)->required();
    evaluate->add_option("--f-stroke", eval_f_stroke)->required();
    evaluate->add_option("--window", match_window);
    evaluate->add_option("--keypose", eval_keypose);
    evaluate->add_option("--summary", summary_out);
    evaluate->add_option("--curve", curve_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) {
            PipelineConfig from_file;
            from_file.load_file(config_file);
            // Flags given on the command line win over the file.
            PipelineConfig defaults;
            auto pick = [&](auto& dst, const auto& flag_val, const auto& default_val,
                            const auto& file_val) { dst = flag_val != default_val ? flag_val : file_val; };
            pick(cfg.cell_size, cfg.cell_size, defaults.cell_size, from_file.cell_size);
            pick(cfg.pyramid_levels, cfg.pyramid_levels, defaults.pyramid_levels, from_file.pyramid_levels);
            pick(cfg.scale_step, cfg.scale_step, defaults.scale_step, from_file.scale_step);
            pick(cfg.gamma, cfg.gamma, defaults.gamma, from_file.gamma);
            pick(cfg.smoothing_sigma, cfg.smoothing_sigma, defaults.smoothing_sigma, from_file.smoothing_sigma);
            pick(cfg.bin_width, cfg.bin_width, defaults.bin_width, from_file.bin_width);
            pick(cfg.lambda_frac, cfg.lambda_frac, defaults.lambda_frac, from_file.lambda_frac);
            pick(cfg.min_frac, cfg.min_frac, defaults.min_frac, from_file.min_frac);
            pick(cfg.top_k, cfg.top_k, defaults.top_k, from_file.top_k);
            pick(cfg.min_support, cfg.min_support, defaults.min_support, from_file.min_support);
            pick(cfg.subwindow_frac, cfg.subwindow_frac, defaults.subwindow_frac, from_file.subwindow_frac);
            pick(cfg.density_sigma_frac, cfg.density_sigma_frac, defaults.density_sigma_frac,
                 from_file.density_sigma_frac);
            pick(cfg.mode, cfg.mode, defaults.mode, from_file.mode);
            pick(cfg.seed, cfg.seed, defaults.seed, from_file.seed);
        }
        cfg.validate();
        const std::string cfg_json = cfg.to_json().dump();
        const keypose::Mode mode = keypose::mode_from_string(cfg.mode);

        if (synth->parsed()) {
            spec.mode = mode;
            spec.seed = cfg.seed;
            return run_synth(cfg, spec, out_prefix, render, canvas);
        }

        if (cluster->parsed()) {
            const auto configs = keypose::load_configurations_json(cluster_in);
            auto clusters = keypose::kmeans_temporal(configs, k, cfg.seed);
            // Report members as frame ids.
            for (auto& cl : clusters)
                for (auto& m : cl.members) m = configs[static_cast<std::size_t>(m)].frame_index;
            keypose::save_clusters_json(clusters, cluster_out, cfg_json);
            return 0;
        }

        if (train->parsed()) {
            std::vector<keypose::FeatureGrid> pos, neg;
            for (const auto& img : load_pgm_dir(pos_dir))
                pos.push_back(keypose::extract_features(img, cfg.cell_size));
            for (const auto& img : load_pgm_dir(neg_dir))
                neg.push_back(keypose::extract_features(img, cfg.cell_size));
            const auto r = keypose::train_linear_filter(pos, neg, epochs, lr, reg, cfg.seed);
            keypose::save_filter_json(r.filter, filter_out);
            std::cout << "training accuracy: " << r.accuracy << "\n";
            return 0;
        }

        if (score->parsed()) {
            const auto mixture = keypose::load_mixture_json(mixture_path);
            std::vector<keypose::FrameDescriptor> descriptors;
            int frame = 0;
            for (const auto& img : load_pgm_dir(frames_dir)) {
                const auto pyr = keypose::build_pyramid(img, cfg.pyramid_levels, cfg.scale_step,
                                                        cfg.cell_size);
                descriptors.push_back(
                    keypose::frame_descriptor(mixture, pyr, frame++, root_level_only));
            }
            keypose::save_descriptors_csv(descriptors, scores_out);
            return 0;
        }

        if (acts_cmd->parsed()) {
            const auto scores_m = keypose::load_scores_csv(scores_in);
            auto series = pipeline_activations(scores_m, cfg);
            const auto est = keypose::estimate_stroke_frequency(series, 0.0, cfg.bin_width);
            for (auto& s : series) s = keypose::prune_activations(s, est.f_stroke, cfg.min_frac);
            const auto ranked = keypose::goodness_rank(series, est.f_stroke);
            keypose::save_activations_json(series, ranked, est.f_stroke, acts_out, cfg_json);
            return 0;
        }

        if (fit->parsed()) {
            const auto acts = keypose::load_activations_json(fit_acts);
            const auto gts = keypose::load_ground_truth_json(fit_gt, keypose_id);
            std::vector<keypose::RegularInterval> intervals;
            for (const auto& s : acts.series) {
                const auto iv = keypose::regular_intervals(s, acts.f_stroke,
                                                           cfg.lambda_frac * acts.f_stroke);
                intervals.insert(intervals.end(), iv.begin(), iv.end());
            }
            auto model = keypose::fit_likelihoods(intervals, gts, mode, keypose_id);
            model.top_k = cfg.top_k;
            keypose::save_keypose_model_json(model, model_out);
            return 0;
        }

        if (predict->parsed()) {
            const auto acts = keypose::load_activations_json(pred_acts);
            const auto model = keypose::load_keypose_model_json(model_in);
            const auto ranked = keypose::goodness_rank(acts.series, acts.f_stroke);

            std::vector<keypose::RegularInterval> intervals;
            int used = 0;
            for (const auto& [poselet, goodness] : ranked) {
                if (used >= model.top_k) break;
                for (const auto& s : acts.series) {
                    if (s.poselet != poselet) continue;
                    const auto iv = keypose::regular_intervals(s, acts.f_stroke,
                                                               cfg.lambda_frac * acts.f_stroke);
                    intervals.insert(intervals.end(), iv.begin(), iv.end());
                }
                ++used;
            }

            keypose::PriorModel prior;
            const bool use_prior = prior_annotation >= 0.0;
            if (use_prior) prior = keypose::build_prior(prior_annotation, intervals, model.mode);

            auto preds = keypose::map_estimate(model, use_prior ? &prior : nullptr, intervals,
                                               acts.f_stroke, cfg.subwindow_frac * acts.f_stroke,
                                               cfg.min_support,
                                               cfg.density_sigma_frac * acts.f_stroke);
            if (!no_postprocess)
                preds = keypose::postprocess_predictions(preds, acts.f_stroke, model.mode,
                                                         cfg.min_frac);
            keypose::save_predictions_json(preds, pred_out, cfg_json);
            return 0;
        }

        if (evaluate->parsed()) {
            const auto preds = keypose::load_predictions_json(eval_preds);
            const auto gts = keypose::load_ground_truth_json(eval_gt, eval_keypose);
            std::vector<int> pred_frames;
            for (const auto& p : preds) pred_frames.push_back(p.frame);
            const auto result = keypose::match(pred_frames, gts, match_window);
            const auto c = keypose::curve(result, eval_f_stroke, keypose::default_deviation_grid());
            keypose::save_curve_csv(c, curve_out);
            keypose::save_summary_json(c, summary_out, cfg_json);
            return 0;
        }
    } catch (const keypose::KeyposeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
