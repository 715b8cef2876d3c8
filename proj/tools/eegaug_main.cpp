// eegaug: CWT preprocessing, cDCGAN augmentation, CNN classification, and
// the mixing-ratio experiment protocols, end to end from the command line.

#include "eegaug/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace eegaug;

namespace {

ExperimentConfig config_from(const std::string& config_path) {
    if (config_path.empty()) return ExperimentConfig{};
    return config_from_kv(parse_config_file(config_path));
}

FileFormat format_of(const std::string& path) {
    return path.size() > 4 && path.substr(path.size() - 4) == ".csv" ? FileFormat::Csv
                                                                     : FileFormat::Eegb;
}

void print_mean_sd(const std::vector<ResultRow>& rows) {
    std::map<std::string, std::vector<double>> by_cond;
    std::vector<std::string> order;
    for (const ResultRow& r : rows) {
        if (!by_cond.count(r.condition)) order.push_back(r.condition);
        by_cond[r.condition].push_back(r.accuracy);
    }
    for (const std::string& c : order) {
        const auto& v = by_cond[c];
        double mean = 0.0;
        for (double a : v) mean += a;
        mean /= v.size();
        double var = 0.0;
        for (double a : v) var += (a - mean) * (a - mean);
        const double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
        std::printf("%-24s %.4f +- %.4f  (n=%zu)\n", c.c_str(), mean, sd, v.size());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EEG motor-imagery augmentation pipeline"};
    app.require_subcommand(1);

    std::string in_path, out_path, config_path, log_path, gan_path, model_path;
    std::string label_str = "left", band = "", window = "", spec_path, kind;
    int count = 70, tcols = 0, index = 0, pair_index = -1, scale = 8, trials_per_class = -1;
    uint64_t seed = 0;
    bool seed_set = false;
    double noise_sigma = -1.0;

    auto* pre = app.add_subcommand("preprocess", "EEG trials -> normalized TFR archive");
    pre->add_option("--in", in_path, "input .eegb or .csv")->required();
    pre->add_option("--out", out_path, "output .tfrb")->required();
    pre->add_option("--band", band, "frequency band lo:hi (Hz)");
    pre->add_option("--window", window, "time window t0:t1 (s)");
    pre->add_option("--tcols", tcols, "TFR time columns");
    pre->add_option("--config", config_path, "config file");

    auto* tg = app.add_subcommand("train-gan", "train the conditional DCGAN on a TFR archive");
    tg->add_option("--in", in_path, "training .tfrb")->required();
    tg->add_option("--config", config_path, "config file");
    tg->add_option("--out", out_path, "generator checkpoint")->required();
    tg->add_option("--log", log_path, "per-iteration CSV log");
    tg->add_option("--seed", seed, "training seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* gn = app.add_subcommand("generate", "sample labeled artificial TFRs");
    gn->add_option("--gan", gan_path, "generator checkpoint")->required();
    gn->add_option("--label", label_str, "left|right")->required();
    gn->add_option("--count", count, "samples to generate")->required();
    gn->add_option("--seed", seed, "sampling seed");
    gn->add_option("--out", out_path, "output .tfrb")->required();

    auto* tc = app.add_subcommand("train-clf", "train the CNN classifier on a TFR archive");
    tc->add_option("--in", in_path, "training .tfrb")->required();
    tc->add_option("--config", config_path, "config file");
    tc->add_option("--out", out_path, "classifier checkpoint")->required();
    tc->add_option("--seed", seed, "training seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* ev = app.add_subcommand("eval", "evaluate a trained classifier");
    ev->add_option("--model", model_path, "classifier checkpoint")->required();
    ev->add_option("--in", in_path, "test .tfrb")->required();
    ev->add_option("--out", out_path, "metrics CSV (stdout if omitted)");

    auto* ex = app.add_subcommand("experiment", "run a fig3|fig4|fig5 protocol");
    ex->add_option("kind", kind, "fig3|fig4|fig5")->required();
    ex->add_option("--config", config_path, "config file");
    ex->add_option("--out", out_path, "output directory")->required();
    ex->add_option("--seed", seed, "single seed (overrides config seed list)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* rd = app.add_subcommand("render", "render TFR heatmaps");
    rd->add_option("--in", in_path, "input .tfrb")->required();
    rd->add_option("--index", index, "sample index")->required();
    rd->add_option("--pair", pair_index, "second sample for side-by-side SVG");
    rd->add_option("--scale", scale, "pixels per TFR cell");
    rd->add_option("--out", out_path, "output .pgm or .svg")->required();

    auto* sy = app.add_subcommand("synth", "write a synthetic EEG dataset");
    sy->add_option("--spec", spec_path, "config file with synthetic.* keys");
    sy->add_option("--trials-per-class", trials_per_class, "trials per class");
    sy->add_option("--noise", noise_sigma, "noise sigma");
    sy->add_option("--seed", seed, "generation seed");
    sy->add_option("--out", out_path, "output .eegb or .csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pre) {
            ExperimentConfig cfg = config_from(config_path);
            if (!band.empty()) {
                cfg.preprocess.band_lo_hz = std::stod(band.substr(0, band.find(':')));
                cfg.preprocess.band_hi_hz = std::stod(band.substr(band.find(':') + 1));
            }
            if (!window.empty()) {
                cfg.preprocess.window_t0_s = std::stod(window.substr(0, window.find(':')));
                cfg.preprocess.window_t1_s = std::stod(window.substr(window.find(':') + 1));
            }
            if (tcols > 0) cfg.preprocess.time_columns = tcols;
            const Dataset ds = load_dataset(in_path, format_of(in_path));
            store_tfr_archive(out_path, preprocess_dataset(ds, cfg.preprocess));
            std::printf("wrote %zu TFR samples to %s\n", ds.trials.size(), out_path.c_str());
        } else if (*tg) {
            ExperimentConfig cfg = config_from(config_path);
            if (seed_set) cfg.gan.seed = seed;
            const auto samples = load_tfr_archive(in_path);
            auto [gen, dis, log] = train_cdcgan(samples, cfg.gan);
            (void)dis;
            save_generator(out_path, gen);
            if (!log_path.empty()) log.write_csv(log_path);
            std::printf("trained %d iterations (%ld D updates, %ld G updates)\n",
                        cfg.gan.iterations, log.total_d_updates, log.total_g_updates);
        } else if (*gn) {
            if (label_str != "left" && label_str != "right")
                throw std::runtime_error("generate: label must be left or right");
            const GeneratorNet gen = load_generator(gan_path);
            const Label label = label_str == "left" ? Label::LeftHand : Label::RightHand;
            store_tfr_archive(out_path, generate_labeled(gen, label, count, seed));
            std::printf("wrote %d artificial samples to %s\n", count, out_path.c_str());
        } else if (*tc) {
            ExperimentConfig cfg = config_from(config_path);
            const auto samples = load_tfr_archive(in_path);
            if (samples.empty()) throw std::runtime_error("train-clf: empty archive");
            const std::vector<int> shape = {samples[0].n_channels(), samples[0].n_freqs(),
                                            samples[0].n_times()};
            const ClassifierModel model = train_classifier(
                samples, CnnArch::default_for(shape), cfg.clf, seed_set ? seed : cfg.gan.seed);
            save_classifier(out_path, model);
            std::printf("final training loss %.6f\n", model.epoch_losses.empty()
                                                          ? 0.0
                                                          : model.epoch_losses.back());
        } else if (*ev) {
            const auto samples = load_tfr_archive(in_path);
            if (samples.empty()) throw std::runtime_error("eval: empty archive");
            const std::vector<int> shape = {samples[0].n_channels(), samples[0].n_freqs(),
                                            samples[0].n_times()};
            const Metrics m = evaluate(load_classifier(model_path, shape), samples);
            char line[160];
            std::snprintf(line, sizeof line, "eval,0,%.10g,%.10g,%.10g,%ld\n", m.accuracy,
                          m.acc_left, m.acc_right, m.n_test);
            if (out_path.empty()) {
                std::printf("condition,seed,accuracy,acc_left,acc_right,n_test\n%s", line);
            } else {
                std::ofstream out(out_path);
                out << "condition,seed,accuracy,acc_left,acc_right,n_test\n" << line;
            }
        } else if (*ex) {
            ExperimentConfig cfg = config_from(config_path);
            cfg.out_dir = out_path;
            if (seed_set) cfg.seeds = {seed};
            std::filesystem::create_directories(cfg.out_dir);
            std::vector<ResultRow> rows;
            if (kind == "fig3") rows = run_fig3(cfg);
            else if (kind == "fig4") rows = run_fig4(cfg);
            else if (kind == "fig5") rows = run_fig5(cfg);
            else throw std::runtime_error("experiment: kind must be fig3, fig4 or fig5");
            write_result_csv(cfg.out_dir + "/" + kind + "_results.csv", rows);
            print_mean_sd(rows);
        } else if (*rd) {
            const auto samples = load_tfr_archive(in_path);
            if (index < 0 || index >= static_cast<int>(samples.size()))
                throw std::runtime_error("render: index out of range");
            if (pair_index >= 0) {
                if (pair_index >= static_cast<int>(samples.size()))
                    throw std::runtime_error("render: pair index out of range");
                render_tfr_pair(samples[index], samples[pair_index], out_path, scale);
            } else {
                render_tfr(samples[index], out_path, scale);
            }
        } else if (*sy) {
            SyntheticSpec spec = SyntheticSpec::default_motor_imagery();
            if (!spec_path.empty()) {
                const ExperimentConfig cfg = config_from_kv(parse_config_file(spec_path));
                spec = cfg.synthetic;
            }
            if (trials_per_class >= 0)
                spec = SyntheticSpec::default_motor_imagery(trials_per_class, spec.noise_sigma);
            if (noise_sigma >= 0.0)
                spec = SyntheticSpec::default_motor_imagery(spec.trials_per_class, noise_sigma);
            store_dataset(out_path, synthesize_dataset(spec, seed), format_of(out_path));
            std::printf("wrote %d trials to %s\n", 2 * spec.trials_per_class, out_path.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
