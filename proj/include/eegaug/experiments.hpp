#pragma once

#include "eegaug/classifier.hpp"

#include <map>
#include <optional>
#include <string>

namespace eegaug {

enum class ExperimentKind { Fig3, Fig4, Fig5, TrainGan, RenderTfr };

struct PreprocessParams {
    double window_t0_s = 4.0;
    double window_t1_s = 9.0;
    double band_lo_hz = 7.0;
    double band_hi_hz = 15.0;
    int time_columns = 64;
};

struct ExperimentConfig {
    // Dataset source: a file path, or a synthetic spec when path is empty.
    std::string dataset_path;
    FileFormat dataset_format = FileFormat::Eegb;
    std::string test_path;  // optional separate test file
    SyntheticSpec synthetic = SyntheticSpec::default_motor_imagery();
    bool use_synthetic = true;

    PreprocessParams preprocess;
    GanConfig gan;
    ClfHyper clf;
    int reference_per_class = 70;
    int fig5_fixed_artificial = 70;
    std::vector<int> fig5_counts = {10, 20, 30, 40, 50, 60, 70};
    std::vector<double> fig4_multiples = {0.5, 1.0, 1.5, 2.0};
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out_dir = ".";

    void validate() const;
};

struct ResultRow {
    std::string experiment;
    std::string condition;
    uint64_t seed = 0;
    int n_raw_per_class = 0;
    int n_art_per_class = 0;
    double accuracy = 0.0;
};

/// Window, band-filter via CWT, and normalize a dataset into TFR samples.
std::vector<Tfr> preprocess_dataset(const Dataset& ds, const PreprocessParams& params,
                                    const MorletParams& morlet = MorletParams{});

std::vector<ResultRow> run_fig3(const ExperimentConfig& config);
std::vector<ResultRow> run_fig4(const ExperimentConfig& config);
std::vector<ResultRow> run_fig5(const ExperimentConfig& config);

void write_result_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Per-channel heatmaps; format from the extension (.pgm or .svg).
/// Rows run frequency-bottom-up, columns time; pixel block size = scale.
void render_tfr(const Tfr& sample, const std::string& path, int scale = 8);
/// Side-by-side raw/artificial SVG composition.
void render_tfr_pair(const Tfr& raw, const Tfr& artificial, const std::string& path,
                     int scale = 8);

// Plain key/value config files: `key = value`, '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);
ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);

/// FNV-1a over the raw bytes; result fingerprints in experiment outputs.
uint64_t fingerprint_bytes(const void* data, size_t n);
uint64_t fingerprint_tfrs(const std::vector<Tfr>& samples);
uint64_t fingerprint_params(const std::vector<Tensor>& params);

}  // namespace eegaug
