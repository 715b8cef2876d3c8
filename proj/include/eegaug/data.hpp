#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegaug {

enum class Label : uint8_t { LeftHand = 0, RightHand = 1 };
enum class Split { Train, Test };
enum class Provenance : uint8_t { Raw = 0, Artificial = 1, Synthetic = 2 };

inline const char* label_name(Label l) {
    return l == Label::LeftHand ? "left" : "right";
}

/// One labeled multichannel EEG recording window, microvolts.
struct EegTrial {
    std::vector<std::string> channels;  // e.g. {"C3","Cz","C4"}
    Eigen::MatrixXd samples;            // channels x T
    double sample_rate_hz = 0.0;
    Label label = Label::LeftHand;
    uint32_t trial_id = 0;

    int n_channels() const { return static_cast<int>(samples.rows()); }
    long n_samples() const { return samples.cols(); }
    double duration_s() const { return n_samples() / sample_rate_hz; }

    void validate() const;
};

struct Dataset {
    std::vector<EegTrial> trials;
    Split split = Split::Train;
    Provenance provenance = Provenance::Raw;

    void validate() const;
    int count_label(Label l) const {
        return static_cast<int>(std::count_if(trials.begin(), trials.end(),
            [l](const EegTrial& t) { return t.label == l; }));
    }
};

/// Sinusoidal burst: frequency, amplitude, [on_start_s, on_end_s).
struct Burst {
    double frequency_hz = 10.0;
    double amplitude = 1.0;
    double on_start_s = 0.0;
    double on_end_s = 1e9;
};

/// Deterministic stand-in for the real recordings: per class, per channel,
/// additive bursts plus white Gaussian noise.
struct SyntheticSpec {
    int trials_per_class = 70;
    double sample_rate_hz = 128.0;
    double duration_s = 9.0;
    int n_channels = 3;
    // class_signatures[class][channel] -> bursts
    std::vector<std::vector<std::vector<Burst>>> class_signatures;
    double noise_sigma = 0.0;

    void validate() const;
    /// Contralateral alpha bursts, class-separable inside the 7-15 Hz band.
    static SyntheticSpec default_motor_imagery(int trials_per_class = 70,
                                               double noise_sigma = 0.5);
};

enum class FileFormat { Eegb, Csv };

Dataset load_dataset(const std::string& path, FileFormat format);
void store_dataset(const std::string& path, const Dataset& ds, FileFormat format);

/// Samples in [t0_s, t1_s) of one trial; length = round((t1-t0)*fs).
EegTrial extract_window(const EegTrial& trial, double t0_s, double t1_s);

Dataset synthesize_dataset(const SyntheticSpec& spec, uint64_t seed);

/// Per class: round(raw_fraction*reference) raw draws without replacement
/// plus round(artificial_multiple*reference) artificial draws; output order
/// shuffled deterministically by seed. Sample type only needs a .label.
template <typename S>
std::vector<S> mix_training_set(const std::vector<S>& raw, const std::vector<S>& artificial,
                                double raw_fraction, double artificial_multiple,
                                int reference_per_class, uint64_t seed) {
    if (raw_fraction < 0.0 || raw_fraction > 1.0)
        throw std::invalid_argument("mix_training_set: raw_fraction outside [0,1]");
    if (artificial_multiple < 0.0)
        throw std::invalid_argument("mix_training_set: negative artificial_multiple");
    if (reference_per_class <= 0)
        throw std::invalid_argument("mix_training_set: reference_per_class must be positive");

    const int n_raw = static_cast<int>(std::lround(raw_fraction * reference_per_class));
    const int n_art = static_cast<int>(std::lround(artificial_multiple * reference_per_class));
    std::mt19937_64 rng(seed);
    std::vector<S> out;

    for (Label cls : {Label::LeftHand, Label::RightHand}) {
        auto draw = [&](const std::vector<S>& pool, int want, const char* kind) {
            std::vector<int> idx;
            for (size_t i = 0; i < pool.size(); ++i)
                if (pool[i].label == cls) idx.push_back(static_cast<int>(i));
            if (static_cast<int>(idx.size()) < want)
                throw std::runtime_error(std::string("mix_training_set: class ") +
                                         label_name(cls) + " short of " + kind + " samples by " +
                                         std::to_string(want - static_cast<int>(idx.size())));
            std::shuffle(idx.begin(), idx.end(), rng);
            for (int k = 0; k < want; ++k) out.push_back(pool[idx[k]]);
        };
        draw(raw, n_raw, "raw");
        draw(artificial, n_art, "artificial");
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

}  // namespace eegaug
