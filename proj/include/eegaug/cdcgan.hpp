#pragma once

#include "eegaug/adam.hpp"
#include "eegaug/net.hpp"
#include "eegaug/wavelet.hpp"

#include <utility>

namespace eegaug {

enum class GLossMode { Saturating, NonSaturating };

struct GanConfig {
    int noise_dim = 100;
    int class_count = 2;
    std::vector<int> tfr_shape = {3, 9, 64};  // channels, freqs, times
    int d_steps_per_g_step = 2;
    int batch_size = 16;
    int iterations = 5000;
    AdamHyper adam_g{2e-4, 0.5, 0.999, 1e-8};
    AdamHyper adam_d{2e-4, 0.5, 0.999, 1e-8};
    GLossMode g_loss_mode = GLossMode::NonSaturating;
    uint64_t seed = 0;

    void validate() const {
        if (noise_dim < 1 || class_count < 2 || d_steps_per_g_step < 1 ||
            batch_size < 1 || iterations < 0)
            throw std::invalid_argument("GanConfig: invalid field");
        if (tfr_shape.size() != 3 || tfr_shape[0] < 1 || tfr_shape[1] < 1 || tfr_shape[2] < 1)
            throw std::invalid_argument("GanConfig: tfr_shape must be 3 positive extents");
    }
};

/// Generator: one-hot label concatenated to the noise row, Tanh head.
struct GeneratorNet {
    Net net{std::vector<LayerSpec>{}};
    int noise_dim = 100;
    int class_count = 2;
    std::vector<int> tfr_shape = {3, 9, 64};
    std::vector<double> freqs_hz;  // axes stamped onto generated samples
    std::vector<double> times_s;
};

/// Discriminator: per-class constant planes appended as input channels,
/// single logit out.
struct DiscriminatorNet {
    Net net{std::vector<LayerSpec>{}};
    int class_count = 2;
    std::vector<int> tfr_shape = {3, 9, 64};
};

struct TrainLog {
    struct Row {
        long iteration;
        double d_loss;
        double g_loss;
        double d_accuracy;
    };
    std::vector<Row> rows;
    long total_d_updates = 0;
    long total_g_updates = 0;

    void write_csv(const std::string& path) const;
};

GeneratorNet make_generator(const GanConfig& config, std::mt19937_64& rng);
DiscriminatorNet make_discriminator(const GanConfig& config, std::mt19937_64& rng);

Tensor generator_forward(const Tensor& z, const std::vector<int>& labels,
                         const GeneratorNet& gen);
Tensor discriminator_forward(const Tensor& x, const std::vector<int>& labels,
                             const DiscriminatorNet& dis);

/// (loss_d, loss_g) from the two logit batches.
std::pair<double, double> gan_losses(const Tensor& d_real_logits,
                                     const Tensor& d_fake_logits, GLossMode mode);

std::tuple<GeneratorNet, DiscriminatorNet, TrainLog>
train_cdcgan(const std::vector<Tfr>& samples, const GanConfig& config);

std::vector<Tfr> generate_labeled(const GeneratorNet& gen, Label label, int count,
                                  uint64_t seed);

// Checkpoint round-trip; architecture metadata and TFR axes travel with the
// parameters so a generator is reconstructible from the file alone.
void save_generator(const std::string& path, const GeneratorNet& gen);
GeneratorNet load_generator(const std::string& path);

// Shared with classifier/experiments: batch of TFRs as [N, C, F, T].
Tensor tfr_batch_tensor(const std::vector<Tfr>& samples,
                        const std::vector<const Tfr*>* subset = nullptr);
std::vector<int> tfr_batch_labels(const std::vector<Tfr>& samples);

}  // namespace eegaug
