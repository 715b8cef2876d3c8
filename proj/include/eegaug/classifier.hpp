#pragma once

#include "eegaug/adam.hpp"
#include "eegaug/cdcgan.hpp"
#include "eegaug/net.hpp"
#include "eegaug/wavelet.hpp"

namespace eegaug {

/// CNN layer plan for the 2-class TFR classifier.
struct CnnArch {
    std::vector<LayerSpec> layers;
    int class_count = 2;

    /// conv(16,k3x5) relu pool(1x2) conv(32,k3x5) relu pool(1x2) dense64 relu dense2.
    /// Pooling only along time; the frequency axis has just 9 rows.
    static CnnArch default_for(const std::vector<int>& tfr_shape);
};

struct ClfHyper {
    double lr = 1e-3;
    int batch_size = 16;
    int epochs = 60;
};

struct Metrics {
    double accuracy = 0.0;
    double acc_left = 0.0;
    double acc_right = 0.0;
    long confusion[2][2] = {{0, 0}, {0, 0}};  // [true][predicted]
    long n_test = 0;
};

struct ClassifierModel {
    Net net{std::vector<LayerSpec>{}};
    std::vector<int> tfr_shape = {3, 9, 64};
    std::vector<double> epoch_losses;  // mean training loss per epoch
};

Tensor clf_forward(const Tensor& x, const ClassifierModel& model);

ClassifierModel train_classifier(const std::vector<Tfr>& train, const CnnArch& arch,
                                 const ClfHyper& hyper, uint64_t seed);

Metrics evaluate(const ClassifierModel& model, const std::vector<Tfr>& test);

void save_classifier(const std::string& path, const ClassifierModel& model);
ClassifierModel load_classifier(const std::string& path, const std::vector<int>& tfr_shape);

}  // namespace eegaug
