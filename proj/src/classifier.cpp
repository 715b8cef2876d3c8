#include "eegaug/classifier.hpp"

#include <numeric>

namespace eegaug {

CnnArch CnnArch::default_for(const std::vector<int>& tfr_shape) {
    CnnArch arch;
    if (tfr_shape == std::vector<int>{3, 9, 64}) {
        arch.layers = {Conv2dLayer{16, 3, 5, 1, 1, 0, 0},
                       ActLayer{Activation::Relu},
                       MaxPoolLayer{1, 2},
                       Conv2dLayer{32, 3, 5, 1, 1, 0, 0},
                       ActLayer{Activation::Relu},
                       MaxPoolLayer{1, 2},
                       FlattenLayer{},
                       DenseLayer{64},
                       ActLayer{Activation::Relu},
                       DenseLayer{2}};
    } else {
        arch.layers = {FlattenLayer{}, DenseLayer{32}, ActLayer{Activation::Relu},
                       DenseLayer{2}};
    }
    return arch;
}

Tensor clf_forward(const Tensor& x, const ClassifierModel& model) {
    if (x.rank() != 4 || x.shape()[1] != model.tfr_shape[0] ||
        x.shape()[2] != model.tfr_shape[1] || x.shape()[3] != model.tfr_shape[2])
        throw std::invalid_argument("clf_forward: input shape " + x.shape_str() +
                                    " does not match TFR shape");
    Tape tape;
    const int x_id = tape.input(x);
    return tape.value(model.net.forward(tape, x_id, nullptr, false));
}

ClassifierModel train_classifier(const std::vector<Tfr>& train, const CnnArch& arch,
                                 const ClfHyper& hyper, uint64_t seed) {
    if (train.empty()) throw std::invalid_argument("train_classifier: no samples");
    int per_class[2] = {0, 0};
    for (const Tfr& s : train) ++per_class[static_cast<int>(s.label) & 1];
    if (per_class[0] == 0 || per_class[1] == 0)
        throw std::invalid_argument("train_classifier: a class has no samples");

    ClassifierModel model;
    model.tfr_shape = {train[0].n_channels(), train[0].n_freqs(), train[0].n_times()};
    model.net = Net(arch.layers, "clf");
    std::mt19937_64 rng(seed);
    model.net.init(model.tfr_shape, rng);
    AdamState state = AdamState::make(model.net.params(), AdamHyper{hyper.lr, 0.9, 0.999, 1e-8});

    const int n = static_cast<int>(train.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n; start += hyper.batch_size) {
            const int b = std::min(hyper.batch_size, n - start);
            std::vector<const Tfr*> ptrs;
            std::vector<int> labels;
            for (int i = 0; i < b; ++i) {
                ptrs.push_back(&train[order[start + i]]);
                labels.push_back(static_cast<int>(train[order[start + i]].label));
            }
            Tape tape;
            std::vector<int> pids;
            const int x_id = tape.input(tfr_batch_tensor(train, &ptrs));
            const int logits = model.net.forward(tape, x_id, &pids, true);
            const int loss = softmax_cross_entropy(tape, logits, labels);
            const double lv = tape.value(loss)[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train_classifier: non-finite loss at epoch " +
                                         std::to_string(epoch));
            tape.backward(loss);
            std::vector<Tensor> grads;
            for (int id : pids) grads.push_back(tape.grad(id));
            adam_step(model.net.params(), grads, state);
            epoch_loss += lv;
            ++batches;
        }
        model.epoch_losses.push_back(epoch_loss / batches);
    }
    return model;
}

Metrics evaluate(const ClassifierModel& model, const std::vector<Tfr>& test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    const Tensor logits = clf_forward(tfr_batch_tensor(test), model);
    Metrics m;
    m.n_test = static_cast<long>(test.size());
    for (size_t i = 0; i < test.size(); ++i) {
        const int truth = static_cast<int>(test[i].label);
        // Ties break toward the lower class index.
        const int pred = logits[i * 2 + 1] > logits[i * 2] ? 1 : 0;
        ++m.confusion[truth][pred];
    }
    const long nl = m.confusion[0][0] + m.confusion[0][1];
    const long nr = m.confusion[1][0] + m.confusion[1][1];
    m.accuracy = static_cast<double>(m.confusion[0][0] + m.confusion[1][1]) / m.n_test;
    m.acc_left = nl ? static_cast<double>(m.confusion[0][0]) / nl : 0.0;
    m.acc_right = nr ? static_cast<double>(m.confusion[1][1]) / nr : 0.0;
    return m;
}

void save_classifier(const std::string& path, const ClassifierModel& model) {
    save_checkpoint(path, model.net.param_names(), model.net.params());
}

ClassifierModel load_classifier(const std::string& path, const std::vector<int>& tfr_shape) {
    ClassifierModel model;
    model.tfr_shape = tfr_shape;
    model.net = Net(CnnArch::default_for(tfr_shape).layers, "clf");
    std::mt19937_64 rng(0);
    model.net.init(tfr_shape, rng);
    auto entries = load_checkpoint(path);
    const auto& names = model.net.param_names();
    for (size_t i = 0; i < names.size(); ++i) {
        bool found = false;
        for (auto& [n, t] : entries)
            if (n == names[i]) {
                if (!t.same_shape(model.net.params()[i]))
                    throw std::runtime_error("load_classifier: shape mismatch for " + n);
                model.net.params()[i] = t;
                found = true;
            }
        if (!found)
            throw std::runtime_error("load_classifier: missing parameter " + names[i]);
    }
    return model;
}

}  // namespace eegaug
