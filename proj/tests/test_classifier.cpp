#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eegaug/classifier.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace eegaug;

namespace {

// Separable toy corpus on a small grid: class 0 bright top row, class 1
// bright bottom row, plus deterministic jitter.
std::vector<Tfr> toy_corpus(int per_class, uint64_t seed, double jitter_amp = 0.1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-jitter_amp, jitter_amp);
    std::vector<Tfr> out;
    uint32_t id = 0;
    for (int cls = 0; cls < 2; ++cls)
        for (int k = 0; k < per_class; ++k) {
            Tfr s;
            s.freqs_hz = {7.0, 8.0, 9.0};
            s.times_s = {0.0, 1.0, 2.0, 3.0};
            s.label = static_cast<Label>(cls);
            s.trial_id = id++;
            Eigen::MatrixXd v = Eigen::MatrixXd::Constant(3, 4, -0.5);
            v.row(cls == 0 ? 0 : 2).setConstant(0.5);
            for (int f = 0; f < 3; ++f)
                for (int t = 0; t < 4; ++t) v(f, t) += jitter(rng);
            s.values = {v};
            out.push_back(std::move(s));
        }
    return out;
}

ClfHyper quick(int epochs) {
    ClfHyper h;
    h.epochs = epochs;
    h.batch_size = 8;
    return h;
}

}  // namespace

TEST_CASE("identical logits for identical rows in one batch") {
    const auto corpus = toy_corpus(2, 1);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel model = train_classifier(corpus, arch, quick(0), 3);

    std::vector<Tfr> twice = {corpus[0], corpus[0]};
    const Tensor logits = clf_forward(tfr_batch_tensor(twice), model);
    REQUIRE(logits.shape() == std::vector<int>{2, 2});
    CHECK(logits[0] == logits[2]);
    CHECK(logits[1] == logits[3]);
}

TEST_CASE("epochs 0 leaves the model at its seeded init, deterministically") {
    const auto corpus = toy_corpus(3, 2);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel a = train_classifier(corpus, arch, quick(0), 7);
    const ClassifierModel b = train_classifier(corpus, arch, quick(0), 7);
    CHECK(a.epoch_losses.empty());
    const Tensor la = clf_forward(tfr_batch_tensor(corpus), a);
    const Tensor lb = clf_forward(tfr_batch_tensor(corpus), b);
    CHECK((la.array() == lb.array()).all());

    const ClassifierModel c = train_classifier(corpus, arch, quick(0), 8);
    const Tensor lc = clf_forward(tfr_batch_tensor(corpus), c);
    CHECK((la.array() != lc.array()).any());
}

TEST_CASE("training rejects empty and single-class corpora") {
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    CHECK_THROWS_AS(train_classifier({}, arch, quick(1), 0), std::invalid_argument);
    auto one_class = toy_corpus(2, 1);
    one_class.resize(2);  // both class 0
    CHECK_THROWS_AS(train_classifier(one_class, arch, quick(1), 0), std::invalid_argument);
}

TEST_CASE("a separable toy corpus is learned to full accuracy") {
    const auto train = toy_corpus(16, 11);
    const auto test = toy_corpus(8, 99);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel model = train_classifier(train, arch, quick(30), 5);
    const Metrics m = evaluate(model, test);
    CHECK(m.accuracy == 1.0);
    CHECK(m.acc_left == 1.0);
    CHECK(m.acc_right == 1.0);
    CHECK(m.n_test == 16);
    CHECK(m.confusion[0][0] == 8);
    CHECK(m.confusion[1][1] == 8);
}

TEST_CASE("training loss trends downward on a learnable corpus") {
    const auto train = toy_corpus(16, 4);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel model = train_classifier(train, arch, quick(20), 6);
    REQUIRE(model.epoch_losses.size() == 20);
    // strict monotonicity is too brittle for SGD; require a clear drop and
    // mostly non-increasing epochs
    CHECK(model.epoch_losses.back() < 0.5 * model.epoch_losses.front());
    int non_increasing = 0;
    for (size_t i = 1; i < model.epoch_losses.size(); ++i)
        non_increasing += model.epoch_losses[i] <= model.epoch_losses[i - 1] + 1e-12;
    CHECK(non_increasing >= 16);  // >= 80% of steps
}

TEST_CASE("same seed gives bit-identical training") {
    const auto train = toy_corpus(8, 21);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel a = train_classifier(train, arch, quick(5), 13);
    const ClassifierModel b = train_classifier(train, arch, quick(5), 13);
    REQUIRE(a.epoch_losses.size() == b.epoch_losses.size());
    for (size_t i = 0; i < a.epoch_losses.size(); ++i)
        CHECK(a.epoch_losses[i] == b.epoch_losses[i]);
    const Tensor la = clf_forward(tfr_batch_tensor(train), a);
    const Tensor lb = clf_forward(tfr_batch_tensor(train), b);
    CHECK((la.array() == lb.array()).all());
}

TEST_CASE("evaluate contract: ties, permutation invariance, constant predictor") {
    const auto corpus = toy_corpus(4, 31);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    // untrained model with zeroed parameters emits all-zero logits:
    // every prediction ties and falls to class 0
    ClassifierModel zero = train_classifier(corpus, arch, quick(0), 1);
    for (Tensor& p : zero.net.params()) p.array().setZero();
    const Tensor logits = clf_forward(tfr_batch_tensor(corpus), zero);
    CHECK(logits.array().abs().maxCoeff() == 0.0);
    const Metrics m = evaluate(zero, corpus);
    CHECK(m.accuracy == 0.5);  // balanced corpus, everything predicted left
    CHECK(m.acc_left == 1.0);
    CHECK(m.acc_right == 0.0);

    // shuffling the test set cannot change aggregate metrics
    const ClassifierModel model = train_classifier(corpus, arch, quick(10), 2);
    auto shuffled = corpus;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
    const Metrics m1 = evaluate(model, corpus);
    const Metrics m2 = evaluate(model, shuffled);
    CHECK(m1.accuracy == m2.accuracy);
    CHECK(m1.confusion[0][0] == m2.confusion[0][0]);
    CHECK(m1.confusion[1][1] == m2.confusion[1][1]);

    CHECK_THROWS_AS(evaluate(model, {}), std::invalid_argument);
}

TEST_CASE("predictions are invariant to a common logit shift") {
    // argmax semantics only: adding the same constant to both output biases
    // must not change any prediction
    const auto corpus = toy_corpus(6, 41);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    ClassifierModel model = train_classifier(corpus, arch, quick(8), 3);
    const Metrics before = evaluate(model, corpus);
    Tensor& out_bias = model.net.params().back();
    REQUIRE(out_bias.shape() == std::vector<int>{2});
    out_bias.array() += 17.5;
    const Metrics after = evaluate(model, corpus);
    CHECK(before.accuracy == after.accuracy);
    CHECK(before.confusion[0][1] == after.confusion[0][1]);
    CHECK(before.confusion[1][0] == after.confusion[1][0]);
}

TEST_CASE("standard-shape architecture trains a step and evaluates") {
    // 3x9x64 conv stack: one tiny smoke step to pin the shape contract
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Tfr> corpus;
    for (int cls = 0; cls < 2; ++cls)
        for (int k = 0; k < 4; ++k) {
            Tfr s;
            for (int f = 7; f <= 15; ++f) s.freqs_hz.push_back(f);
            for (int t = 0; t < 64; ++t) s.times_s.push_back(t / 12.8);
            s.label = static_cast<Label>(cls);
            s.trial_id = cls * 4 + k;
            for (int c = 0; c < 3; ++c) {
                Eigen::MatrixXd v(9, 64);
                for (int f = 0; f < 9; ++f)
                    for (int t = 0; t < 64; ++t)
                        v(f, t) = 0.5 * dist(rng) + (cls == 0 ? 0.3 : -0.3);
                s.values.push_back(std::move(v));
            }
            corpus.push_back(std::move(s));
        }
    const CnnArch arch = CnnArch::default_for({3, 9, 64});
    ClfHyper h;
    h.epochs = 1;
    const ClassifierModel model = train_classifier(corpus, arch, h, 1);
    CHECK(model.epoch_losses.size() == 1);
    CHECK(std::isfinite(model.epoch_losses[0]));
    const Metrics m = evaluate(model, corpus);
    CHECK(m.n_test == 8);
}

TEST_CASE("classifier checkpoint round-trips bit-exactly") {
    const auto corpus = toy_corpus(4, 51);
    const CnnArch arch = CnnArch::default_for({1, 3, 4});
    const ClassifierModel model = train_classifier(corpus, arch, quick(5), 4);
    const std::string path =
        (std::filesystem::temp_directory_path() / "clf.ckpt").string();
    save_classifier(path, model);
    const ClassifierModel back = load_classifier(path, {1, 3, 4});
    const Tensor la = clf_forward(tfr_batch_tensor(corpus), model);
    const Tensor lb = clf_forward(tfr_batch_tensor(corpus), back);
    CHECK((la.array() == lb.array()).all());
}
