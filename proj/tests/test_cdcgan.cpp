#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eegaug/cdcgan.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace eegaug;

namespace {

GanConfig toy_config(uint64_t seed = 1) {
    GanConfig c;
    c.noise_dim = 8;
    c.tfr_shape = {1, 2, 2};
    c.batch_size = 8;
    c.iterations = 0;
    c.seed = seed;
    return c;
}

// Toy corpus: class 0 lives near +level, class 1 near -level, with
// deterministic jitter keeping every value inside [-1,1].
std::vector<Tfr> toy_samples(int per_class, double level = 0.6, uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::vector<Tfr> out;
    uint32_t id = 0;
    for (int cls = 0; cls < 2; ++cls)
        for (int k = 0; k < per_class; ++k) {
            Tfr s;
            s.freqs_hz = {7.0, 8.0};
            s.times_s = {0.0, 1.0};
            s.label = static_cast<Label>(cls);
            s.trial_id = id++;
            s.normalization = TfrNorm::UnitRange;
            Eigen::MatrixXd v(2, 2);
            const double sign = cls == 0 ? 1.0 : -1.0;
            for (int f = 0; f < 2; ++f)
                for (int t = 0; t < 2; ++t) v(f, t) = sign * level + jitter(rng);
            s.values = {v};
            out.push_back(std::move(s));
        }
    return out;
}

Tensor random_noise(int n, int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tensor z({n, dim});
    for (long i = 0; i < z.size(); ++i) z[i] = gauss(rng);
    return z;
}

double mean_value(const Tfr& s) {
    double acc = 0.0;
    long n = 0;
    for (const auto& v : s.values) {
        acc += v.sum();
        n += v.size();
    }
    return acc / n;
}

}  // namespace

TEST_CASE("generator output shape, range, and label conditioning") {
    const GanConfig c = toy_config();
    std::mt19937_64 rng(3);
    const GeneratorNet gen = make_generator(c, rng);
    const Tensor z = random_noise(4, c.noise_dim, 11);
    const Tensor x0 = generator_forward(z, {0, 0, 0, 0}, gen);
    CHECK(x0.shape() == std::vector<int>{4, 1, 2, 2});
    for (long i = 0; i < x0.size(); ++i) {
        CHECK(x0[i] > -1.0);
        CHECK(x0[i] < 1.0);  // Tanh head
    }
    // same noise, different label -> different sample
    const Tensor x1 = generator_forward(z, {1, 1, 1, 1}, gen);
    CHECK((x0.array() - x1.array()).abs().maxCoeff() > 1e-8);

    CHECK_THROWS_AS(generator_forward(z, {0, 0}, gen), std::invalid_argument);
    CHECK_THROWS_AS(generator_forward(z, {0, 0, 0, 2}, gen), std::invalid_argument);
}

TEST_CASE("generator rows are batch-independent and permutation-equivariant") {
    const GanConfig c = toy_config();
    std::mt19937_64 rng(5);
    const GeneratorNet gen = make_generator(c, rng);
    const Tensor z = random_noise(3, c.noise_dim, 21);
    const Tensor batch = generator_forward(z, {0, 1, 0}, gen);
    const long per = batch.size() / 3;
    for (int n = 0; n < 3; ++n) {
        Tensor zn({1, c.noise_dim});
        for (int i = 0; i < c.noise_dim; ++i) zn[i] = z[n * c.noise_dim + i];
        const Tensor one = generator_forward(zn, {n == 1 ? 1 : 0}, gen);
        for (long i = 0; i < per; ++i)
            CHECK(one[i] == doctest::Approx(batch[n * per + i]).epsilon(1e-12));
    }
}

TEST_CASE("discriminator logits are finite and label-sensitive") {
    const GanConfig c = toy_config();
    std::mt19937_64 rng(7);
    const DiscriminatorNet dis = make_discriminator(c, rng);
    Tensor x({2, 1, 2, 2});
    for (long i = 0; i < x.size(); ++i) x[i] = 0.3 * std::sin(1.0 + i);
    const Tensor l0 = discriminator_forward(x, {0, 0}, dis);
    CHECK(l0.shape() == std::vector<int>{2});
    for (long i = 0; i < l0.size(); ++i) CHECK(std::abs(l0[i]) < 50.0);
    const Tensor l1 = discriminator_forward(x, {1, 1}, dis);
    CHECK((l0.array() - l1.array()).abs().maxCoeff() > 1e-10);

    CHECK_THROWS_AS(discriminator_forward(x, {0}, dis), std::invalid_argument);
    Tensor bad({2, 2, 2, 2});
    CHECK_THROWS_AS(discriminator_forward(bad, {0, 0}, dis), std::invalid_argument);
}

TEST_CASE("standard-shape generator and discriminator agree on 3x9x64") {
    GanConfig c;
    c.tfr_shape = {3, 9, 64};
    c.noise_dim = 100;
    std::mt19937_64 rng(9);
    const GeneratorNet gen = make_generator(c, rng);
    const DiscriminatorNet dis = make_discriminator(c, rng);
    const Tensor z = random_noise(2, 100, 31);
    const Tensor x = generator_forward(z, {0, 1}, gen);
    CHECK(x.shape() == std::vector<int>{2, 3, 9, 64});
    const Tensor logits = discriminator_forward(x, {0, 1}, dis);
    CHECK(logits.shape() == std::vector<int>{2});
    CHECK(logits.all_finite());
}

TEST_CASE("gan_losses matches hand values") {
    const double ln2 = std::log(2.0);
    const Tensor zeros = Tensor::from_values({2, 1}, {0.0, 0.0});
    auto [d0, g0] = gan_losses(zeros, zeros, GLossMode::NonSaturating);
    CHECK(d0 == doctest::Approx(2.0 * ln2).epsilon(1e-12));
    CHECK(g0 == doctest::Approx(ln2).epsilon(1e-12));

    // confident discriminator: real logit +40, fake logit -40
    const Tensor hi = Tensor::from_values({1, 1}, {40.0});
    const Tensor lo = Tensor::from_values({1, 1}, {-40.0});
    auto [d1, g1] = gan_losses(hi, lo, GLossMode::NonSaturating);
    CHECK(d1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g1 == doctest::Approx(40.0).epsilon(1e-6));  // -log sigmoid(-40)

    auto [d2, g2] = gan_losses(hi, lo, GLossMode::Saturating);
    CHECK(d2 == d1);
    CHECK(g2 == doctest::Approx(0.0).epsilon(1e-12));  // log(1 - sigmoid(-40))

    Tensor nan = Tensor::from_values({1, 1}, {0.0});
    nan[0] = std::nan("");
    CHECK_THROWS_AS(gan_losses(nan, lo, GLossMode::NonSaturating), std::invalid_argument);
}

TEST_CASE("train_cdcgan input validation") {
    GanConfig c = toy_config();
    CHECK_THROWS_AS(train_cdcgan({}, c), std::invalid_argument);

    auto one_class = toy_samples(3);
    one_class.erase(one_class.begin() + 3, one_class.end());  // drop class 1
    CHECK_THROWS_WITH_AS(train_cdcgan(one_class, c), doctest::Contains("no samples"),
                         std::invalid_argument);

    auto wild = toy_samples(3);
    wild[0].values[0](0, 0) = 1.5;
    CHECK_THROWS_WITH_AS(train_cdcgan(wild, c), doctest::Contains("outside [-1,1]"),
                         std::invalid_argument);
}

TEST_CASE("zero iterations leaves the log empty and the nets usable") {
    const auto samples = toy_samples(6);
    const auto [gen, dis, log] = train_cdcgan(samples, toy_config());
    CHECK(log.rows.empty());
    CHECK(log.total_d_updates == 0);
    CHECK(log.total_g_updates == 0);
    CHECK(gen.freqs_hz == samples[0].freqs_hz);  // axes stamped even untrained
    const auto fakes = generate_labeled(gen, Label::LeftHand, 3, 4);
    CHECK(fakes.size() == 3);
}

TEST_CASE("training accounting follows the 2:1 schedule and stays finite") {
    GanConfig c = toy_config(2);
    c.iterations = 40;
    const auto samples = toy_samples(12);
    const auto [gen, dis, log] = train_cdcgan(samples, c);
    CHECK(log.rows.size() == 40);
    CHECK(log.total_g_updates == 40);
    CHECK(log.total_d_updates == 40 * c.d_steps_per_g_step);
    for (const auto& r : log.rows) {
        CHECK(std::isfinite(r.d_loss));
        CHECK(std::isfinite(r.g_loss));
        CHECK(r.d_accuracy >= 0.0);
        CHECK(r.d_accuracy <= 1.0);
    }
}

TEST_CASE("training is bit-identical across runs with the same seed") {
    GanConfig c = toy_config(77);
    c.iterations = 15;
    const auto samples = toy_samples(10);
    const auto [g1, d1, l1] = train_cdcgan(samples, c);
    const auto [g2, d2, l2] = train_cdcgan(samples, c);
    REQUIRE(l1.rows.size() == l2.rows.size());
    for (size_t i = 0; i < l1.rows.size(); ++i) {
        CHECK(l1.rows[i].d_loss == l2.rows[i].d_loss);
        CHECK(l1.rows[i].g_loss == l2.rows[i].g_loss);
        CHECK(l1.rows[i].d_accuracy == l2.rows[i].d_accuracy);
    }
    const auto f1 = generate_labeled(g1, Label::RightHand, 4, 9);
    const auto f2 = generate_labeled(g2, Label::RightHand, 4, 9);
    for (size_t i = 0; i < f1.size(); ++i)
        CHECK((f1[i].values[0].array() == f2[i].values[0].array()).all());
}

TEST_CASE("a trained toy generator respects the class sign pattern") {
    GanConfig c = toy_config(3);
    c.iterations = 400;
    const auto samples = toy_samples(24, 0.6, 5);
    const auto [gen, dis, log] = train_cdcgan(samples, c);

    const auto left = generate_labeled(gen, Label::LeftHand, 32, 100);
    const auto right = generate_labeled(gen, Label::RightHand, 32, 200);
    double mean_left = 0.0, mean_right = 0.0;
    for (const auto& s : left) mean_left += mean_value(s) / left.size();
    for (const auto& s : right) mean_right += mean_value(s) / right.size();
    CHECK(mean_left > 0.2);    // class 0 sits near +0.6
    CHECK(mean_right < -0.2);  // class 1 sits near -0.6
}

TEST_CASE("generate_labeled basics") {
    const GanConfig c = toy_config();
    std::mt19937_64 rng(13);
    GeneratorNet gen = make_generator(c, rng);
    gen.freqs_hz = {7.0, 8.0};
    gen.times_s = {0.0, 1.0};

    CHECK(generate_labeled(gen, Label::LeftHand, 0, 1).empty());
    CHECK_THROWS_AS(generate_labeled(gen, Label::LeftHand, -1, 1), std::invalid_argument);

    const auto a = generate_labeled(gen, Label::RightHand, 70, 42);
    CHECK(a.size() == 70);
    for (const auto& s : a) {
        CHECK(s.label == Label::RightHand);
        CHECK(s.provenance == Provenance::Artificial);
        CHECK(s.freqs_hz == gen.freqs_hz);
        CHECK(s.values[0].cwiseAbs().maxCoeff() < 1.0);
    }
    const auto b = generate_labeled(gen, Label::RightHand, 70, 42);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK((a[i].values[0].array() == b[i].values[0].array()).all());
    const auto d = generate_labeled(gen, Label::RightHand, 70, 43);
    CHECK((a[0].values[0].array() != d[0].values[0].array()).any());
}

TEST_CASE("generator checkpoint round-trips bit-exactly") {
    const GanConfig c = toy_config();
    std::mt19937_64 rng(17);
    GeneratorNet gen = make_generator(c, rng);
    gen.freqs_hz = {7.0, 8.0};
    gen.times_s = {0.25, 0.75};

    const std::string path =
        (std::filesystem::temp_directory_path() / "gen.ckpt").string();
    save_generator(path, gen);
    const GeneratorNet back = load_generator(path);
    CHECK(back.noise_dim == gen.noise_dim);
    CHECK(back.class_count == gen.class_count);
    CHECK(back.tfr_shape == gen.tfr_shape);
    CHECK(back.freqs_hz == gen.freqs_hz);
    CHECK(back.times_s == gen.times_s);

    const Tensor z = random_noise(5, c.noise_dim, 55);
    const Tensor xa = generator_forward(z, {0, 1, 0, 1, 0}, gen);
    const Tensor xb = generator_forward(z, {0, 1, 0, 1, 0}, back);
    CHECK((xa.array() == xb.array()).all());
}

TEST_CASE("train log CSV is written with one row per iteration") {
    GanConfig c = toy_config(8);
    c.iterations = 5;
    const auto [gen, dis, log] = train_cdcgan(toy_samples(8), c);
    const std::string path =
        (std::filesystem::temp_directory_path() / "log.csv").string();
    log.write_csv(path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "iteration,d_loss,g_loss,d_accuracy");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}
