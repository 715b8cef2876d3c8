#include "eegaug/cdcgan.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <tuple>

namespace eegaug {

namespace {

bool is_standard_shape(const std::vector<int>& s) { return s == std::vector<int>{3, 9, 64}; }

std::vector<LayerSpec> generator_layers(const GanConfig& c) {
    const int C = c.tfr_shape[0], F = c.tfr_shape[1], T = c.tfr_shape[2];
    if (is_standard_shape(c.tfr_shape)) {
        // dense -> [64,3,8] -> convT to [32,5,16] -> convT to [3,9,64]
        return {DenseLayer{64 * 3 * 8},
                ReshapeLayer{{64, 3, 8}},
                ActLayer{Activation::Relu},
                ConvT2dLayer{32, 3, 4, 1, 2, 0, 1},
                ActLayer{Activation::Relu},
                ConvT2dLayer{3, 5, 4, 1, 4, 0, 0},
                ActLayer{Activation::Tanh}};
    }
    // Small-shape fallback (e.g. the 1x2x2 toy): dense stack, same wiring.
    return {DenseLayer{128}, ActLayer{Activation::Relu}, DenseLayer{C * F * T},
            ActLayer{Activation::Tanh}, ReshapeLayer{{C, F, T}}};
}

std::vector<LayerSpec> discriminator_layers(const GanConfig& c) {
    if (is_standard_shape(c.tfr_shape)) {
        return {Conv2dLayer{32, 3, 4, 1, 2, 0, 1},
                ActLayer{Activation::LeakyRelu, 0.2},
                Conv2dLayer{64, 3, 4, 1, 2, 0, 1},
                ActLayer{Activation::LeakyRelu, 0.2},
                FlattenLayer{},
                DenseLayer{1}};
    }
    return {FlattenLayer{}, DenseLayer{128}, ActLayer{Activation::LeakyRelu, 0.2},
            DenseLayer{1}};
}

Tensor one_hot(const std::vector<int>& labels, int class_count) {
    Tensor t({static_cast<int>(labels.size()), class_count});
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count)
            throw std::invalid_argument("label out of range: " + std::to_string(labels[i]));
        t[i * class_count + labels[i]] = 1.0;
    }
    return t;
}

Tensor label_planes(const std::vector<int>& labels, int class_count, int F, int T) {
    const int N = static_cast<int>(labels.size());
    Tensor t({N, class_count, F, T});
    for (int n = 0; n < N; ++n) {
        if (labels[n] < 0 || labels[n] >= class_count)
            throw std::invalid_argument("label out of range: " + std::to_string(labels[n]));
        for (long i = 0; i < static_cast<long>(F) * T; ++i)
            t[((static_cast<long>(n) * class_count + labels[n]) * F * T) + i] = 1.0;
    }
    return t;
}

int generator_on_tape(Tape& tape, const Tensor& z, const std::vector<int>& labels,
                      const GeneratorNet& gen, std::vector<int>* pids, bool track) {
    if (z.rank() != 2 || z.shape()[1] != gen.noise_dim)
        throw std::invalid_argument("generator_forward: z must be [batch, noise_dim]");
    if (static_cast<int>(labels.size()) != z.shape()[0])
        throw std::invalid_argument("generator_forward: label count != batch");
    const int z_id = tape.input(z);
    const int oh_id = tape.input(one_hot(labels, gen.class_count));
    return gen.net.forward(tape, concat_cols(tape, z_id, oh_id), pids, track);
}

int discriminator_on_tape(Tape& tape, int x_id, const std::vector<int>& labels,
                          const DiscriminatorNet& dis, std::vector<int>* pids, bool track) {
    // copy the shape: appending to the tape may relocate its nodes
    const std::vector<int> xs = tape.value(x_id).shape();
    if (xs.size() != 4 || xs[1] != dis.tfr_shape[0] || xs[2] != dis.tfr_shape[1] ||
        xs[3] != dis.tfr_shape[2])
        throw std::invalid_argument("discriminator_forward: input shape " +
                                    tape.value(x_id).shape_str() +
                                    " does not match TFR shape");
    if (static_cast<int>(labels.size()) != xs[0])
        throw std::invalid_argument("discriminator_forward: label count != batch");
    const int planes = tape.input(
        label_planes(labels, dis.class_count, dis.tfr_shape[1], dis.tfr_shape[2]));
    const int logits = dis.net.forward(tape, concat_channels(tape, x_id, planes), pids, track);
    return reshape(tape, logits, {xs[0]});
}

double bce_value(const Tensor& logits, double target) {
    double acc = 0.0;
    for (long i = 0; i < logits.size(); ++i) {
        const double x = logits[i];
        acc += std::max(x, 0.0) - x * target + std::log1p(std::exp(-std::abs(x)));
    }
    return acc / static_cast<double>(logits.size());
}

}  // namespace

GeneratorNet make_generator(const GanConfig& config, std::mt19937_64& rng) {
    config.validate();
    GeneratorNet g;
    g.noise_dim = config.noise_dim;
    g.class_count = config.class_count;
    g.tfr_shape = config.tfr_shape;
    g.net = Net(generator_layers(config), "g");
    g.net.init({config.noise_dim + config.class_count}, rng);
    return g;
}

DiscriminatorNet make_discriminator(const GanConfig& config, std::mt19937_64& rng) {
    config.validate();
    DiscriminatorNet d;
    d.class_count = config.class_count;
    d.tfr_shape = config.tfr_shape;
    d.net = Net(discriminator_layers(config), "d");
    d.net.init({config.tfr_shape[0] + config.class_count, config.tfr_shape[1],
                config.tfr_shape[2]},
               rng);
    return d;
}

Tensor generator_forward(const Tensor& z, const std::vector<int>& labels,
                         const GeneratorNet& gen) {
    Tape tape;
    return tape.value(generator_on_tape(tape, z, labels, gen, nullptr, false));
}

Tensor discriminator_forward(const Tensor& x, const std::vector<int>& labels,
                             const DiscriminatorNet& dis) {
    Tape tape;
    const int x_id = tape.input(x);
    return tape.value(discriminator_on_tape(tape, x_id, labels, dis, nullptr, false));
}

std::pair<double, double> gan_losses(const Tensor& d_real_logits,
                                     const Tensor& d_fake_logits, GLossMode mode) {
    if (!d_real_logits.all_finite() || !d_fake_logits.all_finite())
        throw std::invalid_argument("gan_losses: non-finite logits");
    const double loss_d = bce_value(d_real_logits, 1.0) + bce_value(d_fake_logits, 0.0);
    const double loss_g = mode == GLossMode::NonSaturating
                              ? bce_value(d_fake_logits, 1.0)
                              : -bce_value(d_fake_logits, 0.0);
    return {loss_d, loss_g};
}

Tensor tfr_batch_tensor(const std::vector<Tfr>& samples,
                        const std::vector<const Tfr*>* subset) {
    std::vector<const Tfr*> ptrs;
    if (subset) ptrs = *subset;
    else for (const Tfr& s : samples) ptrs.push_back(&s);
    if (ptrs.empty()) throw std::invalid_argument("tfr_batch_tensor: empty batch");
    const int C = ptrs[0]->n_channels(), F = ptrs[0]->n_freqs(), T = ptrs[0]->n_times();
    Tensor x({static_cast<int>(ptrs.size()), C, F, T});
    long o = 0;
    for (const Tfr* s : ptrs)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < T; ++t) x[o++] = s->values[c](f, t);
    return x;
}

std::vector<int> tfr_batch_labels(const std::vector<Tfr>& samples) {
    std::vector<int> labels;
    for (const Tfr& s : samples) labels.push_back(static_cast<int>(s.label));
    return labels;
}

std::tuple<GeneratorNet, DiscriminatorNet, TrainLog>
train_cdcgan(const std::vector<Tfr>& samples, const GanConfig& config) {
    config.validate();
    if (samples.empty()) throw std::invalid_argument("train_cdcgan: no samples");
    int per_class[2] = {0, 0};
    for (const Tfr& s : samples) {
        ++per_class[static_cast<int>(s.label) & 1];
        for (const auto& v : s.values)
            if (v.minCoeff() < -1.0 - 1e-9 || v.maxCoeff() > 1.0 + 1e-9)
                throw std::invalid_argument("train_cdcgan: sample values outside [-1,1]; "
                                            "normalize TFRs first");
    }
    if (per_class[0] == 0 || per_class[1] == 0)
        throw std::invalid_argument("train_cdcgan: a class has no samples");

    std::mt19937_64 rng(config.seed);
    GeneratorNet gen = make_generator(config, rng);
    DiscriminatorNet dis = make_discriminator(config, rng);
    gen.freqs_hz = samples[0].freqs_hz;
    gen.times_s = samples[0].times_s;

    AdamState state_g = AdamState::make(gen.net.params(), config.adam_g);
    AdamState state_d = AdamState::make(dis.net.params(), config.adam_d);

    const int n = static_cast<int>(samples.size());
    const int B = config.batch_size;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> class_dist(0, config.class_count - 1);

    // Fixed real probe batch for the equilibrium diagnostic.
    std::vector<int> probe_idx(n);
    std::iota(probe_idx.begin(), probe_idx.end(), 0);
    std::shuffle(probe_idx.begin(), probe_idx.end(), rng);
    probe_idx.resize(std::min(16, n));
    std::vector<const Tfr*> probe_ptrs;
    std::vector<int> probe_labels;
    for (int i : probe_idx) {
        probe_ptrs.push_back(&samples[i]);
        probe_labels.push_back(static_cast<int>(samples[i].label));
    }
    const Tensor probe_x = tfr_batch_tensor(samples, &probe_ptrs);

    // Cycling shuffled order over the training pool.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    int cursor = 0;
    auto next_batch = [&](std::vector<const Tfr*>& ptrs, std::vector<int>& labels) {
        ptrs.clear();
        labels.clear();
        for (int k = 0; k < B; ++k) {
            if (cursor == n) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const Tfr& s = samples[order[cursor++]];
            ptrs.push_back(&s);
            labels.push_back(static_cast<int>(s.label));
        }
    };

    auto sample_noise = [&](int count) {
        Tensor z({count, config.noise_dim});
        for (long i = 0; i < z.size(); ++i) z[i] = gauss(rng);
        return z;
    };
    auto sample_fake_labels = [&](int count) {
        std::vector<int> labels(count);
        for (int& l : labels) l = class_dist(rng);
        return labels;
    };

    TrainLog log;
    for (int it = 0; it < config.iterations; ++it) {
        double d_loss = 0.0;
        for (int k = 0; k < config.d_steps_per_g_step; ++k) {
            std::vector<const Tfr*> real_ptrs;
            std::vector<int> real_labels;
            next_batch(real_ptrs, real_labels);
            const Tensor real_x = tfr_batch_tensor(samples, &real_ptrs);

            const std::vector<int> fake_labels = sample_fake_labels(B);
            Tape gt;
            const Tensor fake_x =
                gt.value(generator_on_tape(gt, sample_noise(B), fake_labels, gen, nullptr, false));

            // One D pass over the concatenated batch; x2 restores the
            // sum-of-means convention loss_d = bce(real->1) + bce(fake->0).
            Tape tape;
            std::vector<int> combined_labels = real_labels;
            combined_labels.insert(combined_labels.end(), fake_labels.begin(), fake_labels.end());
            Tensor x_cat({2 * B, config.tfr_shape[0], config.tfr_shape[1], config.tfr_shape[2]});
            x_cat.array() << real_x.array(), fake_x.array();
            Tensor targets({2 * B});
            for (int i = 0; i < B; ++i) targets[i] = 1.0;
            std::vector<int> pids;
            const int logits =
                discriminator_on_tape(tape, tape.input(std::move(x_cat)), combined_labels,
                                      dis, &pids, true);
            const int loss = scale(tape, bce_logits(tape, logits, targets), 2.0);
            d_loss = tape.value(loss)[0];
            if (!std::isfinite(d_loss))
                throw std::runtime_error("train_cdcgan: non-finite d_loss at iteration " +
                                         std::to_string(it));
            tape.backward(loss);
            std::vector<Tensor> grads;
            for (int id : pids) grads.push_back(tape.grad(id));
            adam_step(dis.net.params(), grads, state_d);
            ++log.total_d_updates;
        }

        // Generator step: gradient flows through a frozen D.
        const std::vector<int> fake_labels = sample_fake_labels(B);
        Tape tape;
        std::vector<int> gpids;
        const int fake = generator_on_tape(tape, sample_noise(B), fake_labels, gen, &gpids, true);
        const int logits = discriminator_on_tape(tape, fake, fake_labels, dis, nullptr, false);
        Tensor ones({B});
        ones.array().setConstant(1.0);
        Tensor zeros({B});
        const int loss = config.g_loss_mode == GLossMode::NonSaturating
                             ? bce_logits(tape, logits, ones)
                             : scale(tape, bce_logits(tape, logits, zeros), -1.0);
        const double g_loss = tape.value(loss)[0];
        if (!std::isfinite(g_loss))
            throw std::runtime_error("train_cdcgan: non-finite g_loss at iteration " +
                                     std::to_string(it));
        tape.backward(loss);
        std::vector<Tensor> grads;
        for (int id : gpids) grads.push_back(tape.grad(id));
        adam_step(gen.net.params(), grads, state_g);
        ++log.total_g_updates;

        // Equilibrium probe: fixed reals vs fresh fakes, threshold at logit 0.
        const int pn = static_cast<int>(probe_labels.size());
        const std::vector<int> pf_labels = sample_fake_labels(pn);
        const Tensor pf = generator_forward(sample_noise(pn), pf_labels, gen);
        const Tensor lr = discriminator_forward(probe_x, probe_labels, dis);
        const Tensor lf = discriminator_forward(pf, pf_labels, dis);
        int correct = 0;
        for (long i = 0; i < lr.size(); ++i) correct += lr[i] > 0.0;
        for (long i = 0; i < lf.size(); ++i) correct += lf[i] < 0.0;
        const double acc = static_cast<double>(correct) / (2.0 * pn);

        log.rows.push_back({it, d_loss, g_loss, acc});
    }
    return {std::move(gen), std::move(dis), std::move(log)};
}

std::vector<Tfr> generate_labeled(const GeneratorNet& gen, Label label, int count,
                                  uint64_t seed) {
    if (count < 0) throw std::invalid_argument("generate_labeled: negative count");
    const int cls = static_cast<int>(label);
    if (cls < 0 || cls >= gen.class_count)
        throw std::invalid_argument("generate_labeled: invalid label");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int C = gen.tfr_shape[0], F = gen.tfr_shape[1], T = gen.tfr_shape[2];

    std::vector<Tfr> out;
    int made = 0;
    while (made < count) {
        const int b = std::min(64, count - made);
        Tensor z({b, gen.noise_dim});
        for (long i = 0; i < z.size(); ++i) z[i] = gauss(rng);
        const Tensor x = generator_forward(z, std::vector<int>(b, cls), gen);
        for (int nidx = 0; nidx < b; ++nidx) {
            Tfr s;
            s.freqs_hz = gen.freqs_hz;
            s.times_s = gen.times_s;
            if (s.freqs_hz.empty())
                for (int f = 0; f < F; ++f) s.freqs_hz.push_back(f);
            if (s.times_s.empty())
                for (int t = 0; t < T; ++t) s.times_s.push_back(t);
            s.label = label;
            s.trial_id = static_cast<uint32_t>(made + nidx);
            s.provenance = Provenance::Artificial;
            s.normalization = TfrNorm::UnitRange;
            for (int c = 0; c < C; ++c) {
                Eigen::MatrixXd v(F, T);
                for (int f = 0; f < F; ++f)
                    for (int t = 0; t < T; ++t) v(f, t) = x.at4(nidx, c, f, t, C, F, T);
                s.values.push_back(std::move(v));
            }
            out.push_back(std::move(s));
        }
        made += b;
    }
    return out;
}

void TrainLog::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TrainLog: cannot write " + path);
    out << "iteration,d_loss,g_loss,d_accuracy\n";
    char buf[128];
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof buf, "%ld,%.10g,%.10g,%.10g\n", r.iteration, r.d_loss,
                      r.g_loss, r.d_accuracy);
        out << buf;
    }
}

void save_generator(const std::string& path, const GeneratorNet& gen) {
    std::vector<std::string> names = gen.net.param_names();
    std::vector<Tensor> params = gen.net.params();
    auto push_meta = [&](const std::string& name, const std::vector<double>& vals) {
        Tensor t({std::max(1, static_cast<int>(vals.size()))});
        for (size_t i = 0; i < vals.size(); ++i) t[i] = vals[i];
        names.push_back(name);
        params.push_back(std::move(t));
    };
    push_meta("meta.noise_dim", {static_cast<double>(gen.noise_dim)});
    push_meta("meta.class_count", {static_cast<double>(gen.class_count)});
    push_meta("meta.tfr_shape", {static_cast<double>(gen.tfr_shape[0]),
                                 static_cast<double>(gen.tfr_shape[1]),
                                 static_cast<double>(gen.tfr_shape[2])});
    push_meta("meta.freqs_hz", gen.freqs_hz);
    push_meta("meta.times_s", gen.times_s);
    save_checkpoint(path, names, params);
}

GeneratorNet load_generator(const std::string& path) {
    auto entries = load_checkpoint(path);
    auto find = [&](const std::string& name) -> const Tensor& {
        for (const auto& [n, t] : entries)
            if (n == name) return t;
        throw std::runtime_error("load_generator: missing entry " + name + " in " + path);
    };
    GanConfig cfg;
    cfg.noise_dim = static_cast<int>(find("meta.noise_dim")[0]);
    cfg.class_count = static_cast<int>(find("meta.class_count")[0]);
    const Tensor& sh = find("meta.tfr_shape");
    cfg.tfr_shape = {static_cast<int>(sh[0]), static_cast<int>(sh[1]), static_cast<int>(sh[2])};

    std::mt19937_64 rng(0);
    GeneratorNet gen = make_generator(cfg, rng);
    const Tensor& fx = find("meta.freqs_hz");
    const Tensor& tx = find("meta.times_s");
    for (long i = 0; i < fx.size(); ++i) gen.freqs_hz.push_back(fx[i]);
    for (long i = 0; i < tx.size(); ++i) gen.times_s.push_back(tx[i]);

    const auto& names = gen.net.param_names();
    for (size_t i = 0; i < names.size(); ++i) {
        const Tensor& stored = find(names[i]);
        if (!stored.same_shape(gen.net.params()[i]))
            throw std::runtime_error("load_generator: shape mismatch for " + names[i]);
        gen.net.params()[i] = stored;
    }
    return gen;
}

}  // namespace eegaug
