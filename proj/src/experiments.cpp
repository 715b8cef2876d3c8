#include "eegaug/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace eegaug {

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw std::invalid_argument("ExperimentConfig: need at least one seed");
    if (reference_per_class <= 0)
        throw std::invalid_argument("ExperimentConfig: reference_per_class must be positive");
    for (int c : fig5_counts)
        if (c <= 0)
            throw std::invalid_argument("ExperimentConfig: fig5 count must be positive, got " +
                                        std::to_string(c));
    if (fig5_fixed_artificial < 0)
        throw std::invalid_argument("ExperimentConfig: negative fig5 artificial count");
    if (!(preprocess.window_t0_s < preprocess.window_t1_s))
        throw std::invalid_argument("ExperimentConfig: empty preprocessing window");
    gan.validate();
}

std::vector<Tfr> preprocess_dataset(const Dataset& ds, const PreprocessParams& params,
                                    const MorletParams& morlet) {
    std::vector<double> freqs;
    for (double f = params.band_lo_hz; f <= params.band_hi_hz + 1e-9; f += 1.0)
        freqs.push_back(f);
    std::vector<Tfr> out;
    out.reserve(ds.trials.size());
    for (const EegTrial& trial : ds.trials) {
        const EegTrial win = extract_window(trial, params.window_t0_s, params.window_t1_s);
        Tfr s = tfr_magnitude(cwt(win, freqs, morlet), params.time_columns, true);
        s.provenance = ds.provenance;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

struct Pipeline {
    std::vector<Tfr> train;
    std::vector<Tfr> test;
};

Pipeline load_pipeline(const ExperimentConfig& cfg, uint64_t data_seed) {
    Pipeline p;
    if (!cfg.use_synthetic) {
        Dataset train = load_dataset(cfg.dataset_path, cfg.dataset_format);
        Dataset test = load_dataset(cfg.test_path.empty() ? cfg.dataset_path : cfg.test_path,
                                    cfg.dataset_format);
        p.train = preprocess_dataset(train, cfg.preprocess);
        p.test = preprocess_dataset(test, cfg.preprocess);
        return p;
    }
    // Synthetic: fixed test set (seed 0xE0) and per-run training draw.
    Dataset train = synthesize_dataset(cfg.synthetic, data_seed);
    Dataset test = synthesize_dataset(cfg.synthetic, 0xE0);
    p.train = preprocess_dataset(train, cfg.preprocess);
    p.test = preprocess_dataset(test, cfg.preprocess);
    return p;
}

std::vector<Tfr> draw_raw_subset(const std::vector<Tfr>& raw, double fraction,
                                 int reference, uint64_t seed) {
    return mix_training_set(raw, std::vector<Tfr>{}, fraction, 0.0, reference, seed);
}

std::vector<Tfr> make_artificial(const std::vector<Tfr>& gan_train, const GanConfig& base,
                                 int per_class, uint64_t seed) {
    GanConfig cfg = base;
    cfg.seed = seed;
    auto [gen, dis, log] = train_cdcgan(gan_train, cfg);
    (void)dis;
    (void)log;
    std::vector<Tfr> art = generate_labeled(gen, Label::LeftHand, per_class, seed ^ 0xA11);
    std::vector<Tfr> right = generate_labeled(gen, Label::RightHand, per_class, seed ^ 0xB22);
    art.insert(art.end(), right.begin(), right.end());
    return art;
}

double run_cell(const std::vector<Tfr>& train, const std::vector<Tfr>& test,
                const ExperimentConfig& cfg, uint64_t seed) {
    const CnnArch arch = CnnArch::default_for(cfg.gan.tfr_shape);
    const ClassifierModel model = train_classifier(train, arch, cfg.clf, seed);
    return evaluate(model, test).accuracy;
}

void write_fingerprints(const ExperimentConfig& cfg, const std::string& name,
                        const std::vector<std::pair<uint64_t, uint64_t>>& per_seed_hashes) {
    std::ofstream out(cfg.out_dir + "/" + name + "_fingerprints.csv");
    out << "seed,test_set_hash,clf_init_hash\n";
    char buf[96];
    for (size_t i = 0; i < per_seed_hashes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%llu,%016llx,%016llx\n",
                      static_cast<unsigned long long>(cfg.seeds[i]),
                      static_cast<unsigned long long>(per_seed_hashes[i].first),
                      static_cast<unsigned long long>(per_seed_hashes[i].second));
        out << buf;
    }
}

uint64_t clf_init_fingerprint(const ExperimentConfig& cfg, uint64_t seed,
                              const std::vector<int>& tfr_shape) {
    Net net(CnnArch::default_for(cfg.gan.tfr_shape).layers, "clf");
    std::mt19937_64 rng(seed);
    net.init(tfr_shape, rng);
    return fingerprint_params(net.params());
}

}  // namespace

std::vector<ResultRow> run_fig3(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Condition {
        const char* name;
        double raw_fraction;
        double artificial_multiple;
        double gan_fraction;  // raw subset the GAN trains on; <0 = no GAN needed
    };
    const Condition conditions[] = {
        {"1.0raw", 1.0, 0.0, -1.0},
        {"1.0artificial", 0.0, 1.0, 1.0},
        {"0.5raw+0.5artificial", 0.5, 0.5, 0.5},
        {"0.5raw", 0.5, 0.0, -1.0},
        {"0.5artificial", 0.0, 0.5, 0.5},
    };

    std::vector<ResultRow> rows;
    std::vector<std::pair<uint64_t, uint64_t>> hashes;
    for (uint64_t seed : cfg.seeds) {
        Pipeline p = load_pipeline(cfg, seed);
        hashes.emplace_back(fingerprint_tfrs(p.test),
                            clf_init_fingerprint(cfg, seed, cfg.gan.tfr_shape));
        const int ref = cfg.reference_per_class;
        // One GAN per raw subset actually used this seed.
        std::map<double, std::vector<Tfr>> art_by_fraction;
        for (const Condition& c : conditions) {
            if (c.gan_fraction < 0.0 || art_by_fraction.count(c.gan_fraction)) continue;
            const auto subset = draw_raw_subset(p.train, c.gan_fraction, ref, seed);
            art_by_fraction[c.gan_fraction] =
                make_artificial(subset, cfg.gan, 2 * ref, seed);
        }
        for (const Condition& c : conditions) {
            const auto raw_subset =
                draw_raw_subset(p.train, std::max(c.raw_fraction, c.gan_fraction), ref, seed);
            const std::vector<Tfr> art = c.gan_fraction < 0.0
                                             ? std::vector<Tfr>{}
                                             : art_by_fraction.at(c.gan_fraction);
            const auto train = mix_training_set(raw_subset, art, c.raw_fraction,
                                                c.artificial_multiple, ref, seed);
            ResultRow row;
            row.experiment = "fig3";
            row.condition = c.name;
            row.seed = seed;
            row.n_raw_per_class = static_cast<int>(std::lround(c.raw_fraction * ref));
            row.n_art_per_class = static_cast<int>(std::lround(c.artificial_multiple * ref));
            row.accuracy = run_cell(train, p.test, cfg, seed);
            rows.push_back(std::move(row));
        }
    }
    write_fingerprints(cfg, "fig3", hashes);
    return rows;
}

std::vector<ResultRow> run_fig4(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    std::vector<std::pair<uint64_t, uint64_t>> hashes;
    for (uint64_t seed : cfg.seeds) {
        Pipeline p = load_pipeline(cfg, seed);
        hashes.emplace_back(fingerprint_tfrs(p.test),
                            clf_init_fingerprint(cfg, seed, cfg.gan.tfr_shape));
        const int ref = cfg.reference_per_class;
        const auto raw_subset = draw_raw_subset(p.train, 1.0, ref, seed);
        std::vector<Tfr> art;
        if (!cfg.fig4_multiples.empty()) {
            double max_mult = 0.0;
            for (double m : cfg.fig4_multiples) max_mult = std::max(max_mult, m);
            art = make_artificial(raw_subset, cfg.gan,
                                  static_cast<int>(std::lround(max_mult * ref)), seed);
        }
        std::vector<double> multiples = {0.0};
        multiples.insert(multiples.end(), cfg.fig4_multiples.begin(), cfg.fig4_multiples.end());
        for (double m : multiples) {
            const auto train = mix_training_set(raw_subset, art, 1.0, m, ref, seed);
            ResultRow row;
            row.experiment = "fig4";
            char cond[32];
            std::snprintf(cond, sizeof cond, "raw+%.1fx", m);
            row.condition = m == 0.0 ? "raw" : cond;
            row.seed = seed;
            row.n_raw_per_class = ref;
            row.n_art_per_class = static_cast<int>(std::lround(m * ref));
            row.accuracy = run_cell(train, p.test, cfg, seed);
            rows.push_back(std::move(row));
        }
    }
    write_fingerprints(cfg, "fig4", hashes);
    return rows;
}

std::vector<ResultRow> run_fig5(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    std::vector<std::pair<uint64_t, uint64_t>> hashes;
    for (uint64_t seed : cfg.seeds) {
        Pipeline p = load_pipeline(cfg, seed);
        hashes.emplace_back(fingerprint_tfrs(p.test),
                            clf_init_fingerprint(cfg, seed, cfg.gan.tfr_shape));
        for (int count : cfg.fig5_counts) {
            const auto raw_subset = draw_raw_subset(p.train, 1.0, count, seed);
            const auto art =
                make_artificial(raw_subset, cfg.gan, cfg.fig5_fixed_artificial, seed);
            for (int with_art : {0, 1}) {
                const double mult =
                    with_art ? static_cast<double>(cfg.fig5_fixed_artificial) / count : 0.0;
                const auto train = mix_training_set(raw_subset, art, 1.0, mult, count, seed);
                ResultRow row;
                row.experiment = "fig5";
                row.condition = std::to_string(count) + (with_art ? "+art" : "raw");
                row.seed = seed;
                row.n_raw_per_class = count;
                row.n_art_per_class = with_art ? cfg.fig5_fixed_artificial : 0;
                row.accuracy = run_cell(train, p.test, cfg, seed);
                rows.push_back(std::move(row));
            }
        }
    }
    write_fingerprints(cfg, "fig5", hashes);
    return rows;
}

void write_result_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_result_csv: cannot write " + path);
    out << "experiment,condition,seed,n_raw_per_class,n_art_per_class,accuracy\n";
    char buf[64];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g", r.accuracy);
        out << r.experiment << ',' << r.condition << ',' << r.seed << ','
            << r.n_raw_per_class << ',' << r.n_art_per_class << ',' << buf << '\n';
    }
}

namespace {

// Map a value grid to 0..255, lowest value darkest.
std::vector<uint8_t> channel_pixels(const Eigen::MatrixXd& v, int scale) {
    const int F = static_cast<int>(v.rows()), T = static_cast<int>(v.cols());
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<uint8_t> px(static_cast<size_t>(F * scale) * T * scale);
    for (int y = 0; y < F * scale; ++y)
        for (int x = 0; x < T * scale; ++x) {
            // Row 0 of the image shows the highest frequency.
            const int f = F - 1 - y / scale;
            const int t = x / scale;
            px[static_cast<size_t>(y) * T * scale + x] =
                static_cast<uint8_t>(std::lround(255.0 * (v(f, t) - lo) / span));
        }
    return px;
}

void write_pgm(const std::string& path, const std::vector<uint8_t>& px, int w, int h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("render_tfr: cannot write " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<long>(px.size()));
}

void svg_cells(std::ostream& out, const Tfr& s, int channel, int scale, int x0, int y0) {
    const auto& v = s.values[channel];
    const int F = static_cast<int>(v.rows()), T = static_cast<int>(v.cols());
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    for (int f = 0; f < F; ++f)
        for (int t = 0; t < T; ++t) {
            const int g = static_cast<int>(std::lround(255.0 * (v(f, t) - lo) / span));
            out << "<rect x=\"" << x0 + t * scale << "\" y=\"" << y0 + (F - 1 - f) * scale
                << "\" width=\"" << scale << "\" height=\"" << scale << "\" fill=\"rgb(" << g
                << ',' << g << ',' << g << ")\"/>\n";
        }
}

std::string with_channel(const std::string& path, const std::string& ch) {
    const size_t dot = path.rfind('.');
    return path.substr(0, dot) + "_" + ch + path.substr(dot);
}

}  // namespace

void render_tfr(const Tfr& s, const std::string& path, int scale) {
    const size_t dot = path.rfind('.');
    if (dot == std::string::npos)
        throw std::invalid_argument("render_tfr: path needs a .pgm or .svg extension");
    const std::string ext = path.substr(dot);
    const int F = s.n_freqs(), T = s.n_times();
    for (int c = 0; c < s.n_channels(); ++c) {
        const std::string ch = c < 3 && s.n_channels() == 3
                                   ? std::vector<std::string>{"C3", "Cz", "C4"}[c]
                                   : "ch" + std::to_string(c);
        const std::string out_path = with_channel(path, ch);
        if (ext == ".pgm") {
            write_pgm(out_path, channel_pixels(s.values[c], scale), T * scale, F * scale);
        } else if (ext == ".svg") {
            std::ofstream out(out_path);
            if (!out) throw std::runtime_error("render_tfr: cannot write " + out_path);
            out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << T * scale
                << "\" height=\"" << F * scale << "\">\n";
            svg_cells(out, s, c, scale, 0, 0);
            out << "</svg>\n";
        } else {
            throw std::invalid_argument("render_tfr: unsupported extension " + ext);
        }
    }
}

void render_tfr_pair(const Tfr& raw, const Tfr& artificial, const std::string& path,
                     int scale) {
    if (raw.n_channels() != artificial.n_channels() || raw.n_freqs() != artificial.n_freqs() ||
        raw.n_times() != artificial.n_times())
        throw std::invalid_argument("render_tfr_pair: mismatched sample shapes");
    const int F = raw.n_freqs(), T = raw.n_times(), gap = scale;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("render_tfr_pair: cannot write " + path);
    const int row_h = F * scale + gap;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * T * scale + gap
        << "\" height=\"" << raw.n_channels() * row_h << "\">\n";
    for (int c = 0; c < raw.n_channels(); ++c) {
        svg_cells(out, raw, c, scale, 0, c * row_h);
        svg_cells(out, artificial, c, scale, T * scale + gap, c * row_h);
    }
    out << "</svg>\n";
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_config_file: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("parse_config_file: line " + std::to_string(lineno) +
                                     ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("dataset")) {
        if (*v == "synthetic") {
            cfg.use_synthetic = true;
        } else {
            cfg.use_synthetic = false;
            cfg.dataset_path = *v;
            cfg.dataset_format = v->size() > 4 && v->substr(v->size() - 4) == ".csv"
                                     ? FileFormat::Csv
                                     : FileFormat::Eegb;
        }
    }
    if (auto v = get("test_dataset")) cfg.test_path = *v;
    if (auto v = get("synthetic.trials_per_class"))
        cfg.synthetic = SyntheticSpec::default_motor_imagery(std::stoi(*v),
                                                             cfg.synthetic.noise_sigma);
    if (auto v = get("synthetic.noise_sigma")) {
        cfg.synthetic = SyntheticSpec::default_motor_imagery(cfg.synthetic.trials_per_class,
                                                             std::stod(*v));
    }
    if (auto v = get("window")) {
        const auto parts = split(*v, ':');
        if (parts.size() != 2) throw std::runtime_error("config: window must be t0:t1");
        cfg.preprocess.window_t0_s = std::stod(parts[0]);
        cfg.preprocess.window_t1_s = std::stod(parts[1]);
    }
    if (auto v = get("band")) {
        const auto parts = split(*v, ':');
        if (parts.size() != 2) throw std::runtime_error("config: band must be lo:hi");
        cfg.preprocess.band_lo_hz = std::stod(parts[0]);
        cfg.preprocess.band_hi_hz = std::stod(parts[1]);
    }
    if (auto v = get("tcols")) cfg.preprocess.time_columns = std::stoi(*v);
    if (auto v = get("gan.iterations")) cfg.gan.iterations = std::stoi(*v);
    if (auto v = get("gan.batch_size")) cfg.gan.batch_size = std::stoi(*v);
    if (auto v = get("gan.noise_dim")) cfg.gan.noise_dim = std::stoi(*v);
    if (auto v = get("gan.d_steps")) cfg.gan.d_steps_per_g_step = std::stoi(*v);
    if (auto v = get("gan.lr")) cfg.gan.adam_g.lr = cfg.gan.adam_d.lr = std::stod(*v);
    if (auto v = get("gan.seed")) cfg.gan.seed = std::stoull(*v);
    if (auto v = get("gan.g_loss_mode"))
        cfg.gan.g_loss_mode = *v == "saturating" ? GLossMode::Saturating
                                                 : GLossMode::NonSaturating;
    if (auto v = get("clf.epochs")) cfg.clf.epochs = std::stoi(*v);
    if (auto v = get("clf.lr")) cfg.clf.lr = std::stod(*v);
    if (auto v = get("clf.batch")) cfg.clf.batch_size = std::stoi(*v);
    if (auto v = get("reference_per_class")) cfg.reference_per_class = std::stoi(*v);
    if (auto v = get("fig5.fixed_artificial")) cfg.fig5_fixed_artificial = std::stoi(*v);
    if (auto v = get("fig5.counts")) {
        cfg.fig5_counts.clear();
        for (const auto& t : split(*v, ',')) cfg.fig5_counts.push_back(std::stoi(t));
    }
    if (auto v = get("fig4.multiples")) {
        cfg.fig4_multiples.clear();
        for (const auto& t : split(*v, ','))
            if (!t.empty()) cfg.fig4_multiples.push_back(std::stod(t));
    }
    if (auto v = get("seeds")) {
        cfg.seeds.clear();
        for (const auto& t : split(*v, ',')) cfg.seeds.push_back(std::stoull(t));
    }
    if (auto v = get("out")) cfg.out_dir = *v;
    return cfg;
}

uint64_t fingerprint_bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 14695981039346656037ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fingerprint_tfrs(const std::vector<Tfr>& samples) {
    uint64_t h = 14695981039346656037ull;
    for (const Tfr& s : samples) {
        const uint8_t tag[2] = {static_cast<uint8_t>(s.label),
                                static_cast<uint8_t>(s.provenance)};
        h ^= fingerprint_bytes(tag, 2);
        for (const auto& v : s.values)
            h ^= fingerprint_bytes(v.data(), sizeof(double) * v.size());
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fingerprint_params(const std::vector<Tensor>& params) {
    uint64_t h = 14695981039346656037ull;
    for (const Tensor& p : params) {
        h ^= fingerprint_bytes(p.array().data(), sizeof(double) * p.size());
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace eegaug
