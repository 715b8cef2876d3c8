#include "eegaug/data.hpp"

#include "eegaug/binio.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace eegaug {

void EegTrial::validate() const {
    if (channels.size() != static_cast<size_t>(samples.rows()))
        throw std::runtime_error("EegTrial " + std::to_string(trial_id) +
                                 ": channel name count != sample rows");
    if (samples.cols() <= 0)
        throw std::runtime_error("EegTrial " + std::to_string(trial_id) + ": empty samples");
    if (!(sample_rate_hz > 0.0))
        throw std::runtime_error("EegTrial " + std::to_string(trial_id) +
                                 ": non-positive sample rate");
    if (!samples.allFinite())
        throw std::runtime_error("EegTrial " + std::to_string(trial_id) +
                                 ": non-finite sample value");
}

void Dataset::validate() const {
    std::vector<uint32_t> ids;
    for (const EegTrial& t : trials) {
        t.validate();
        if (t.sample_rate_hz != trials.front().sample_rate_hz ||
            t.n_samples() != trials.front().n_samples())
            throw std::runtime_error("Dataset: trial " + std::to_string(t.trial_id) +
                                     " disagrees on sample rate or length");
        ids.push_back(t.trial_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::runtime_error("Dataset: duplicate trial_id");
}

void SyntheticSpec::validate() const {
    if (trials_per_class < 0) throw std::invalid_argument("SyntheticSpec: negative count");
    if (!(sample_rate_hz > 0.0) || !(duration_s > 0.0) || n_channels <= 0)
        throw std::invalid_argument("SyntheticSpec: non-positive geometry");
    if (noise_sigma < 0.0) throw std::invalid_argument("SyntheticSpec: negative noise");
    if (class_signatures.size() != 2)
        throw std::invalid_argument("SyntheticSpec: need signatures for both classes");
    for (const auto& per_class : class_signatures) {
        if (per_class.size() != static_cast<size_t>(n_channels))
            throw std::invalid_argument("SyntheticSpec: signature channel count mismatch");
        for (const auto& bursts : per_class)
            for (const Burst& b : bursts)
                if (!(b.frequency_hz > 0.0))
                    throw std::invalid_argument("SyntheticSpec: non-positive burst frequency");
    }
}

SyntheticSpec SyntheticSpec::default_motor_imagery(int trials_per_class, double noise_sigma) {
    SyntheticSpec spec;
    spec.trials_per_class = trials_per_class;
    spec.noise_sigma = noise_sigma;
    spec.class_signatures.resize(2);
    for (auto& per_class : spec.class_signatures) per_class.resize(3);
    // Left hand: strong 10 Hz over C3; right hand: strong 12 Hz over C4.
    // Both inside the 7-15 Hz band so class evidence survives the TFR.
    spec.class_signatures[0][0] = {{10.0, 2.0, 4.5, 8.5}};
    spec.class_signatures[0][2] = {{12.0, 0.4, 4.5, 8.5}};
    spec.class_signatures[1][2] = {{12.0, 2.0, 4.5, 8.5}};
    spec.class_signatures[1][0] = {{10.0, 0.4, 4.5, 8.5}};
    // Shared background alpha over Cz.
    spec.class_signatures[0][1] = {{9.0, 0.8, 0.0, 9.0}};
    spec.class_signatures[1][1] = {{9.0, 0.8, 0.0, 9.0}};
    return spec;
}

namespace {

constexpr char kEegbMagic[4] = {'E', 'E', 'G', 'B'};

std::vector<std::string> default_channel_names(int n) {
    if (n == 3) return {"C3", "Cz", "C4"};
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("ch" + std::to_string(i));
    return names;
}

Dataset load_eegb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kEegbMagic, 4) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    const uint32_t version = binio::read_u32(in);
    if (version != 1)
        throw std::runtime_error("load_dataset: unsupported Eegb version " +
                                 std::to_string(version));
    const uint32_t n_trials = binio::read_u32(in);
    const uint32_t n_channels = binio::read_u32(in);
    const uint32_t n_samples = binio::read_u32(in);
    const float fs = binio::read_f32(in);
    if (!in) throw std::runtime_error("load_dataset: truncated header in " + path);
    if (n_trials > 0 && (n_channels == 0 || n_samples == 0))
        throw std::runtime_error("load_dataset: malformed header (zero geometry) in " + path);

    Dataset ds;
    for (uint32_t i = 0; i < n_trials; ++i) {
        EegTrial t;
        t.trial_id = binio::read_u32(in);
        const uint8_t code = binio::read_u8(in);
        if (code > 1)
            throw std::runtime_error("load_dataset: unknown label code " +
                                     std::to_string(code) + " at trial " +
                                     std::to_string(t.trial_id));
        t.label = static_cast<Label>(code);
        t.sample_rate_hz = fs;
        t.channels = default_channel_names(static_cast<int>(n_channels));
        t.samples.resize(n_channels, n_samples);
        for (uint32_t c = 0; c < n_channels; ++c)
            for (uint32_t s = 0; s < n_samples; ++s) {
                const float v = binio::read_f32(in);
                if (!in)
                    throw std::runtime_error("load_dataset: trial " +
                                             std::to_string(t.trial_id) +
                                             " truncated (length mismatch)");
                t.samples(c, s) = v;
            }
        t.validate();
        ds.trials.push_back(std::move(t));
    }
    ds.validate();
    return ds;
}

void store_eegb(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("store_dataset: cannot write " + path);
    out.write(kEegbMagic, 4);
    binio::write_u32(out, 1);
    binio::write_u32(out, static_cast<uint32_t>(ds.trials.size()));
    const uint32_t nc = ds.trials.empty() ? 0 : static_cast<uint32_t>(ds.trials[0].n_channels());
    const uint32_t ns = ds.trials.empty() ? 0 : static_cast<uint32_t>(ds.trials[0].n_samples());
    binio::write_u32(out, nc);
    binio::write_u32(out, ns);
    binio::write_f32(out, ds.trials.empty() ? 0.0f
                                            : static_cast<float>(ds.trials[0].sample_rate_hz));
    for (const EegTrial& t : ds.trials) {
        binio::write_u32(out, t.trial_id);
        binio::write_u8(out, static_cast<uint8_t>(t.label));
        for (int c = 0; c < t.n_channels(); ++c)
            for (long s = 0; s < t.n_samples(); ++s)
                binio::write_f32(out, static_cast<float>(t.samples(c, s)));
    }
}

// CSV rows: trial_id,label,channel,sample_index,value
Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("trial_id,label,channel,sample_index,value", 0) != 0)
        throw std::runtime_error("load_dataset: malformed CSV header in " + path);

    struct Row { uint32_t id; uint8_t label; std::string ch; long idx; double v; };
    std::vector<Row> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Row r;
        std::string tok;
        try {
            std::getline(ss, tok, ','); r.id = static_cast<uint32_t>(std::stoul(tok));
            std::getline(ss, tok, ',');
            if (tok == "left" || tok == "0") r.label = 0;
            else if (tok == "right" || tok == "1") r.label = 1;
            else throw std::runtime_error("unknown label code '" + tok + "'");
            std::getline(ss, r.ch, ',');
            std::getline(ss, tok, ','); r.idx = std::stol(tok);
            std::getline(ss, tok, ','); r.v = std::stod(tok);
        } catch (const std::exception& e) {
            throw std::runtime_error("load_dataset: CSV line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        if (!std::isfinite(r.v))
            throw std::runtime_error("load_dataset: non-finite sample at CSV line " +
                                     std::to_string(lineno));
        rows.push_back(std::move(r));
    }

    // Group by trial id (first-seen order), then by channel (first-seen order).
    Dataset ds;
    std::vector<uint32_t> order;
    std::map<uint32_t, std::map<std::string, std::vector<double>>> grid;
    std::map<uint32_t, uint8_t> labels;
    std::map<uint32_t, std::vector<std::string>> ch_order;
    for (const Row& r : rows) {
        if (!grid.count(r.id)) order.push_back(r.id);
        auto& chans = grid[r.id];
        if (!chans.count(r.ch)) ch_order[r.id].push_back(r.ch);
        auto& v = chans[r.ch];
        if (static_cast<long>(v.size()) != r.idx)
            throw std::runtime_error("load_dataset: non-contiguous sample_index for trial " +
                                     std::to_string(r.id) + " channel " + r.ch);
        v.push_back(r.v);
        labels[r.id] = r.label;
    }
    for (uint32_t id : order) {
        EegTrial t;
        t.trial_id = id;
        t.label = static_cast<Label>(labels[id]);
        t.sample_rate_hz = 128.0;  // CSV carries no rate; documented default
        t.channels = ch_order[id];
        const auto& chans = grid[id];
        const long T = chans.begin()->second.size();
        for (const auto& [name, v] : chans)
            if (static_cast<long>(v.size()) != T)
                throw std::runtime_error("load_dataset: length mismatch in trial " +
                                         std::to_string(id) + " channel " + name);
        t.samples.resize(t.channels.size(), T);
        for (size_t c = 0; c < t.channels.size(); ++c) {
            const auto& v = chans.at(t.channels[c]);
            for (long s = 0; s < T; ++s) t.samples(c, s) = v[s];
        }
        t.validate();
        ds.trials.push_back(std::move(t));
    }
    ds.validate();
    return ds;
}

void store_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("store_dataset: cannot write " + path);
    out << "trial_id,label,channel,sample_index,value\n";
    char buf[64];
    for (const EegTrial& t : ds.trials)
        for (int c = 0; c < t.n_channels(); ++c)
            for (long s = 0; s < t.n_samples(); ++s) {
                std::snprintf(buf, sizeof buf, "%.17g", t.samples(c, s));
                out << t.trial_id << ',' << label_name(t.label) << ',' << t.channels[c]
                    << ',' << s << ',' << buf << '\n';
            }
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat format) {
    return format == FileFormat::Eegb ? load_eegb(path) : load_csv(path);
}

void store_dataset(const std::string& path, const Dataset& ds, FileFormat format) {
    if (format == FileFormat::Eegb) store_eegb(path, ds);
    else store_csv(path, ds);
}

EegTrial extract_window(const EegTrial& trial, double t0_s, double t1_s) {
    const double dur = trial.duration_s();
    if (!(0.0 <= t0_s && t0_s < t1_s && t1_s <= dur + 1e-9))
        throw std::out_of_range("extract_window: [" + std::to_string(t0_s) + "," +
                                std::to_string(t1_s) + ") outside recording of " +
                                std::to_string(dur) + " s");
    const long start = std::lround(t0_s * trial.sample_rate_hz);
    const long len = std::lround((t1_s - t0_s) * trial.sample_rate_hz);
    EegTrial out = trial;
    out.samples = trial.samples.middleCols(start, std::min(len, trial.n_samples() - start));
    return out;
}

Dataset synthesize_dataset(const SyntheticSpec& spec, uint64_t seed) {
    spec.validate();
    Dataset ds;
    ds.provenance = Provenance::Synthetic;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const long T = std::lround(spec.duration_s * spec.sample_rate_hz);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

    uint32_t id = 0;
    for (int cls = 0; cls < 2; ++cls)
        for (int k = 0; k < spec.trials_per_class; ++k) {
            EegTrial t;
            t.trial_id = id++;
            t.label = static_cast<Label>(cls);
            t.sample_rate_hz = spec.sample_rate_hz;
            t.channels = spec.n_channels == 3
                             ? std::vector<std::string>{"C3", "Cz", "C4"}
                             : std::vector<std::string>(spec.n_channels, "ch");
            t.samples.setZero(spec.n_channels, T);
            for (int c = 0; c < spec.n_channels; ++c)
                for (const Burst& b : spec.class_signatures[cls][c]) {
                    const double ph = phase(rng);
                    for (long s = 0; s < T; ++s) {
                        const double ts = s / spec.sample_rate_hz;
                        if (ts >= b.on_start_s && ts < b.on_end_s)
                            t.samples(c, s) +=
                                b.amplitude * std::sin(2.0 * M_PI * b.frequency_hz * ts + ph);
                    }
                }
            if (spec.noise_sigma > 0.0)
                for (int c = 0; c < spec.n_channels; ++c)
                    for (long s = 0; s < T; ++s)
                        t.samples(c, s) += spec.noise_sigma * noise(rng);
            ds.trials.push_back(std::move(t));
        }
    ds.validate();
    return ds;
}

}  // namespace eegaug
