#include "eegaug/wavelet.hpp"

#include "eegaug/binio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace eegaug {

Eigen::VectorXcd morlet_daughter(double freq_hz, double sample_rate_hz,
                                 const MorletParams& params) {
    params.validate();
    const double a = params.scale_for(freq_hz);
    const double sigma_t = a * std::sqrt(params.bandwidth_fb / 2.0);
    const long half = static_cast<long>(std::ceil(4.0 * sigma_t * sample_rate_hz));
    Eigen::VectorXcd psi(2 * half + 1);
    const double fb = params.bandwidth_fb, fc = params.center_frequency_fc;
    for (long i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        const double u = t / a;
        psi[i + half] = std::pow(M_PI * fb, -0.5) *
                        std::exp(std::complex<double>(-u * u / fb, 2.0 * M_PI * fc * u));
    }
    psi /= psi.norm();
    return psi;
}

Scalogram cwt(const EegTrial& trial, const std::vector<double>& freqs_hz,
              const MorletParams& params) {
    trial.validate();
    if (freqs_hz.empty()) throw std::invalid_argument("cwt: empty frequency grid");
    const double nyquist = trial.sample_rate_hz / 2.0;
    for (double f : freqs_hz) {
        if (!(f > 0.0)) throw std::invalid_argument("cwt: frequency must be positive");
        if (f >= nyquist)
            throw std::invalid_argument("cwt: frequency " + std::to_string(f) +
                                        " Hz at or above Nyquist " + std::to_string(nyquist));
    }

    const long T = trial.n_samples();
    Scalogram sg;
    sg.freqs_hz = freqs_hz;
    sg.times_s.resize(T);
    for (long t = 0; t < T; ++t) sg.times_s[t] = t / trial.sample_rate_hz;
    sg.sample_rate_hz = trial.sample_rate_hz;
    sg.label = trial.label;
    sg.trial_id = trial.trial_id;

    for (int c = 0; c < trial.n_channels(); ++c) {
        Eigen::MatrixXcd C(freqs_hz.size(), T);
        for (size_t fi = 0; fi < freqs_hz.size(); ++fi) {
            const Eigen::VectorXcd psi = morlet_daughter(freqs_hz[fi], trial.sample_rate_hz, params);
            const long half = (psi.size() - 1) / 2;
            // Zero-padded inner product with the daughter centred at each sample.
            for (long t = 0; t < T; ++t) {
                std::complex<double> acc = 0.0;
                const long lo = std::max<long>(-half, -t);
                const long hi = std::min<long>(half, T - 1 - t);
                for (long k = lo; k <= hi; ++k)
                    acc += trial.samples(c, t + k) * std::conj(psi[k + half]);
                C(fi, t) = acc;
            }
        }
        sg.coeffs.push_back(std::move(C));
    }
    return sg;
}

Tfr tfr_magnitude(const Scalogram& sg, int downsample_time_to, bool normalize) {
    const int T = static_cast<int>(sg.times_s.size());
    if (downsample_time_to <= 0 || downsample_time_to > T)
        throw std::invalid_argument("tfr_magnitude: downsample_time_to outside [1, |times|]");

    Tfr tfr;
    tfr.freqs_hz = sg.freqs_hz;
    tfr.label = sg.label;
    tfr.trial_id = sg.trial_id;
    const int nt = downsample_time_to;
    tfr.times_s.resize(nt);

    // Contiguous bins covering all T columns as evenly as possible.
    std::vector<int> edges(nt + 1);
    for (int b = 0; b <= nt; ++b) edges[b] = static_cast<int>(static_cast<long>(b) * T / nt);
    for (int b = 0; b < nt; ++b)
        tfr.times_s[b] = 0.5 * (sg.times_s[edges[b]] + sg.times_s[edges[b + 1] - 1]);

    for (int c = 0; c < sg.n_channels(); ++c) {
        Eigen::MatrixXd v(sg.freqs_hz.size(), nt);
        for (size_t f = 0; f < sg.freqs_hz.size(); ++f)
            for (int b = 0; b < nt; ++b) {
                double acc = 0.0;
                for (int t = edges[b]; t < edges[b + 1]; ++t) acc += std::abs(sg.coeffs[c](f, t));
                v(f, b) = acc / (edges[b + 1] - edges[b]);
            }
        tfr.values.push_back(std::move(v));
    }

    if (normalize) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& v : tfr.values) {
            lo = std::min(lo, v.minCoeff());
            hi = std::max(hi, v.maxCoeff());
        }
        const double span = hi - lo;
        tfr.normalization = TfrNorm::UnitRange;
        tfr.norm_min = lo;
        tfr.norm_span = span > 0.0 ? span : 1.0;
        for (auto& v : tfr.values) {
            if (span > 0.0)
                v = (2.0 * (v.array() - lo) / tfr.norm_span - 1.0).matrix();
            else
                v.setZero();
        }
    }
    return tfr;
}

namespace {

Eigen::VectorXd reconstruct_channel(const Eigen::MatrixXcd& C,
                                    const std::vector<double>& freqs_hz,
                                    const MorletParams& params, double gain) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(C.cols());
    for (size_t f = 0; f < freqs_hz.size(); ++f)
        out += C.row(f).real().transpose() / std::sqrt(params.scale_for(freqs_hz[f]));
    return gain * out;
}

}  // namespace

double calibrate_inverse(const MorletParams& params, const std::vector<double>& freqs_hz,
                         double sample_rate_hz) {
    if (freqs_hz.size() < 2)
        throw std::invalid_argument("calibrate_inverse: need at least two frequencies");
    const long T = static_cast<long>(std::lround(5.0 * sample_rate_hz));

    EegTrial probe;
    probe.channels = {"probe"};
    probe.sample_rate_hz = sample_rate_hz;
    probe.samples.setZero(1, T);
    // Band-spanning sum of sinusoids with staggered phase.
    int i = 0;
    for (double f : freqs_hz) {
        for (long t = 0; t < T; ++t)
            probe.samples(0, t) += std::sin(2.0 * M_PI * f * t / sample_rate_hz + 0.7 * i);
        ++i;
    }
    if (probe.samples.norm() == 0.0)
        throw std::runtime_error("calibrate_inverse: degenerate zero-energy probe");

    const Scalogram sg = cwt(probe, freqs_hz, params);
    const Eigen::VectorXd raw = reconstruct_channel(sg.coeffs[0], freqs_hz, params, 1.0);
    const Eigen::VectorXd target = probe.samples.row(0).transpose();
    const double denom = raw.squaredNorm();
    if (denom == 0.0)
        throw std::runtime_error("calibrate_inverse: reconstruction has zero energy");
    return raw.dot(target) / denom;
}

EegTrial icwt(const Scalogram& sg, double gain, const MorletParams& params) {
    if (sg.coeffs.empty()) throw std::invalid_argument("icwt: empty scalogram");
    for (const auto& C : sg.coeffs)
        if (C.rows() != static_cast<long>(sg.freqs_hz.size()) ||
            C.cols() != static_cast<long>(sg.times_s.size()))
            throw std::invalid_argument("icwt: coefficient axes do not match axis lists");

    EegTrial out;
    out.sample_rate_hz = sg.sample_rate_hz;
    out.label = sg.label;
    out.trial_id = sg.trial_id;
    out.channels = sg.n_channels() == 3 ? std::vector<std::string>{"C3", "Cz", "C4"}
                                        : std::vector<std::string>(sg.n_channels(), "ch");
    out.samples.resize(sg.n_channels(), sg.times_s.size());
    for (int c = 0; c < sg.n_channels(); ++c)
        out.samples.row(c) =
            reconstruct_channel(sg.coeffs[c], sg.freqs_hz, params, gain).transpose();
    return out;
}

std::vector<double> reconstruction_grid(double f_lo, double f_hi, int n) {
    std::vector<double> freqs(n);
    const double r = std::log(f_hi / f_lo) / (n - 1);
    for (int i = 0; i < n; ++i) freqs[i] = f_lo * std::exp(r * i);
    return freqs;
}

std::vector<double> alpha_band_grid() {
    std::vector<double> freqs;
    for (int f = 7; f <= 15; ++f) freqs.push_back(static_cast<double>(f));
    return freqs;
}

namespace {
constexpr char kTfrbMagic[4] = {'T', 'F', 'R', 'B'};
}

void store_tfr_archive(const std::string& path, const std::vector<Tfr>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("store_tfr_archive: cannot write " + path);
    out.write(kTfrbMagic, 4);
    binio::write_u32(out, 1);
    binio::write_u32(out, static_cast<uint32_t>(samples.size()));
    const int nc = samples.empty() ? 0 : samples[0].n_channels();
    const int nf = samples.empty() ? 0 : samples[0].n_freqs();
    const int nt = samples.empty() ? 0 : samples[0].n_times();
    binio::write_u32(out, nc);
    binio::write_u32(out, nf);
    binio::write_u32(out, nt);
    if (!samples.empty()) {
        for (double f : samples[0].freqs_hz) binio::write_f32(out, static_cast<float>(f));
        for (double t : samples[0].times_s) binio::write_f32(out, static_cast<float>(t));
    }
    for (const Tfr& s : samples) {
        if (s.n_channels() != nc || s.n_freqs() != nf || s.n_times() != nt)
            throw std::runtime_error("store_tfr_archive: inconsistent sample shapes");
        binio::write_u32(out, s.trial_id);
        binio::write_u8(out, static_cast<uint8_t>(s.label));
        binio::write_u8(out, static_cast<uint8_t>(s.provenance));
        for (const auto& v : s.values)
            for (int f = 0; f < nf; ++f)
                for (int t = 0; t < nt; ++t) binio::write_f32(out, static_cast<float>(v(f, t)));
    }
}

std::vector<Tfr> load_tfr_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_tfr_archive: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTfrbMagic, 4) != 0)
        throw std::runtime_error("load_tfr_archive: bad magic in " + path);
    const uint32_t version = binio::read_u32(in);
    if (version != 1)
        throw std::runtime_error("load_tfr_archive: unsupported version " +
                                 std::to_string(version));
    const uint32_t n = binio::read_u32(in);
    const uint32_t nc = binio::read_u32(in);
    const uint32_t nf = binio::read_u32(in);
    const uint32_t nt = binio::read_u32(in);
    std::vector<double> freqs(nf), times(nt);
    if (n > 0) {
        for (auto& f : freqs) f = binio::read_f32(in);
        for (auto& t : times) t = binio::read_f32(in);
    }
    std::vector<Tfr> samples;
    for (uint32_t i = 0; i < n; ++i) {
        Tfr s;
        s.freqs_hz = freqs;
        s.times_s = times;
        s.trial_id = binio::read_u32(in);
        s.label = static_cast<Label>(binio::read_u8(in));
        s.provenance = static_cast<Provenance>(binio::read_u8(in));
        s.normalization = TfrNorm::UnitRange;
        for (uint32_t c = 0; c < nc; ++c) {
            Eigen::MatrixXd v(nf, nt);
            for (uint32_t f = 0; f < nf; ++f)
                for (uint32_t t = 0; t < nt; ++t) v(f, t) = binio::read_f32(in);
            s.values.push_back(std::move(v));
        }
        if (!in) throw std::runtime_error("load_tfr_archive: truncated at sample " +
                                          std::to_string(i));
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace eegaug
