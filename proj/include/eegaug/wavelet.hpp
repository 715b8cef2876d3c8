#pragma once

#include "eegaug/data.hpp"

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace eegaug {

/// Complex Morlet basis parameters; the defaults encode CMOR3-3.
struct MorletParams {
    double bandwidth_fb = 3.0;
    double center_frequency_fc = 3.0;

    void validate() const {
        if (!(bandwidth_fb > 0.0) || !(center_frequency_fc > 0.0))
            throw std::invalid_argument("MorletParams: fb and fc must be positive");
    }
    /// Scale in seconds mapping a physical frequency onto the mother wavelet.
    double scale_for(double freq_hz) const { return center_frequency_fc / freq_hz; }
};

/// Complex CWT coefficients, channels x freqs x times.
struct Scalogram {
    std::vector<double> freqs_hz;
    std::vector<double> times_s;
    std::vector<Eigen::MatrixXcd> coeffs;  // one freqs x times matrix per channel
    double sample_rate_hz = 0.0;
    Label label = Label::LeftHand;
    uint32_t trial_id = 0;

    int n_channels() const { return static_cast<int>(coeffs.size()); }
};

enum class TfrNorm : uint8_t { None, UnitRange };

/// Real magnitude grid fed to the networks; optionally mapped to [-1,1]
/// with the affine map retained so it can be undone.
struct Tfr {
    std::vector<double> freqs_hz;
    std::vector<double> times_s;
    std::vector<Eigen::MatrixXd> values;  // per channel, freqs x times
    Label label = Label::LeftHand;
    uint32_t trial_id = 0;
    Provenance provenance = Provenance::Raw;
    TfrNorm normalization = TfrNorm::None;
    double norm_min = 0.0;   // affine map inputs, valid when UnitRange
    double norm_span = 1.0;

    int n_channels() const { return static_cast<int>(values.size()); }
    int n_freqs() const { return static_cast<int>(freqs_hz.size()); }
    int n_times() const { return static_cast<int>(times_s.size()); }
};

/// L2-normalized daughter wavelet sampled at the signal rate, truncated at
/// +-4 standard deviations of the Gaussian envelope.
Eigen::VectorXcd morlet_daughter(double freq_hz, double sample_rate_hz,
                                 const MorletParams& params);

Scalogram cwt(const EegTrial& trial, const std::vector<double>& freqs_hz,
              const MorletParams& params);

Tfr tfr_magnitude(const Scalogram& scalogram, int downsample_time_to, bool normalize);

/// Scalar gain minimizing L2 error of the real-part reconstruction against
/// a band-spanning sinusoid probe; pair with icwt on the same grid.
double calibrate_inverse(const MorletParams& params, const std::vector<double>& freqs_hz,
                         double sample_rate_hz);

/// Real-part reconstruction: s(t) = gain * sum_f Re(C[f][t]) / sqrt(a_f).
EegTrial icwt(const Scalogram& scalogram, double gain, const MorletParams& params);

/// Geometric grid carrying the df/f measure the reconstruction sum needs;
/// the linear analysis grid keeps too little low-frequency weight to invert.
std::vector<double> reconstruction_grid(double f_lo = 6.5, double f_hi = 16.0, int n = 16);

/// 7..15 Hz inclusive at 1 Hz: the 9-row analysis grid.
std::vector<double> alpha_band_grid();

// TFRB archive: magic "TFRB", shared axes, per-sample id/label/provenance.
void store_tfr_archive(const std::string& path, const std::vector<Tfr>& samples);
std::vector<Tfr> load_tfr_archive(const std::string& path);

}  // namespace eegaug
