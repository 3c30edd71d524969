// SPDX-License-Identifier: Apache-2.0
//
// Arrays of random flip-flops with per-pixel process variation, global
// control voltages, serialized readout and spatial / sweep reports.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "qrff/bitstream.hpp"
#include "qrff/eventsim.hpp"

namespace qrff::arraysim {

/// Distributions the per-pixel parameters are drawn from. Every pixel draws
/// the same six normals in the same order, so changing one spread never
/// shifts another draw.
struct VariationSpec {
    double breakdown_mean = 32.9;   ///< V
    double breakdown_sigma = 0.1;   ///< V, Gaussian
    double dcr_median = 100.0;      ///< counts/s, log-normal body
    double dcr_log_sigma = 0.5;     ///< sigma of ln(dcr)
    double hot_fraction = 3.0 / 2240.0;
    double hot_dcr = 2e4;           ///< counts/s of a hot pixel
    std::vector<std::size_t> hot_pixels;  ///< always hot, on top of the random ones
    double edge_sigma = 0.0;        ///< s, Gaussian delta on t_r and t_f each
    double eta_offset_sigma = 0.01; ///< comparator offset

    /// All spreads zero: every pixel gets the nominal parameters.
    static VariationSpec none();
};

void validate(const VariationSpec& v);

struct PixelVariation {
    double breakdown_voltage = 0.0;
    double dcr = 0.0;
    double dt_r = 0.0;
    double dt_f = 0.0;
    double threshold_offset = 0.0;
    bool hot = false;
};

enum class SubArray { A1, A2, Custom };

struct ArrayConfig {
    SubArray sub_array = SubArray::A1;
    std::size_t rows = 70;
    std::size_t cols = 32;
    double v_op = 33.5;          ///< V
    double i_led = 2.0;          ///< mA
    double led_gain = 20e6;      ///< photons/s reaching avalanche per mA
    double eta_global = 0.5;
    double f_bg = 25e6;
    double phase = 0.0;
    eventsim::EdgeShape edges{100e-12, 100e-12};
    double dead_time_hold = 1e-9;
    double dead_time_recharge = 0.0;
    double afterpulse_prob = 0.0;
    double trap_lifetime = 20e-9;
    std::size_t serializer_ratio = 70;

    std::size_t n_pixels() const { return rows * cols; }
    /// Lead-in shared by every pixel so that all sample on the same clock
    /// edges: 100 mean detection periods of a nominal pixel, whole periods.
    double shared_warmup() const;

    static ArrayConfig a1();  ///< 70 x 32
    static ArrayConfig a2();  ///< 70 x 8
    static ArrayConfig single_pixel();
};

void validate(const ArrayConfig& c);

struct Pixel {
    std::size_t index = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    PixelVariation variation;
    eventsim::QrffConfig qrff;
    bool active = false;  ///< v_op above breakdown
    /// Output level of a pixel that never toggles or whose threshold sits
    /// outside (0, 1); only meaningful when stuck().
    bool stuck_level = false;

    bool stuck() const { return !active || qrff.eta <= 0.0 || qrff.eta >= 1.0; }
};

struct Array {
    ArrayConfig config;
    std::vector<Pixel> pixels;
};

/// Pixel i draws from substream (seed, i), so its parameters do not depend on
/// any other pixel or on the global controls.
Array build_array(const ArrayConfig& config, const VariationSpec& variation, std::uint64_t seed);

struct ArrayResult {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<BitStream> bits;     ///< per pixel, empty in count-bypass mode
    std::vector<double> count_rate;  ///< realized detections/s per pixel
    std::vector<double> dcr;         ///< drawn dark count rate per pixel
};

/// Pixel i runs simulate_qrff_bits with substream (seed, i).
ArrayResult simulate_array(const Array& array, std::size_t n_bits, std::uint64_t seed,
                           unsigned threads = 1);

/// Count-bypass readout: detections per pixel over `duration`, no bits.
ArrayResult count_bypass(const Array& array, double duration, std::uint64_t seed, unsigned threads = 1);

enum class Metric { Bias, A1, CountRate, Dcr };

std::string_view name(Metric m);

struct SpatialMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Metric metric = Metric::Bias;
    std::vector<double> values;  ///< row-major; NaN where undefined (a1 of a constant stream)
    double max_abs = 0.0;
    double rms = 0.0;

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
};

SpatialMap spatial_map(const ArrayResult& result, Metric metric);

enum class SweepParam { EtaGlobal, ILed, VOp, FBg, TRise, TFall };

std::string_view name(SweepParam p);

struct SweepPoint {
    double value = 0.0;
    double mean_bias = 0.0;
    double rms_bias = 0.0;
    double mean_a1 = 0.0;  ///< over pixels where a1 is defined
    double rms_a1 = 0.0;
    double compliant_fraction = 0.0;
    std::size_t active_pixels = 0;
    /// Closed-form bias and lag-1 coefficient of a nominal pixel (no
    /// variation, expected detection rate); NaN outside the model's domain.
    double model_bias = 0.0;
    double model_a1 = 0.0;
    /// Binomial error of mean_bias, 1 / (2 sqrt(n_bits * pixel count)).
    double sigma_mean_bias = 0.0;
};

struct SweepReport {
    SweepParam param = SweepParam::EtaGlobal;
    std::size_t n_bits = 0;
    std::vector<SweepPoint> points;
};

/// Every point rebuilds the array from the same seed, so pixel draws are
/// shared across points and only the swept control changes.
SweepReport sweep(const ArrayConfig& base, const VariationSpec& variation, SweepParam param,
                  std::span<const double> values, std::size_t n_bits, std::uint64_t seed,
                  unsigned threads = 1);

/// Channel c carries pixels c*ratio .. c*ratio + ratio - 1, interleaved frame
/// by frame: pixel 0 bit k, pixel 1 bit k, ..., then bit k + 1.
std::vector<BitStream> serialize_readout(std::span<const BitStream> pixels, std::size_t ratio);
std::vector<BitStream> deserialize_readout(std::span<const BitStream> channels, std::size_t ratio);

/// Barker-7, repeated across the frame.
BitStream default_training_pattern();

/// n_frames frames in which slot j carries pattern[j % pattern.size()].
BitStream pattern_training_frame(const BitStream& pattern, std::size_t ratio, std::size_t n_frames = 1);

/// True iff the channel is whole frames that each match the training frame.
bool check_alignment(const BitStream& channel, const BitStream& pattern, std::size_t ratio);

/// pixel,row,col,value
void write_csv(std::ostream& out, const SpatialMap& map);
/// parameter,value,mean_bias,rms_bias,mean_a1,rms_a1,compliant_fraction,active_pixels,
/// model_bias,model_a1,sigma_mean_bias
void write_csv(std::ostream& out, const SweepReport& report);

}  // namespace qrff::arraysim
