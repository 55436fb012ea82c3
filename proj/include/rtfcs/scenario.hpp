#pragma once

#include "rtfcs/evaluation.hpp"
#include "rtfcs/signal.hpp"
#include "rtfcs/sparse.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtfcs {

struct SyntheticRirParams {
    Index length = 256;
    Index direct_delay = 0;
    double decay_rate = 0.02;  // envelope exp(-decay_rate * (i - direct_delay))
    double density = 0.1;      // fraction of post-direct taps that are nonzero
    std::uint64_t seed = 1;
};

// Unit tap at direct_delay followed by floor(density * (length - direct_delay - 1))
// reflections at random positions, each uniform in +-envelope.
ImpulseResponse synth_rir(const SyntheticRirParams& params);

// Inverse DFT of (H_R / H_L) e^{-i theta_k D} on the M-point grid. Both
// responses must fit in M taps. Throws NumericError naming the first bin
// where |H_L| < 1e-9 max|H_L|.
ImpulseResponse true_relative_ir(const ImpulseResponse& h_left, const ImpulseResponse& h_right, Index dft_len,
                                 Index delay);

// Speech-like test signal: voiced harmonic segments with gliding pitch,
// unvoiced noise bursts and pauses, normalized to unit RMS.
RealVector speech_like_signal(Index n, double rate, std::uint64_t seed, std::string_view stream);

RealVector white_noise(Index n, std::uint64_t seed, std::string_view stream);

enum class SourceKind { Wav, WhiteNoise, SpeechLike, PeriodicNoise };

struct SourceSpec {
    SourceKind kind = SourceKind::WhiteNoise;
    std::filesystem::path path;  // Wav
    Index period = 0;            // PeriodicNoise
};

enum class RirKind { Wav, Synthetic, Taps, Delta };

struct RirSpec {
    RirKind kind = RirKind::Delta;
    std::filesystem::path path;  // Wav (mono)
    SyntheticRirParams synthetic;
    std::vector<double> taps;
    Index delay = 0;  // Delta
};

struct RirPair {
    RirSpec left;
    RirSpec right;
};

enum class NoiseKind { Directional, Independent, Recorded };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Independent;
    SourceSpec source;
    std::optional<RirPair> rir;  // Directional only
    double gain = 1.0;           // relative level before the common scaling
};

struct TargetSpec {
    SourceSpec source;
    std::optional<RirPair> rir;  // absent: the source is a stereo recording of the images
};

struct AnalysisConfig {
    Index dft_len = 2048;
    Index hop = 64;
    WindowKind window = WindowKind::SqrtHann;
    Index delay = 100;
    Index nsfd_block_samples = 1000;
};

struct TrialConfig {
    double interval_s = 1.0;
    double overlap = 0.75;
};

struct ScenarioSpec {
    double sample_rate = 16000.0;
    double duration_s = 10.0;  // length of synthetic sources
    std::uint64_t seed = 1;
    double snr_in_db = 0.0;
    bool circular = false;  // circular convolution with period = signal length
    TargetSpec target;
    std::vector<NoiseSpec> noise;
    AnalysisConfig analysis;
    WeightProfileParams weights;  // delay and length follow `analysis`
    SolverConfig solver;
    TrialConfig trials;
};

struct Scenario {
    StereoRecording mixture;
    ScenarioTruth truth;
    double noise_scale = 1.0;
};

// Loads/synthesizes all sources, forms microphone images and scales the
// summed noise by one scalar so that snr_in equals spec.snr_in_db.
Scenario mix_at_snr(const ScenarioSpec& spec);

// Same, from already formed target and noise images (no RIRs involved).
Scenario mix_images(const StereoRecording& target, const StereoRecording& noise, double snr_in_db);

// JSON config with defaults filled in and relative paths resolved against
// the config file's directory. Throws ConfigError with the offending field.
ScenarioSpec load_scenario(const std::filesystem::path& path);
ScenarioSpec parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
// Fully resolved spec as JSON; parse_scenario(dump_scenario(s)) reproduces s.
std::string dump_scenario(const ScenarioSpec& spec);

}  // namespace rtfcs
