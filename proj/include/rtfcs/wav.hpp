#pragma once

#include "rtfcs/signal.hpp"

#include <filesystem>
#include <vector>

namespace rtfcs {

enum class WavFormat { Pcm16, Float32 };

struct WavData {
    std::vector<RealVector> channels;
    double rate = 0.0;
    WavFormat format = WavFormat::Pcm16;
};

// 16-bit PCM and 32-bit IEEE float RIFF/WAVE, one or two channels.
// PCM samples are mapped to [-1, 1) by dividing by 32768.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const std::vector<RealVector>& channels, double rate,
               WavFormat format);

TimeSignal read_mono_wav(const std::filesystem::path& path);
StereoRecording read_stereo_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const TimeSignal& sig, WavFormat format = WavFormat::Float32);
void write_wav(const std::filesystem::path& path, const StereoRecording& rec,
               WavFormat format = WavFormat::Float32);

}  // namespace rtfcs
