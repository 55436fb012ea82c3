#include "rtfcs/wav.hpp"

#include "rtfcs/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace rtfcs {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t pos) {
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    return v;
}

template <typename T>
void put_le(std::string& out, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    out.append(bytes, sizeof(T));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open WAV file " + path.string());
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto fail = [&](const std::string& why) { throw IoError(path.string() + ": " + why); };

    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        fail("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t data_pos = 0, data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id(buf.data() + pos, 4);
        const auto len = read_le<std::uint32_t>(buf, pos + 4);
        const std::size_t body = pos + 8;
        if (body + len > buf.size() && id != "data") fail("truncated chunk '" + id + "'");
        if (id == "fmt ") {
            if (len < 16) fail("fmt chunk too short");
            format = read_le<std::uint16_t>(buf, body);
            channels = read_le<std::uint16_t>(buf, body + 2);
            rate = read_le<std::uint32_t>(buf, body + 4);
            bits = read_le<std::uint16_t>(buf, body + 14);
            if (format == kFormatExtensible) {
                if (len < 26) fail("extensible fmt chunk too short");
                format = read_le<std::uint16_t>(buf, body + 24);
            }
            have_fmt = true;
        } else if (id == "data") {
            data_pos = body;
            data_len = std::min<std::size_t>(len, buf.size() - body);
            break;
        }
        pos = body + len + (len & 1u);
    }
    if (!have_fmt) fail("missing fmt chunk");
    if (data_pos == 0) fail("missing data chunk");
    if (channels < 1 || channels > 2) fail("only mono and stereo files are supported");
    if (rate == 0) fail("zero sample rate");

    WavData out;
    out.rate = rate;
    std::size_t bytes_per_sample = 0;
    if (format == kFormatPcm && bits == 16) {
        out.format = WavFormat::Pcm16;
        bytes_per_sample = 2;
    } else if (format == kFormatFloat && bits == 32) {
        out.format = WavFormat::Float32;
        bytes_per_sample = 4;
    } else {
        fail("unsupported sample format (tag " + std::to_string(format) + ", " + std::to_string(bits) + " bits)");
    }

    const std::size_t frame_bytes = bytes_per_sample * channels;
    const auto frames = static_cast<Index>(data_len / frame_bytes);
    out.channels.assign(channels, RealVector(frames));
    for (Index n = 0; n < frames; ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = data_pos + static_cast<std::size_t>(n) * frame_bytes + c * bytes_per_sample;
            double v = 0.0;
            if (out.format == WavFormat::Pcm16) {
                v = read_le<std::int16_t>(buf, at) / 32768.0;
            } else {
                v = read_le<float>(buf, at);
                if (!std::isfinite(v)) fail("non-finite sample at frame " + std::to_string(n));
            }
            out.channels[c](n) = v;
        }
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<RealVector>& channels, double rate,
               WavFormat format) {
    if (channels.empty() || channels.size() > 2) throw InvalidArgument("write_wav: one or two channels required");
    const Index frames = channels.front().size();
    for (const auto& c : channels)
        if (c.size() != frames) throw DimensionError("write_wav: channel lengths differ");
    if (!(rate > 0.0)) throw InvalidArgument("write_wav: rate must be positive");

    const auto nch = static_cast<std::uint16_t>(channels.size());
    const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
    const std::uint16_t block_align = static_cast<std::uint16_t>(nch * bits / 8);
    const auto data_len = static_cast<std::uint32_t>(frames * block_align);
    const auto srate = static_cast<std::uint32_t>(std::lround(rate));

    std::string out;
    out.reserve(44 + data_len);
    out.append("RIFF");
    put_le<std::uint32_t>(out, 36 + data_len);
    out.append("WAVEfmt ");
    put_le<std::uint32_t>(out, 16);
    put_le<std::uint16_t>(out, format == WavFormat::Pcm16 ? kFormatPcm : kFormatFloat);
    put_le<std::uint16_t>(out, nch);
    put_le<std::uint32_t>(out, srate);
    put_le<std::uint32_t>(out, srate * block_align);
    put_le<std::uint16_t>(out, block_align);
    put_le<std::uint16_t>(out, bits);
    out.append("data");
    put_le<std::uint32_t>(out, data_len);
    for (Index n = 0; n < frames; ++n) {
        for (const auto& c : channels) {
            if (format == WavFormat::Pcm16) {
                const double s = std::clamp(std::round(c(n) * 32768.0), -32768.0, 32767.0);
                put_le<std::int16_t>(out, static_cast<std::int16_t>(s));
            } else {
                put_le<float>(out, static_cast<float>(c(n)));
            }
        }
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write WAV file " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to " + path.string());
}

TimeSignal read_mono_wav(const std::filesystem::path& path) {
    WavData d = read_wav(path);
    if (d.channels.size() != 1) throw IoError(path.string() + ": expected a mono file");
    return TimeSignal(std::move(d.channels.front()), d.rate);
}

StereoRecording read_stereo_wav(const std::filesystem::path& path) {
    WavData d = read_wav(path);
    if (d.channels.size() != 2) throw IoError(path.string() + ": expected a stereo file");
    return {TimeSignal(std::move(d.channels[0]), d.rate), TimeSignal(std::move(d.channels[1]), d.rate)};
}

void write_wav(const std::filesystem::path& path, const TimeSignal& sig, WavFormat format) {
    write_wav(path, std::vector<RealVector>{sig.samples()}, sig.rate(), format);
}

void write_wav(const std::filesystem::path& path, const StereoRecording& rec, WavFormat format) {
    write_wav(path, std::vector<RealVector>{rec.left().samples(), rec.right().samples()}, rec.rate(), format);
}

}  // namespace rtfcs
