#include "rtfcs/scenario.hpp"

#include "rtfcs/dft.hpp"
#include "rtfcs/error.hpp"
#include "rtfcs/rng.hpp"
#include "rtfcs/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

namespace rtfcs {

using nlohmann::json;

ImpulseResponse synth_rir(const SyntheticRirParams& p) {
    if (p.length < 1 || p.direct_delay < 0 || p.direct_delay >= p.length)
        throw InvalidArgument("synth_rir: direct_delay must lie in [0, length)");
    if (!(p.decay_rate > 0.0)) throw InvalidArgument("synth_rir: decay_rate must be positive");
    if (!(p.density > 0.0 && p.density <= 1.0)) throw InvalidArgument("synth_rir: density must lie in (0, 1]");

    ImpulseResponse h{RealVector::Zero(p.length), 0};
    h.taps(p.direct_delay) = 1.0;
    const Index tail = p.length - p.direct_delay - 1;
    const auto count = static_cast<Index>(std::floor(p.density * static_cast<double>(tail)));

    // Partial Fisher-Yates over the tail positions.
    std::vector<Index> pos(static_cast<std::size_t>(tail));
    for (Index i = 0; i < tail; ++i) pos[static_cast<std::size_t>(i)] = p.direct_delay + 1 + i;
    CounterRng rng(p.seed, "synth_rir");
    for (Index i = 0; i < count; ++i) {
        const auto j = i + static_cast<Index>(rng.uniform() * static_cast<double>(tail - i));
        std::swap(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(std::min(j, tail - 1))]);
        const Index at = pos[static_cast<std::size_t>(i)];
        const double env = std::exp(-p.decay_rate * static_cast<double>(at - p.direct_delay));
        h.taps(at) = env * rng.uniform(-1.0, 1.0);
    }
    return h;
}

ImpulseResponse true_relative_ir(const ImpulseResponse& h_left, const ImpulseResponse& h_right, Index dft_len,
                                 Index delay) {
    if (dft_len < 4 || dft_len % 2 != 0) throw InvalidArgument("true_relative_ir: dft_len must be even and >= 4");
    if (h_left.size() > dft_len || h_right.size() > dft_len)
        throw DimensionError("true_relative_ir: responses longer than dft_len");
    RealVector a = RealVector::Zero(dft_len);
    RealVector b = RealVector::Zero(dft_len);
    a.head(h_left.size()) = h_left.taps;
    b.head(h_right.size()) = h_right.taps;
    RealFft fft(dft_len);
    const ComplexVector hl = fft.forward_half(a);
    const ComplexVector hr = fft.forward_half(b);
    const double peak = hl.cwiseAbs().maxCoeff();
    ComplexVector ratio(hl.size());
    for (Index k = 0; k < hl.size(); ++k) {
        if (!(std::abs(hl(k)) >= 1e-9 * peak))
            throw NumericError("true_relative_ir: left response vanishes at bin " + std::to_string(k));
        ratio(k) = hr(k) / hl(k) * std::polar(1.0, -bin_frequency(k, dft_len) * static_cast<double>(delay));
    }
    return {fft.inverse_half(ratio), delay};
}

RealVector white_noise(Index n, std::uint64_t seed, std::string_view stream) {
    CounterRng rng(seed, stream);
    RealVector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.normal();
    return x;
}

RealVector speech_like_signal(Index n, double rate, std::uint64_t seed, std::string_view stream) {
    CounterRng rng(seed, stream);
    RealVector x = RealVector::Zero(n);
    const double two_pi = 2.0 * std::numbers::pi;
    Index at = 0;
    while (at < n) {
        const auto len = std::min<Index>(n - at, static_cast<Index>(rate * rng.uniform(0.08, 0.25)));
        const double kind = rng.uniform();
        const double gain = std::exp(rng.uniform(-1.5, 1.5));
        if (kind < 0.6) {
            // Voiced: harmonic stack with a linear pitch glide.
            const double f0 = rng.uniform(100.0, 220.0);
            const double glide = rng.uniform(-0.3, 0.3);
            const int harmonics = static_cast<int>(std::min(40.0, 0.45 * rate / (f0 * 1.3)));
            std::vector<double> amp(static_cast<std::size_t>(harmonics)), phase(amp.size());
            for (int h = 0; h < harmonics; ++h) {
                amp[static_cast<std::size_t>(h)] = rng.uniform(0.3, 1.0) / (1.0 + h);
                phase[static_cast<std::size_t>(h)] = rng.uniform(0.0, two_pi);
            }
            double ph = 0.0;
            for (Index i = 0; i < len; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(len);
                ph += two_pi * f0 * (1.0 + glide * t) / rate;
                const double env = std::sin(std::numbers::pi * t);
                double v = 0.0;
                for (int h = 0; h < harmonics; ++h)
                    v += amp[static_cast<std::size_t>(h)] * std::sin((h + 1) * ph + phase[static_cast<std::size_t>(h)]);
                x(at + i) = gain * env * v;
            }
        } else if (kind < 0.75) {
            // Unvoiced burst: first-difference (high-tilted) noise.
            double prev = 0.0;
            for (Index i = 0; i < len; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(len);
                const double w = rng.normal();
                x(at + i) = 0.3 * gain * std::sin(std::numbers::pi * t) * (w - prev);
                prev = w;
            }
        } else {
            for (Index i = 0; i < len; ++i) x(at + i) = 1e-3 * rng.normal();
        }
        at += std::max<Index>(len, 1);
    }
    const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(std::max<Index>(n, 1)));
    if (rms > 0.0) x /= rms;
    return x;
}

namespace {

Index synthetic_length(const ScenarioSpec& spec) {
    return static_cast<Index>(std::llround(spec.duration_s * spec.sample_rate));
}

RealVector load_source(const SourceSpec& src, const ScenarioSpec& spec, const std::string& stream) {
    const Index n = synthetic_length(spec);
    switch (src.kind) {
        case SourceKind::Wav: {
            const WavData d = read_wav(src.path);
            if (d.rate != spec.sample_rate)
                throw ConfigError(src.path.string() + ": sample rate " + std::to_string(d.rate) +
                                  " differs from scenario rate");
            return d.channels.front();
        }
        case SourceKind::WhiteNoise: return white_noise(n, spec.seed, stream);
        case SourceKind::SpeechLike: return speech_like_signal(n, spec.sample_rate, spec.seed, stream);
        case SourceKind::PeriodicNoise: {
            if (src.period < 1) throw ConfigError(stream + ": periodic_noise needs a positive period");
            const RealVector one = white_noise(src.period, spec.seed, stream);
            RealVector x(n);
            for (Index i = 0; i < n; ++i) x(i) = one(i % src.period);
            return x;
        }
    }
    return {};
}

StereoRecording load_stereo_source(const SourceSpec& src, const ScenarioSpec& spec, const std::string& what) {
    if (src.kind != SourceKind::Wav) throw ConfigError(what + ": a recorded image pair must come from a WAV file");
    const WavData d = read_wav(src.path);
    if (d.channels.size() != 2) throw ConfigError(what + ": " + src.path.string() + " must be stereo");
    if (d.rate != spec.sample_rate) throw ConfigError(what + ": sample rate differs from scenario rate");
    return {TimeSignal(d.channels[0], d.rate), TimeSignal(d.channels[1], d.rate)};
}

ImpulseResponse load_rir(const RirSpec& r) {
    switch (r.kind) {
        case RirKind::Wav: return {read_mono_wav(r.path).samples(), 0};
        case RirKind::Synthetic: return synth_rir(r.synthetic);
        case RirKind::Taps: return {Eigen::Map<const RealVector>(r.taps.data(), static_cast<Index>(r.taps.size())), 0};
        case RirKind::Delta: {
            ImpulseResponse h{RealVector::Zero(r.delay + 1), 0};
            h.taps(r.delay) = 1.0;
            return h;
        }
    }
    return {};
}

RealVector apply_rir(const ImpulseResponse& h, const RealVector& x, bool circular) {
    if (h.size() == 0) throw ConfigError("empty impulse response");
    return circular ? convolve_circular(h.taps, x) : convolve(h.taps, x, ConvolutionMode::Truncated);
}

Scenario finish_mix(RealVector sl, RealVector sr, RealVector yl, RealVector yr, double rate, double snr_in_db) {
    const double target = sl.squaredNorm() + sr.squaredNorm();
    const double noise = yl.squaredNorm() + yr.squaredNorm();
    if (!(target > 0.0)) throw InvalidArgument("mix: target images have zero energy");
    if (!(noise > 0.0)) throw InvalidArgument("mix: noise images have zero energy");
    const double scale = std::sqrt(target / (noise * std::pow(10.0, snr_in_db / 10.0)));
    yl *= scale;
    yr *= scale;
    Scenario out;
    out.noise_scale = scale;
    RealVector xl = sl + yl;
    RealVector xr = sr + yr;
    out.mixture = StereoRecording(TimeSignal(std::move(xl), rate), TimeSignal(std::move(xr), rate));
    out.truth.s_left = TimeSignal(std::move(sl), rate);
    out.truth.s_right = TimeSignal(std::move(sr), rate);
    out.truth.y_left = TimeSignal(std::move(yl), rate);
    out.truth.y_right = TimeSignal(std::move(yr), rate);
    return out;
}

}  // namespace

Scenario mix_images(const StereoRecording& target, const StereoRecording& noise, double snr_in_db) {
    if (target.size() != noise.size()) throw DimensionError("mix_images: target and noise lengths differ");
    if (target.rate() != noise.rate()) throw InvalidArgument("mix_images: rates differ");
    return finish_mix(target.left().samples(), target.right().samples(), noise.left().samples(),
                      noise.right().samples(), target.rate(), snr_in_db);
}

Scenario mix_at_snr(const ScenarioSpec& spec) {
    if (spec.noise.empty()) throw ConfigError("noise: at least one noise source is required");
    if (!(spec.sample_rate > 0.0)) throw ConfigError("sample_rate: must be positive");

    std::vector<std::pair<RealVector, RealVector>> images;
    std::optional<ImpulseResponse> h_rel;

    if (spec.target.rir) {
        const RealVector s = load_source(spec.target.source, spec, "target");
        const ImpulseResponse hl = load_rir(spec.target.rir->left);
        const ImpulseResponse hr = load_rir(spec.target.rir->right);
        images.emplace_back(apply_rir(hl, s, spec.circular), apply_rir(hr, s, spec.circular));
        if (hl.size() <= spec.analysis.dft_len && hr.size() <= spec.analysis.dft_len) {
            try {
                h_rel = true_relative_ir(hl, hr, spec.analysis.dft_len, spec.analysis.delay);
            } catch (const NumericError&) {
                h_rel.reset();
            }
        }
    } else {
        const StereoRecording t = load_stereo_source(spec.target.source, spec, "target");
        images.emplace_back(t.left().samples(), t.right().samples());
    }

    for (std::size_t i = 0; i < spec.noise.size(); ++i) {
        const NoiseSpec& ns = spec.noise[i];
        const std::string name = "noise" + std::to_string(i);
        switch (ns.kind) {
            case NoiseKind::Directional: {
                if (!ns.rir) throw ConfigError(name + ": directional noise needs an rir pair");
                const RealVector v = load_source(ns.source, spec, name);
                images.emplace_back(ns.gain * apply_rir(load_rir(ns.rir->left), v, spec.circular),
                                    ns.gain * apply_rir(load_rir(ns.rir->right), v, spec.circular));
                break;
            }
            case NoiseKind::Independent: {
                if (ns.source.kind == SourceKind::Wav)
                    throw ConfigError(name + ": independent noise must be synthetic");
                images.emplace_back(ns.gain * load_source(ns.source, spec, name + ".left"),
                                    ns.gain * load_source(ns.source, spec, name + ".right"));
                break;
            }
            case NoiseKind::Recorded: {
                const StereoRecording r = load_stereo_source(ns.source, spec, name);
                images.emplace_back(ns.gain * r.left().samples(), ns.gain * r.right().samples());
                break;
            }
        }
    }

    // All sources are cut to the shortest one.
    Index n = images.front().first.size();
    for (const auto& [l, r] : images) n = std::min({n, l.size(), r.size()});
    if (n < 1) throw ConfigError("scenario: sources are empty");

    RealVector yl = RealVector::Zero(n);
    RealVector yr = RealVector::Zero(n);
    for (std::size_t i = 1; i < images.size(); ++i) {
        yl += images[i].first.head(n);
        yr += images[i].second.head(n);
    }
    Scenario out = finish_mix(images.front().first.head(n), images.front().second.head(n), std::move(yl),
                              std::move(yr), spec.sample_rate, spec.snr_in_db);
    out.truth.h_rel = std::move(h_rel);
    return out;
}

// ---------------------------------------------------------------------------
// Config file

namespace {

class Field {
public:
    Field(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!j_.is_object()) fail("expected an object");
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) Field(it.value(), child(it.key())).fail("unknown field");
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
    Field at(const char* key) const {
        if (!has(key)) Field(j_, child(key)).fail("required field is missing");
        return {j_.at(key), child(key)};
    }
    Field at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }
    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    Index integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<Index>();
    }
    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }
    bool boolean() const {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }

    double number(const char* key, double dflt) const { return has(key) ? at(key).number() : dflt; }
    Index integer(const char* key, Index dflt) const { return has(key) ? at(key).integer() : dflt; }
    std::string string(const char* key, const std::string& dflt) const {
        return has(key) ? at(key).string() : dflt;
    }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
};

std::filesystem::path resolve_path(const Field& f, const std::filesystem::path& base) {
    std::filesystem::path p = f.string();
    if (p.empty()) f.fail("empty path");
    if (p.is_relative()) p = base / p;
    return std::filesystem::absolute(p).lexically_normal();
}

SourceSpec parse_source(const Field& f, const std::filesystem::path& base) {
    f.allow({"type", "path", "period"});
    SourceSpec s;
    const std::string type = f.at("type").string();
    if (type == "wav") {
        s.kind = SourceKind::Wav;
        s.path = resolve_path(f.at("path"), base);
    } else if (type == "white_noise") {
        s.kind = SourceKind::WhiteNoise;
    } else if (type == "speech_like") {
        s.kind = SourceKind::SpeechLike;
    } else if (type == "periodic_noise") {
        s.kind = SourceKind::PeriodicNoise;
        s.period = f.at("period").integer();
        if (s.period < 1) f.at("period").fail("must be >= 1");
    } else {
        f.at("type").fail("expected one of wav, white_noise, speech_like, periodic_noise");
    }
    if (s.kind != SourceKind::Wav && f.has("path")) f.at("path").fail("only valid for type wav");
    if (s.kind != SourceKind::PeriodicNoise && f.has("period")) f.at("period").fail("only valid for periodic_noise");
    return s;
}

RirSpec parse_rir(const Field& f, const std::filesystem::path& base) {
    f.allow({"type", "path", "length", "direct_delay", "decay_rate", "density", "seed", "taps", "delay"});
    RirSpec r;
    const std::string type = f.at("type").string();
    if (type == "wav") {
        r.kind = RirKind::Wav;
        r.path = resolve_path(f.at("path"), base);
    } else if (type == "synthetic") {
        r.kind = RirKind::Synthetic;
        SyntheticRirParams& p = r.synthetic;
        p.length = f.integer("length", p.length);
        p.direct_delay = f.integer("direct_delay", p.direct_delay);
        p.decay_rate = f.number("decay_rate", p.decay_rate);
        p.density = f.number("density", p.density);
        p.seed = static_cast<std::uint64_t>(f.integer("seed", static_cast<Index>(p.seed)));
        if (p.length < 1) f.at("length").fail("must be >= 1");
        if (p.direct_delay < 0 || p.direct_delay >= p.length) f.fail("direct_delay must lie in [0, length)");
        if (!(p.decay_rate > 0.0)) f.fail("decay_rate must be positive");
        if (!(p.density > 0.0 && p.density <= 1.0)) f.fail("density must lie in (0, 1]");
    } else if (type == "taps") {
        r.kind = RirKind::Taps;
        const Field taps = f.at("taps");
        if (!taps.raw().is_array() || taps.raw().empty()) taps.fail("expected a nonempty array of numbers");
        for (std::size_t i = 0; i < taps.raw().size(); ++i) r.taps.push_back(taps.at(i).number());
    } else if (type == "delta") {
        r.kind = RirKind::Delta;
        r.delay = f.integer("delay", 0);
        if (r.delay < 0) f.at("delay").fail("must be >= 0");
    } else {
        f.at("type").fail("expected one of wav, synthetic, taps, delta");
    }
    return r;
}

RirPair parse_rir_pair(const Field& f, const std::filesystem::path& base) {
    f.allow({"left", "right"});
    return {parse_rir(f.at("left"), base), parse_rir(f.at("right"), base)};
}

json source_json(const SourceSpec& s) {
    switch (s.kind) {
        case SourceKind::Wav: return {{"type", "wav"}, {"path", s.path.string()}};
        case SourceKind::WhiteNoise: return {{"type", "white_noise"}};
        case SourceKind::SpeechLike: return {{"type", "speech_like"}};
        case SourceKind::PeriodicNoise: return {{"type", "periodic_noise"}, {"period", s.period}};
    }
    return {};
}

json rir_json(const RirSpec& r) {
    switch (r.kind) {
        case RirKind::Wav: return {{"type", "wav"}, {"path", r.path.string()}};
        case RirKind::Synthetic:
            return {{"type", "synthetic"},
                    {"length", r.synthetic.length},
                    {"direct_delay", r.synthetic.direct_delay},
                    {"decay_rate", r.synthetic.decay_rate},
                    {"density", r.synthetic.density},
                    {"seed", r.synthetic.seed}};
        case RirKind::Taps: return {{"type", "taps"}, {"taps", r.taps}};
        case RirKind::Delta: return {{"type", "delta"}, {"delay", r.delay}};
    }
    return {};
}

json pair_json(const RirPair& p) { return {{"left", rir_json(p.left)}, {"right", rir_json(p.right)}}; }

}  // namespace

ScenarioSpec parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const Field f(root, "");
    f.allow({"sample_rate", "duration_s", "seed", "snr_in_db", "convolution", "target", "noise", "analysis",
             "weights", "solver", "trials"});

    ScenarioSpec s;
    s.sample_rate = f.number("sample_rate", s.sample_rate);
    if (!(s.sample_rate > 0.0)) f.at("sample_rate").fail("must be positive");
    s.duration_s = f.number("duration_s", s.duration_s);
    if (!(s.duration_s > 0.0)) f.at("duration_s").fail("must be positive");
    const Index seed = f.integer("seed", static_cast<Index>(s.seed));
    if (seed < 0) f.at("seed").fail("must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    s.snr_in_db = f.number("snr_in_db", s.snr_in_db);
    const std::string conv = f.string("convolution", "linear");
    if (conv != "linear" && conv != "circular") f.at("convolution").fail("expected linear or circular");
    s.circular = conv == "circular";

    const Field target = f.at("target");
    target.allow({"source", "rir"});
    s.target.source = parse_source(target.at("source"), base_dir);
    if (target.has("rir")) s.target.rir = parse_rir_pair(target.at("rir"), base_dir);

    if (!f.has("noise")) f.at("noise");
    const Field noise = f.at("noise");
    if (!noise.raw().is_array() || noise.raw().empty()) noise.fail("at least one noise source is required");
    for (std::size_t i = 0; i < noise.raw().size(); ++i) {
        const Field n = noise.at(i);
        n.allow({"type", "source", "rir", "gain"});
        NoiseSpec ns;
        ns.source = parse_source(n.at("source"), base_dir);
        if (n.has("rir")) ns.rir = parse_rir_pair(n.at("rir"), base_dir);
        const std::string dflt = ns.rir ? "directional" : (ns.source.kind == SourceKind::Wav ? "recorded" : "independent");
        const std::string type = n.string("type", dflt);
        if (type == "directional") {
            ns.kind = NoiseKind::Directional;
            if (!ns.rir) n.fail("directional noise needs an rir pair");
        } else if (type == "independent") {
            ns.kind = NoiseKind::Independent;
            if (ns.source.kind == SourceKind::Wav) n.at("source").fail("independent noise must be synthetic");
        } else if (type == "recorded") {
            ns.kind = NoiseKind::Recorded;
            if (ns.source.kind != SourceKind::Wav) n.at("source").fail("recorded noise must be a stereo WAV");
        } else {
            n.at("type").fail("expected one of directional, independent, recorded");
        }
        if (ns.kind != NoiseKind::Directional && ns.rir) n.at("rir").fail("only valid for directional noise");
        ns.gain = n.number("gain", 1.0);
        if (!(ns.gain > 0.0)) n.at("gain").fail("must be positive");
        s.noise.push_back(std::move(ns));
    }
    if (!s.target.rir && s.target.source.kind != SourceKind::Wav)
        target.fail("a synthetic target source needs an rir pair");

    if (f.has("analysis")) {
        const Field a = f.at("analysis");
        a.allow({"dft_len", "hop", "window", "delay", "nsfd_block_samples"});
        s.analysis.dft_len = a.integer("dft_len", s.analysis.dft_len);
        s.analysis.hop = a.integer("hop", s.analysis.hop);
        try {
            s.analysis.window = parse_window(a.string("window", std::string(window_name(s.analysis.window))));
        } catch (const InvalidArgument&) {
            a.at("window").fail("expected rectangular, hann or sqrt_hann");
        }
        s.analysis.delay = a.integer("delay", s.analysis.delay);
        s.analysis.nsfd_block_samples = a.integer("nsfd_block_samples", s.analysis.nsfd_block_samples);
    }
    const AnalysisConfig& an = s.analysis;
    if (an.dft_len < 4 || an.dft_len % 2 != 0) f.fail("analysis.dft_len must be even and >= 4");
    if (an.hop < 1 || an.hop > an.dft_len) f.fail("analysis.hop must lie in [1, dft_len]");
    if (an.delay < 0 || an.delay >= an.dft_len) f.fail("analysis.delay must lie in [0, dft_len)");
    if (an.nsfd_block_samples < 1) f.fail("analysis.nsfd_block_samples must be >= 1");

    if (f.has("weights")) {
        const Field w = f.at("weights");
        w.allow({"c1", "c2", "c3"});
        s.weights.c1 = w.number("c1", s.weights.c1);
        s.weights.c2 = w.number("c2", s.weights.c2);
        s.weights.c3 = w.number("c3", s.weights.c3);
        if (!(s.weights.c1 > 0.0 && s.weights.c2 > 0.0 && s.weights.c3 > 0.0)) w.fail("c1, c2, c3 must be positive");
    }
    s.weights.delay = an.delay;
    s.weights.length = an.dft_len;

    if (f.has("solver")) {
        const Field v = f.at("solver");
        v.allow({"alpha_min", "alpha_max", "tol", "max_iters", "alpha0", "require_dual_feasibility",
                 "nonmonotone_memory", "sufficient_decrease"});
        s.solver.alpha_min = v.number("alpha_min", s.solver.alpha_min);
        s.solver.alpha_max = v.number("alpha_max", s.solver.alpha_max);
        s.solver.tol = v.number("tol", s.solver.tol);
        s.solver.max_iters = static_cast<int>(v.integer("max_iters", s.solver.max_iters));
        s.solver.alpha0 = v.number("alpha0", s.solver.alpha0);
        if (v.has("require_dual_feasibility"))
            s.solver.require_dual_feasibility = v.at("require_dual_feasibility").boolean();
        s.solver.nonmonotone_memory = static_cast<int>(v.integer("nonmonotone_memory", s.solver.nonmonotone_memory));
        s.solver.sufficient_decrease = v.number("sufficient_decrease", s.solver.sufficient_decrease);
        try {
            s.solver.validate();
        } catch (const InvalidArgument& e) {
            v.fail(e.what());
        }
    }

    if (f.has("trials")) {
        const Field t = f.at("trials");
        t.allow({"interval_s", "overlap"});
        s.trials.interval_s = t.number("interval_s", s.trials.interval_s);
        s.trials.overlap = t.number("overlap", s.trials.overlap);
        if (!(s.trials.interval_s > 0.0)) t.at("interval_s").fail("must be positive");
        if (!(s.trials.overlap >= 0.0 && s.trials.overlap < 1.0)) t.at("overlap").fail("must lie in [0, 1)");
    }
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto base = std::filesystem::absolute(path).parent_path();
    return parse_scenario(ss.str(), base);
}

std::string dump_scenario(const ScenarioSpec& s) {
    json j;
    j["sample_rate"] = s.sample_rate;
    j["duration_s"] = s.duration_s;
    j["seed"] = s.seed;
    j["snr_in_db"] = s.snr_in_db;
    j["convolution"] = s.circular ? "circular" : "linear";
    json target = {{"source", source_json(s.target.source)}};
    if (s.target.rir) target["rir"] = pair_json(*s.target.rir);
    j["target"] = target;
    json noise = json::array();
    for (const auto& n : s.noise) {
        json e = {{"type", n.kind == NoiseKind::Directional  ? "directional"
                           : n.kind == NoiseKind::Independent ? "independent"
                                                              : "recorded"},
                  {"source", source_json(n.source)},
                  {"gain", n.gain}};
        if (n.rir) e["rir"] = pair_json(*n.rir);
        noise.push_back(e);
    }
    j["noise"] = noise;
    j["analysis"] = {{"dft_len", s.analysis.dft_len},
                     {"hop", s.analysis.hop},
                     {"window", std::string(window_name(s.analysis.window))},
                     {"delay", s.analysis.delay},
                     {"nsfd_block_samples", s.analysis.nsfd_block_samples}};
    j["weights"] = {{"c1", s.weights.c1}, {"c2", s.weights.c2}, {"c3", s.weights.c3}};
    j["solver"] = {{"alpha_min", s.solver.alpha_min},
                   {"alpha_max", s.solver.alpha_max},
                   {"tol", s.solver.tol},
                   {"max_iters", s.solver.max_iters},
                   {"alpha0", s.solver.alpha0},
                   {"require_dual_feasibility", s.solver.require_dual_feasibility},
                   {"nonmonotone_memory", s.solver.nonmonotone_memory},
                   {"sufficient_decrease", s.solver.sufficient_decrease}};
    j["trials"] = {{"interval_s", s.trials.interval_s}, {"overlap", s.trials.overlap}};
    return j.dump(2);
}

}  // namespace rtfcs
