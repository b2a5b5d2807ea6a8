#include "streamscribe/pcm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "streamscribe/error.hpp"

namespace streamscribe {

float float_from_pcm16(std::int16_t sample) noexcept {
    return static_cast<float>(sample) / 32768.0f;
}

std::int16_t pcm16_from_float(float sample) noexcept {
    if (std::isnan(sample)) return 0;
    const float scaled = std::round(sample * 32768.0f);
    return static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f));
}

std::vector<float> floats_from_pcm16(std::span<const std::int16_t> samples) {
    std::vector<float> out(samples.size());
    std::transform(samples.begin(), samples.end(), out.begin(), float_from_pcm16);
    return out;
}

std::vector<std::int16_t> pcm16_from_floats(std::span<const float> samples) {
    std::vector<std::int16_t> out(samples.size());
    std::transform(samples.begin(), samples.end(), out.begin(), pcm16_from_float);
    return out;
}

std::string pcm16le_bytes(std::span<const std::int16_t> samples) {
    std::string out(samples.size() * 2, '\0');
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto u = static_cast<std::uint16_t>(samples[i]);
        out[2 * i] = static_cast<char>(u & 0xff);
        out[2 * i + 1] = static_cast<char>(u >> 8);
    }
    return out;
}

std::vector<std::int16_t> pcm16le_samples(std::string_view bytes) {
    if (bytes.size() % 2 != 0) {
        throw Error(ErrorCode::size, "PCM16 payload has odd length " + std::to_string(bytes.size()));
    }
    std::vector<std::int16_t> out(bytes.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
        const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
        out[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
    return out;
}

namespace {

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_base64_lookup() {
    std::array<int, 256> table{};
    for (auto& v : table) v = -1;
    for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kBase64Alphabet[i])] = i;
    return table;
}

constexpr auto kBase64Lookup = make_base64_lookup();

std::uint32_t read_le(const unsigned char* p, int bytes) {
    std::uint32_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void put_le(std::string& out, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                                (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                                static_cast<std::uint8_t>(bytes[i + 2]);
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += kBase64Alphabet[(v >> 6) & 63];
        out += kBase64Alphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest > 0) {
        std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
        if (rest == 2) v |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += rest == 2 ? kBase64Alphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw Error(ErrorCode::invalid_argument, "base64 length not a multiple of 4");
    std::string out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) {
                    throw Error(ErrorCode::invalid_argument, "misplaced base64 padding");
                }
                v[j] = 0;
                ++pad;
            } else {
                if (pad > 0) throw Error(ErrorCode::invalid_argument, "misplaced base64 padding");
                v[j] = kBase64Lookup[static_cast<unsigned char>(c)];
                if (v[j] < 0) throw Error(ErrorCode::invalid_argument, "invalid base64 character");
            }
        }
        const std::uint32_t triple = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out += static_cast<char>((triple >> 16) & 0xff);
        if (pad < 2) out += static_cast<char>((triple >> 8) & 0xff);
        if (pad < 1) out += static_cast<char>(triple & 0xff);
    }
    return out;
}

PcmAudio read_audio_file(const std::filesystem::path& path, int fallback_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open audio file " + path.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());

    PcmAudio audio;
    if (data.size() < 12 || std::memcmp(bytes, "RIFF", 4) != 0 || std::memcmp(bytes + 8, "WAVE", 4) != 0) {
        audio.sample_rate = fallback_rate;
        audio.samples = floats_from_pcm16(pcm16le_samples(data));
        return audio;
    }

    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const std::uint32_t size = read_le(bytes + pos + 4, 4);
        const std::size_t body = pos + 8;
        if (body + size > data.size()) throw Error(ErrorCode::io, "truncated WAV chunk in " + path.string());
        if (std::memcmp(bytes + pos, "fmt ", 4) == 0) {
            if (size < 16) throw Error(ErrorCode::io, "short WAV fmt chunk");
            const auto format = read_le(bytes + body, 2);
            const auto channels = read_le(bytes + body + 2, 2);
            const auto bits = read_le(bytes + body + 14, 2);
            if (format != 1 || bits != 16) throw Error(ErrorCode::io, "WAV must be 16-bit PCM");
            if (channels != 1) throw Error(ErrorCode::io, "WAV must be mono");
            audio.sample_rate = static_cast<int>(read_le(bytes + body + 4, 4));
            have_fmt = true;
        } else if (std::memcmp(bytes + pos, "data", 4) == 0) {
            if (!have_fmt) throw Error(ErrorCode::io, "WAV data chunk precedes fmt chunk");
            audio.samples = floats_from_pcm16(pcm16le_samples(std::string_view(data).substr(body, size)));
            return audio;
        }
        pos = body + size + (size & 1u);
    }
    throw Error(ErrorCode::io, "WAV file without data chunk: " + path.string());
}

void write_wav(const std::filesystem::path& path, const PcmAudio& audio) {
    const auto pcm = pcm16le_bytes(pcm16_from_floats(audio.samples));
    std::string out;
    out.reserve(44 + pcm.size());
    out += "RIFF";
    put_le(out, static_cast<std::uint32_t>(36 + pcm.size()), 4);
    out += "WAVEfmt ";
    put_le(out, 16, 4);
    put_le(out, 1, 2);  // PCM
    put_le(out, 1, 2);  // mono
    put_le(out, static_cast<std::uint32_t>(audio.sample_rate), 4);
    put_le(out, static_cast<std::uint32_t>(audio.sample_rate * 2), 4);
    put_le(out, 2, 2);
    put_le(out, 16, 2);
    out += "data";
    put_le(out, static_cast<std::uint32_t>(pcm.size()), 4);
    out += pcm;

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::io, "cannot write " + path.string());
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace streamscribe
