#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamscribe {

// int16 -> [-1, 1) by division by 32768; the inverse rounds and clamps so
// pcm16_from_float(float_from_pcm16(x)) == x for every int16.
float float_from_pcm16(std::int16_t sample) noexcept;
std::int16_t pcm16_from_float(float sample) noexcept;

std::vector<float> floats_from_pcm16(std::span<const std::int16_t> samples);
std::vector<std::int16_t> pcm16_from_floats(std::span<const float> samples);

// Little-endian byte packing of PCM16 samples.
std::string pcm16le_bytes(std::span<const std::int16_t> samples);
// Throws Error(size) on odd-length input.
std::vector<std::int16_t> pcm16le_samples(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
// Throws Error(invalid_argument) on malformed input.
std::string base64_decode(std::string_view text);

struct PcmAudio {
    std::vector<float> samples;
    int sample_rate = 0;

    double duration_seconds() const noexcept {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// Reads a RIFF/WAVE file (PCM 16-bit mono) or, when no RIFF header is present,
// headerless PCM16LE mono at `fallback_rate`.
PcmAudio read_audio_file(const std::filesystem::path& path, int fallback_rate);
void write_wav(const std::filesystem::path& path, const PcmAudio& audio);

}  // namespace streamscribe
