#include "streamscribe/vad.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "streamscribe/error.hpp"

namespace streamscribe {

void VadConfig::validate() const {
    if (frame_ms <= 0) throw Error(ErrorCode::config, "vad frame_ms must be positive");
    if (!(energy_threshold > 0.0 && energy_threshold < 1.0)) {
        throw Error(ErrorCode::config, "vad energy_threshold must lie in (0, 1)");
    }
    if (min_voiced_frames <= 0) {
        throw Error(ErrorCode::config, "vad min_voiced_frames must be positive");
    }
}

int count_voiced_frames(std::span<const float> samples, int sample_rate, const VadConfig& config) {
    config.validate();
    if (sample_rate <= 0) throw Error(ErrorCode::config, "sample_rate must be positive");
    const auto frame = static_cast<std::size_t>(
        std::max<long long>(1, static_cast<long long>(sample_rate) * config.frame_ms / 1000));
    // Compare mean square against threshold^2 to skip the sqrt per frame.
    const double threshold_sq = config.energy_threshold * config.energy_threshold;
    int voiced = 0;
    for (std::size_t start = 0; start + frame <= samples.size(); start += frame) {
        double energy = 0.0;
        for (std::size_t i = start; i < start + frame; ++i) {
            const double s = samples[i];
            energy += s * s;
        }
        if (energy / static_cast<double>(frame) >= threshold_sq) ++voiced;
    }
    return voiced;
}

bool has_voice(std::span<const float> samples, int sample_rate, const VadConfig& config) {
    if (samples.empty()) return false;
    return count_voiced_frames(samples, sample_rate, config) >= config.min_voiced_frames;
}

EnergyVad::EnergyVad(VadConfig config) : config_(config) { config_.validate(); }

bool EnergyVad::has_voice(std::span<const float> samples, int sample_rate) const {
    return streamscribe::has_voice(samples, sample_rate, config_);
}

}  // namespace streamscribe
