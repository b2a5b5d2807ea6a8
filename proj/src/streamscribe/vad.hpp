#pragma once

#include <span>

namespace streamscribe {

struct VadConfig {
    int frame_ms = 30;
    double energy_threshold = 0.01;
    int min_voiced_frames = 3;

    void validate() const;
};

// Frame-RMS energy gate. Only full frames are scored; a trailing partial
// frame is ignored so that appending silence can never remove a voiced frame.
bool has_voice(std::span<const float> samples, int sample_rate, const VadConfig& config);

// Number of full frames whose RMS reaches the threshold.
int count_voiced_frames(std::span<const float> samples, int sample_rate, const VadConfig& config);

// Pluggable voice detector. The orchestrator only sees this interface, so a
// neural backend can replace the energy gate.
class VoiceDetector {
public:
    virtual ~VoiceDetector() = default;
    virtual bool has_voice(std::span<const float> samples, int sample_rate) const = 0;
};

class EnergyVad final : public VoiceDetector {
public:
    explicit EnergyVad(VadConfig config = {});

    bool has_voice(std::span<const float> samples, int sample_rate) const override;
    const VadConfig& config() const noexcept { return config_; }

private:
    VadConfig config_;
};

}  // namespace streamscribe
