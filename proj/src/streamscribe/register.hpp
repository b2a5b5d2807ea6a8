#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <span>
#include <vector>

namespace streamscribe {

// Register geometry: chunk_count chunks of chunk_seconds each at sample_rate.
struct RegisterConfig {
    int chunk_count = 5;
    double chunk_seconds = 4.0;
    int sample_rate = 16000;

    // Throws Error(config) unless all fields are positive and
    // chunk_seconds * sample_rate is integral.
    void validate() const;

    std::size_t chunk_samples() const;
};

std::int64_t capacity_samples(const RegisterConfig& config);

struct AudioChunk {
    std::vector<float> samples;
    std::int64_t seq = 0;
};

// Immutable copy of the register content at one instant.
struct RegisterSnapshot {
    std::vector<float> samples;
    std::int64_t first_seq = 0;
    std::int64_t last_seq = -1;      // -1 until the first append
    std::size_t chunk_count = 0;     // chunks held in `samples`
    std::size_t chunk_samples = 0;
    int sample_rate = 0;
    double start_seconds = 0.0;
    double end_seconds = 0.0;

    bool empty() const noexcept { return samples.empty(); }
    double duration_seconds() const noexcept { return end_seconds - start_seconds; }

    // The last `chunks` chunks of the snapshot (clamped to what it holds).
    std::span<const float> tail(std::size_t chunks) const noexcept;
};

// FIFO of whole audio chunks with capacity chunk_count. One producer appends,
// one consumer snapshots and flushes; every public member is thread-safe.
class ShiftingRegister {
public:
    explicit ShiftingRegister(const RegisterConfig& config);

    ShiftingRegister(const ShiftingRegister&) = delete;
    ShiftingRegister& operator=(const ShiftingRegister&) = delete;

    const RegisterConfig& config() const noexcept { return config_; }

    // chunk.seq must equal appended_total() and chunk.samples must hold
    // exactly chunk_samples() values.
    void append(AudioChunk chunk);
    // Appends with the next sequence number and returns it.
    std::int64_t push(std::span<const float> samples);

    RegisterSnapshot snapshot() const;

    void flush();
    // Drops only chunks with seq <= last_seq, so chunks appended after a
    // consumer's snapshot survive the consumer's flush.
    void flush_through(std::int64_t last_seq);

    std::int64_t appended_total() const;
    std::size_t size() const;
    std::size_t stored_samples() const;
    double window_start_seconds() const;
    double window_end_seconds() const;

    // Consumer progress, used by producers that must not overrun the consumer.
    void mark_consumed(std::int64_t seq);
    std::int64_t consumed_through() const;
    // Waits until consumed_through() >= seq. Returns false on timeout or abort.
    bool wait_consumed(std::int64_t seq, std::chrono::milliseconds timeout) const;
    // Waits until appended_total() > total. Returns false on timeout or abort.
    bool wait_appended(std::int64_t total, std::chrono::milliseconds timeout) const;
    // Releases every waiter; subsequent waits return false immediately.
    void abort_waits();

private:
    double seconds_at(std::int64_t seq) const noexcept;
    std::int64_t front_seq_locked() const noexcept;

    RegisterConfig config_;
    std::size_t chunk_samples_;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::deque<AudioChunk> content_;
    std::int64_t appended_total_ = 0;
    std::int64_t consumed_through_ = -1;
    bool aborted_ = false;
};

}  // namespace streamscribe
