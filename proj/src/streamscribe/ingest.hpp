#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "streamscribe/register.hpp"

namespace streamscribe {

enum class IngestMode { rtp, file_replay };
enum class ReplayPacing {
    realtime,  // one chunk per chunk_seconds of wall clock
    unpaced,   // as fast as the consumer drains the register, never overrunning it
};

struct IngestConfig {
    IngestMode mode = IngestMode::rtp;
    std::string rtp_host = "127.0.0.1";
    std::uint16_t rtp_port = 0;  // 0 binds an ephemeral port
    int sample_rate = 16000;
    std::filesystem::path replay_path;
    ReplayPacing replay_pacing = ReplayPacing::unpaced;
};

// RFC 3550 fixed header plus an L16 (big-endian PCM16 mono) payload.
struct RtpPacketView {
    std::uint8_t payload_type = 0;
    bool marker = false;
    std::uint16_t sequence_number = 0;
    std::uint32_t timestamp = 0;
    std::uint32_t ssrc = 0;
    std::span<const std::uint8_t> payload;

    std::size_t sample_count() const noexcept { return payload.size() / 2; }
};

// Returns nullopt for anything that is not a well-formed RTP v2 packet with
// an even-length payload.
std::optional<RtpPacketView> parse_rtp(std::span<const std::uint8_t> datagram);
std::vector<float> decode_l16(std::span<const std::uint8_t> payload);

// Test and sender helper: serializes a minimal RTP v2 packet.
std::vector<std::uint8_t> build_rtp_packet(std::uint16_t seq, std::uint32_t timestamp, std::uint32_t ssrc,
                                           std::span<const std::int16_t> samples, std::uint8_t payload_type = 96);

struct IngestStats {
    std::uint64_t packets_received = 0;
    std::uint64_t packets_lost = 0;
    std::uint64_t packets_malformed = 0;
    std::uint64_t packets_late = 0;
    std::uint64_t chunks_appended = 0;
    std::uint64_t samples_received = 0;
    std::uint64_t samples_zero_filled = 0;
    std::uint64_t samples_pending = 0;  // assembled but short of a full chunk
};

// Slices a sample stream into register chunks. Only full chunks are appended.
class ChunkAssembler {
public:
    explicit ChunkAssembler(ShiftingRegister& target, bool wait_for_consumer = false);

    void feed(std::span<const float> samples);
    void feed_silence(std::size_t count);
    // Unblocks any wait on the consumer; later feeds drop their data.
    void cancel();

    IngestStats stats() const;
    void count_packet_received();
    void count_packet_malformed();
    void count_packet_late();
    void count_packets_lost(std::uint64_t n);

private:
    void emit_full_chunks();

    ShiftingRegister& target_;
    const std::size_t chunk_samples_;
    const bool wait_for_consumer_;
    std::vector<float> pending_;
    std::atomic<bool> cancelled_{false};
    mutable std::mutex stats_mutex_;
    IngestStats stats_;
};

// Reassembles an L16 RTP stream: packets are held in a small reorder window
// keyed by extended timestamp, timestamp gaps are zero-filled, and packets
// that arrive after their slot was released are dropped.
class RtpDepacketizer {
public:
    explicit RtpDepacketizer(ChunkAssembler& sink, std::size_t reorder_window = 4,
                             std::size_t max_gap_samples = 16000 * 10);

    void push(std::span<const std::uint8_t> datagram);
    void drain();

private:
    struct Held {
        std::uint16_t seq;
        std::vector<float> samples;
    };
    void release_front();

    ChunkAssembler& sink_;
    std::size_t reorder_window_;
    std::size_t max_gap_samples_;
    std::map<std::int64_t, Held> held_;
    std::optional<std::int64_t> highest_ts_;
    std::optional<std::int64_t> next_ts_;
    std::optional<std::uint16_t> expected_seq_;
};

// Running ingestion pipeline. open() acquires the socket or file; start()
// begins moving data; stop() is idempotent.
class Ingest {
public:
    static std::unique_ptr<Ingest> open(const IngestConfig& config, ShiftingRegister& target);
    ~Ingest();

    Ingest(const Ingest&) = delete;
    Ingest& operator=(const Ingest&) = delete;

    void start();
    IngestStats stop();
    IngestStats stats() const;

    // File replay reached end of file (always false for RTP).
    bool finished() const noexcept { return finished_.load(); }
    std::uint16_t bound_port() const noexcept { return bound_port_; }
    const IngestConfig& config() const noexcept { return config_; }

private:
    Ingest(const IngestConfig& config, ShiftingRegister& target);
    void run_rtp();
    void run_replay();

    IngestConfig config_;
    ShiftingRegister& target_;
    ChunkAssembler assembler_;
    int socket_fd_ = -1;
    std::uint16_t bound_port_ = 0;
    std::vector<float> replay_samples_;
    std::atomic<bool> stopping_{false};
    std::atomic<bool> finished_{false};
    bool started_ = false;
    bool stopped_ = false;
    std::thread worker_;
    std::mutex lifecycle_mutex_;
};

std::unique_ptr<Ingest> start_ingest(const IngestConfig& config, ShiftingRegister& target);
IngestStats stop_ingest(Ingest& handle);

}  // namespace streamscribe
