#include "streamscribe/ingest.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "streamscribe/error.hpp"
#include "streamscribe/pcm.hpp"

namespace streamscribe {

std::optional<RtpPacketView> parse_rtp(std::span<const std::uint8_t> d) {
    if (d.size() < 12) return std::nullopt;
    if ((d[0] >> 6) != 2) return std::nullopt;
    const bool padding = (d[0] & 0x20) != 0;
    const bool extension = (d[0] & 0x10) != 0;
    const std::size_t csrc_count = d[0] & 0x0f;

    RtpPacketView p;
    p.marker = (d[1] & 0x80) != 0;
    p.payload_type = d[1] & 0x7f;
    p.sequence_number = static_cast<std::uint16_t>((d[2] << 8) | d[3]);
    p.timestamp = (std::uint32_t{d[4]} << 24) | (std::uint32_t{d[5]} << 16) | (std::uint32_t{d[6]} << 8) | d[7];
    p.ssrc = (std::uint32_t{d[8]} << 24) | (std::uint32_t{d[9]} << 16) | (std::uint32_t{d[10]} << 8) | d[11];

    std::size_t offset = 12 + 4 * csrc_count;
    if (offset > d.size()) return std::nullopt;
    if (extension) {
        if (offset + 4 > d.size()) return std::nullopt;
        const std::size_t words = (std::size_t{d[offset + 2]} << 8) | d[offset + 3];
        offset += 4 + 4 * words;
        if (offset > d.size()) return std::nullopt;
    }
    std::size_t end = d.size();
    if (padding) {
        const std::size_t pad = d.back();
        if (pad == 0 || pad > end - offset) return std::nullopt;
        end -= pad;
    }
    if ((end - offset) % 2 != 0) return std::nullopt;
    p.payload = d.subspan(offset, end - offset);
    return p;
}

std::vector<float> decode_l16(std::span<const std::uint8_t> payload) {
    std::vector<float> out(payload.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>((payload[2 * i] << 8) | payload[2 * i + 1]));
        out[i] = float_from_pcm16(v);
    }
    return out;
}

std::vector<std::uint8_t> build_rtp_packet(std::uint16_t seq, std::uint32_t timestamp, std::uint32_t ssrc,
                                           std::span<const std::int16_t> samples, std::uint8_t payload_type) {
    std::vector<std::uint8_t> out(12 + samples.size() * 2);
    out[0] = 0x80;
    out[1] = payload_type & 0x7f;
    out[2] = static_cast<std::uint8_t>(seq >> 8);
    out[3] = static_cast<std::uint8_t>(seq);
    for (int i = 0; i < 4; ++i) {
        out[4 + i] = static_cast<std::uint8_t>(timestamp >> (24 - 8 * i));
        out[8 + i] = static_cast<std::uint8_t>(ssrc >> (24 - 8 * i));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto u = static_cast<std::uint16_t>(samples[i]);
        out[12 + 2 * i] = static_cast<std::uint8_t>(u >> 8);
        out[13 + 2 * i] = static_cast<std::uint8_t>(u);
    }
    return out;
}

// ---------------------------------------------------------------------------

ChunkAssembler::ChunkAssembler(ShiftingRegister& target, bool wait_for_consumer)
    : target_(target), chunk_samples_(target.config().chunk_samples()), wait_for_consumer_(wait_for_consumer) {
    pending_.reserve(chunk_samples_);
}

void ChunkAssembler::feed(std::span<const float> samples) {
    {
        std::lock_guard lock(stats_mutex_);
        stats_.samples_received += samples.size();
    }
    while (!samples.empty()) {
        const std::size_t take = std::min(samples.size(), chunk_samples_ - pending_.size());
        pending_.insert(pending_.end(), samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take));
        samples = samples.subspan(take);
        emit_full_chunks();
    }
}

void ChunkAssembler::feed_silence(std::size_t count) {
    {
        std::lock_guard lock(stats_mutex_);
        stats_.samples_zero_filled += count;
    }
    while (count > 0) {
        const std::size_t take = std::min(count, chunk_samples_ - pending_.size());
        pending_.insert(pending_.end(), take, 0.0f);
        count -= take;
        emit_full_chunks();
    }
}

void ChunkAssembler::emit_full_chunks() {
    if (pending_.size() < chunk_samples_) {
        std::lock_guard lock(stats_mutex_);
        stats_.samples_pending = pending_.size();
        return;
    }
    if (wait_for_consumer_) {
        const auto seq = target_.appended_total();
        while (!cancelled_.load() && !target_.wait_consumed(seq - 1, std::chrono::milliseconds(50))) {
        }
    }
    if (cancelled_.load()) {
        pending_.clear();
        return;
    }
    AudioChunk chunk;
    chunk.seq = target_.appended_total();
    chunk.samples.swap(pending_);
    pending_.clear();
    pending_.reserve(chunk_samples_);
    target_.append(std::move(chunk));
    std::lock_guard lock(stats_mutex_);
    ++stats_.chunks_appended;
    stats_.samples_pending = 0;
}

void ChunkAssembler::cancel() { cancelled_.store(true); }

IngestStats ChunkAssembler::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

void ChunkAssembler::count_packet_received() {
    std::lock_guard lock(stats_mutex_);
    ++stats_.packets_received;
}

void ChunkAssembler::count_packet_malformed() {
    std::lock_guard lock(stats_mutex_);
    ++stats_.packets_malformed;
}

void ChunkAssembler::count_packet_late() {
    std::lock_guard lock(stats_mutex_);
    ++stats_.packets_late;
}

void ChunkAssembler::count_packets_lost(std::uint64_t n) {
    std::lock_guard lock(stats_mutex_);
    stats_.packets_lost += n;
}

// ---------------------------------------------------------------------------

RtpDepacketizer::RtpDepacketizer(ChunkAssembler& sink, std::size_t reorder_window, std::size_t max_gap_samples)
    : sink_(sink), reorder_window_(std::max<std::size_t>(1, reorder_window)), max_gap_samples_(max_gap_samples) {}

void RtpDepacketizer::push(std::span<const std::uint8_t> datagram) {
    const auto packet = parse_rtp(datagram);
    if (!packet) {
        sink_.count_packet_malformed();
        return;
    }

    // Extend the 32-bit timestamp around the highest one seen so far.
    std::int64_t ts = packet->timestamp;
    if (highest_ts_) {
        const auto delta = static_cast<std::int32_t>(packet->timestamp - static_cast<std::uint32_t>(*highest_ts_));
        ts = *highest_ts_ + delta;
    }
    const auto samples = static_cast<std::int64_t>(packet->sample_count());
    if ((next_ts_ && ts + samples <= *next_ts_) || held_.contains(ts)) {
        sink_.count_packet_late();
        return;
    }
    sink_.count_packet_received();
    if (!highest_ts_ || ts > *highest_ts_) highest_ts_ = ts;
    held_.emplace(ts, Held{packet->sequence_number, decode_l16(packet->payload)});
    while (held_.size() > reorder_window_) release_front();
}

void RtpDepacketizer::drain() {
    while (!held_.empty()) release_front();
}

void RtpDepacketizer::release_front() {
    auto node = held_.extract(held_.begin());
    const std::int64_t ts = node.key();
    Held& held = node.mapped();

    if (expected_seq_ && held.seq != *expected_seq_) {
        const auto gap = static_cast<std::uint16_t>(held.seq - *expected_seq_);
        if (gap < 0x8000) sink_.count_packets_lost(gap);
    }
    expected_seq_ = static_cast<std::uint16_t>(held.seq + 1);

    std::span<const float> samples(held.samples);
    if (!next_ts_) next_ts_ = ts;
    if (ts > *next_ts_) {
        const auto gap = static_cast<std::size_t>(ts - *next_ts_);
        if (gap <= max_gap_samples_) sink_.feed_silence(gap);
    } else if (ts < *next_ts_) {
        // Overlaps audio already released; keep only the new tail.
        samples = samples.subspan(std::min(samples.size(), static_cast<std::size_t>(*next_ts_ - ts)));
    }
    sink_.feed(samples);
    next_ts_ = ts + static_cast<std::int64_t>(held.samples.size());
}

// ---------------------------------------------------------------------------

Ingest::Ingest(const IngestConfig& config, ShiftingRegister& target)
    : config_(config),
      target_(target),
      assembler_(target, config.mode == IngestMode::file_replay && config.replay_pacing == ReplayPacing::unpaced) {}

std::unique_ptr<Ingest> Ingest::open(const IngestConfig& config, ShiftingRegister& target) {
    if (config.sample_rate != target.config().sample_rate) {
        throw Error(ErrorCode::config, "ingest sample_rate does not match the register sample_rate");
    }
    std::unique_ptr<Ingest> ingest(new Ingest(config, target));
    if (config.mode == IngestMode::file_replay) {
        auto audio = read_audio_file(config.replay_path, config.sample_rate);
        if (audio.sample_rate != config.sample_rate) {
            throw Error(ErrorCode::config, "replay file rate " + std::to_string(audio.sample_rate) +
                                               " Hz does not match configured " + std::to_string(config.sample_rate));
        }
        ingest->replay_samples_ = std::move(audio.samples);
        return ingest;
    }

    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
    ingest->socket_fd_ = fd;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(config.rtp_port);
    if (::inet_pton(AF_INET, config.rtp_host.c_str(), &addr.sin_addr) != 1) {
        throw Error(ErrorCode::config, "invalid rtp_host " + config.rtp_host);
    }
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        const int err = errno;
        throw Error(err == EADDRINUSE ? ErrorCode::address_in_use : ErrorCode::io,
                    "cannot bind UDP port " + std::to_string(config.rtp_port) + ": " + std::strerror(err));
    }
    const int rcvbuf = 1 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof rcvbuf);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ingest->bound_port_ = ntohs(addr.sin_port);
    return ingest;
}

Ingest::~Ingest() {
    stop();
    if (socket_fd_ >= 0) ::close(socket_fd_);
}

void Ingest::start() {
    std::lock_guard lock(lifecycle_mutex_);
    if (started_ || stopped_) return;
    started_ = true;
    worker_ = std::thread([this] {
        if (config_.mode == IngestMode::rtp) {
            run_rtp();
        } else {
            run_replay();
        }
    });
}

IngestStats Ingest::stop() {
    std::lock_guard lock(lifecycle_mutex_);
    if (!stopped_) {
        stopped_ = true;
        stopping_.store(true);
        assembler_.cancel();
        if (worker_.joinable()) worker_.join();
    }
    return assembler_.stats();
}

IngestStats Ingest::stats() const { return assembler_.stats(); }

void Ingest::run_rtp() {
    RtpDepacketizer depacketizer(assembler_, 4, static_cast<std::size_t>(config_.sample_rate) * 10);
    std::vector<std::uint8_t> buffer(65536);
    while (!stopping_.load()) {
        pollfd pfd{socket_fd_, POLLIN, 0};
        const int r = ::poll(&pfd, 1, 20);
        if (r <= 0) continue;
        const auto n = ::recv(socket_fd_, buffer.data(), buffer.size(), 0);
        if (n <= 0) continue;
        depacketizer.push(std::span<const std::uint8_t>(buffer.data(), static_cast<std::size_t>(n)));
    }
    depacketizer.drain();
}

void Ingest::run_replay() {
    const std::size_t chunk = target_.config().chunk_samples();
    const auto chunk_duration = std::chrono::duration<double>(target_.config().chunk_seconds);
    const auto started = std::chrono::steady_clock::now();
    std::size_t offset = 0;
    std::size_t index = 0;
    while (!stopping_.load() && offset < replay_samples_.size()) {
        if (config_.replay_pacing == ReplayPacing::realtime) {
            // A chunk is complete only once its last sample has "arrived".
            const auto due = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           chunk_duration * static_cast<double>(index + 1));
            while (!stopping_.load() && std::chrono::steady_clock::now() < due) {
                std::this_thread::sleep_until(std::min(due, std::chrono::steady_clock::now() + std::chrono::milliseconds(20)));
            }
            if (stopping_.load()) break;
        }
        const std::size_t take = std::min(chunk, replay_samples_.size() - offset);
        assembler_.feed(std::span<const float>(replay_samples_).subspan(offset, take));
        offset += take;
        ++index;
    }
    finished_.store(offset >= replay_samples_.size());
}

std::unique_ptr<Ingest> start_ingest(const IngestConfig& config, ShiftingRegister& target) {
    auto handle = Ingest::open(config, target);
    handle->start();
    return handle;
}

IngestStats stop_ingest(Ingest& handle) { return handle.stop(); }

}  // namespace streamscribe
