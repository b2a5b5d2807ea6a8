#include "streamscribe/register.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamscribe/error.hpp"

namespace streamscribe {

void RegisterConfig::validate() const {
    if (chunk_count <= 0) {
        throw Error(ErrorCode::config, "chunk_count must be positive");
    }
    if (!(chunk_seconds > 0.0) || !std::isfinite(chunk_seconds)) {
        throw Error(ErrorCode::config, "chunk_seconds must be positive");
    }
    if (sample_rate <= 0) {
        throw Error(ErrorCode::config, "sample_rate must be positive");
    }
    const double per_chunk = chunk_seconds * sample_rate;
    if (std::fabs(per_chunk - std::round(per_chunk)) > 1e-6 || std::round(per_chunk) < 1.0) {
        throw Error(ErrorCode::config,
                    "chunk_seconds * sample_rate must be a positive integer, got " +
                        std::to_string(per_chunk));
    }
}

std::size_t RegisterConfig::chunk_samples() const {
    validate();
    return static_cast<std::size_t>(std::llround(chunk_seconds * sample_rate));
}

std::int64_t capacity_samples(const RegisterConfig& config) {
    return static_cast<std::int64_t>(config.chunk_samples()) * config.chunk_count;
}

std::span<const float> RegisterSnapshot::tail(std::size_t chunks) const noexcept {
    const std::size_t n = std::min(chunks, chunk_count) * chunk_samples;
    return std::span<const float>(samples).last(std::min(n, samples.size()));
}

ShiftingRegister::ShiftingRegister(const RegisterConfig& config)
    : config_(config), chunk_samples_(config.chunk_samples()) {}

void ShiftingRegister::append(AudioChunk chunk) {
    if (chunk.samples.size() != chunk_samples_) {
        throw Error(ErrorCode::size, "chunk holds " + std::to_string(chunk.samples.size()) +
                                         " samples, expected " + std::to_string(chunk_samples_));
    }
    {
        std::lock_guard lock(mutex_);
        if (chunk.seq != appended_total_) {
            throw Error(ErrorCode::sequence, "chunk seq " + std::to_string(chunk.seq) +
                                                 " does not follow " +
                                                 std::to_string(appended_total_ - 1));
        }
        if (content_.size() == static_cast<std::size_t>(config_.chunk_count)) {
            content_.pop_front();
        }
        content_.push_back(std::move(chunk));
        ++appended_total_;
    }
    changed_.notify_all();
}

std::int64_t ShiftingRegister::push(std::span<const float> samples) {
    AudioChunk chunk;
    chunk.samples.assign(samples.begin(), samples.end());
    // Single producer: nobody else can claim this seq between the read and the append.
    chunk.seq = appended_total();
    const auto seq = chunk.seq;
    append(std::move(chunk));
    return seq;
}

RegisterSnapshot ShiftingRegister::snapshot() const {
    RegisterSnapshot snap;
    snap.chunk_samples = chunk_samples_;
    snap.sample_rate = config_.sample_rate;
    std::lock_guard lock(mutex_);
    snap.samples.reserve(content_.size() * chunk_samples_);
    for (const auto& chunk : content_) {
        snap.samples.insert(snap.samples.end(), chunk.samples.begin(), chunk.samples.end());
    }
    snap.chunk_count = content_.size();
    snap.first_seq = front_seq_locked();
    snap.last_seq = appended_total_ - 1;
    snap.start_seconds = seconds_at(snap.first_seq);
    snap.end_seconds = seconds_at(appended_total_);
    return snap;
}

void ShiftingRegister::flush() {
    std::lock_guard lock(mutex_);
    content_.clear();
}

void ShiftingRegister::flush_through(std::int64_t last_seq) {
    std::lock_guard lock(mutex_);
    while (!content_.empty() && content_.front().seq <= last_seq) {
        content_.pop_front();
    }
}

std::int64_t ShiftingRegister::appended_total() const {
    std::lock_guard lock(mutex_);
    return appended_total_;
}

std::size_t ShiftingRegister::size() const {
    std::lock_guard lock(mutex_);
    return content_.size();
}

std::size_t ShiftingRegister::stored_samples() const {
    std::lock_guard lock(mutex_);
    return content_.size() * chunk_samples_;
}

double ShiftingRegister::window_start_seconds() const {
    std::lock_guard lock(mutex_);
    return seconds_at(front_seq_locked());
}

double ShiftingRegister::window_end_seconds() const {
    std::lock_guard lock(mutex_);
    return seconds_at(appended_total_);
}

void ShiftingRegister::mark_consumed(std::int64_t seq) {
    {
        std::lock_guard lock(mutex_);
        if (seq > consumed_through_) consumed_through_ = seq;
    }
    changed_.notify_all();
}

std::int64_t ShiftingRegister::consumed_through() const {
    std::lock_guard lock(mutex_);
    return consumed_through_;
}

bool ShiftingRegister::wait_consumed(std::int64_t seq, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return changed_.wait_for(lock, timeout, [&] { return aborted_ || consumed_through_ >= seq; }) &&
           !aborted_;
}

bool ShiftingRegister::wait_appended(std::int64_t total, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return changed_.wait_for(lock, timeout, [&] { return aborted_ || appended_total_ > total; }) &&
           !aborted_;
}

void ShiftingRegister::abort_waits() {
    {
        std::lock_guard lock(mutex_);
        aborted_ = true;
    }
    changed_.notify_all();
}

double ShiftingRegister::seconds_at(std::int64_t seq) const noexcept {
    return static_cast<double>(seq) * static_cast<double>(chunk_samples_) /
           static_cast<double>(config_.sample_rate);
}

std::int64_t ShiftingRegister::front_seq_locked() const noexcept {
    // An empty window sits at the current stream position.
    return content_.empty() ? appended_total_ : content_.front().seq;
}

}  // namespace streamscribe
