#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streamscribe/text.hpp"

namespace streamscribe {

// Word-level edit distance over reference word count, after normalizing both
// sides. Not clipped at 1. Throws Error(invalid_argument) when the
// normalized reference is empty.
double wer(std::string_view reference, std::string_view hypothesis,
           const ContractionTable& table = ContractionTable::english());

// Same ratio over already normalized tokens.
double word_error_rate(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis);

// 1 - wer, floored at 0.
double word_accuracy(double wer) noexcept;

// Appends chunk_seconds of exact zeros.
std::vector<float> pad_trailing_silence(std::span<const float> samples, int sample_rate, double chunk_seconds);

struct WeightedStat {
    double mean = 0.0;
    double standard_error = 0.0;
};

// Weighted mean with p_i = w_i / sum(w). The standard error is
// sqrt(n/(n-1) * sum p_i^2 (x_i - mean)^2); zero for fewer than two values.
WeightedStat weighted_mean(std::span<const double> values, std::span<const double> weights);

// Rank 1 is the highest score; ties share the average rank. scores[i][j]
// is the score of system j on item i. Returns the mean rank per system.
std::vector<double> mean_ranks(const std::vector<std::vector<double>>& scores);

struct WilcoxonResult {
    std::size_t n_total = 0;
    std::size_t n_effective = 0;  // after dropping zero differences
    double w_plus = 0.0;
    double w_minus = 0.0;
    bool exact = false;
    // Unset when n_effective == 0.
    std::optional<double> p_greater;  // H1: differences tend to be positive
    std::optional<double> p_less;
    std::optional<double> p_two_sided;
};

// Signed-rank test on paired differences. Exact null distribution for
// n_effective <= exact_limit (tied ranks included), normal approximation
// with tie and continuity correction beyond.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences, std::size_t exact_limit = 25);

}  // namespace streamscribe
