#include "streamscribe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "streamscribe/error.hpp"

namespace streamscribe {

double wer(std::string_view reference, std::string_view hypothesis, const ContractionTable& table) {
    const auto ref = tokenize(normalize(reference, table));
    if (ref.empty()) throw Error(ErrorCode::invalid_argument, "reference is empty after normalization");
    return word_error_rate(ref, tokenize(normalize(hypothesis, table)));
}

double word_error_rate(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis) {
    if (reference.empty()) throw Error(ErrorCode::invalid_argument, "reference has no words");
    return static_cast<double>(token_edit_distance(reference, hypothesis)) / static_cast<double>(reference.size());
}

double word_accuracy(double wer) noexcept { return std::max(0.0, 1.0 - wer); }

std::vector<float> pad_trailing_silence(std::span<const float> samples, int sample_rate, double chunk_seconds) {
    if (sample_rate <= 0 || !(chunk_seconds > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "padding needs a positive rate and chunk length");
    }
    const auto pad = static_cast<std::size_t>(std::llround(chunk_seconds * sample_rate));
    std::vector<float> out(samples.begin(), samples.end());
    out.resize(out.size() + pad, 0.0f);
    return out;
}

WeightedStat weighted_mean(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw Error(ErrorCode::invalid_argument, "values and weights differ in length");
    if (values.empty()) throw Error(ErrorCode::invalid_argument, "weighted mean of nothing");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorCode::invalid_argument, "weights must be non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::invalid_argument, "weights sum to zero");

    WeightedStat s;
    for (std::size_t i = 0; i < values.size(); ++i) s.mean += weights[i] / total * values[i];
    const std::size_t n = values.size();
    if (n < 2) return s;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = weights[i] / total;
        const double d = values[i] - s.mean;
        acc += p * p * d * d;
    }
    s.standard_error = std::sqrt(acc * static_cast<double>(n) / static_cast<double>(n - 1));
    return s;
}

namespace {

bool nearly_equal(double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Average ranks (1-based) of `values` in ascending order; ties share.
std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && nearly_equal(values[order[j]], values[order[i]])) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> mean_ranks(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) throw Error(ErrorCode::invalid_argument, "no items to rank");
    const std::size_t k = scores.front().size();
    std::vector<double> sum(k, 0.0);
    for (const auto& row : scores) {
        if (row.size() != k) throw Error(ErrorCode::invalid_argument, "ragged score matrix");
        std::vector<double> negated(row.size());
        std::transform(row.begin(), row.end(), negated.begin(), [](double v) { return -v; });
        const auto r = average_ranks(negated);
        for (std::size_t j = 0; j < k; ++j) sum[j] += r[j];
    }
    for (auto& v : sum) v /= static_cast<double>(scores.size());
    return sum;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences, std::size_t exact_limit) {
    WilcoxonResult res;
    res.n_total = differences.size();
    std::vector<double> nonzero;
    for (double d : differences) {
        if (!std::isfinite(d)) throw Error(ErrorCode::invalid_argument, "non-finite difference");
        if (!nearly_equal(d, 0.0)) nonzero.push_back(d);
    }
    const std::size_t n = nonzero.size();
    res.n_effective = n;
    if (n == 0) return res;

    std::vector<double> magnitude(n);
    std::transform(nonzero.begin(), nonzero.end(), magnitude.begin(), [](double d) { return std::fabs(d); });
    const auto ranks = average_ranks(magnitude);
    for (std::size_t i = 0; i < n; ++i) (nonzero[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];

    if (n <= exact_limit) {
        // Doubled ranks are integers even with ties. count[s] is the number
        // of sign assignments whose doubled positive-rank sum equals s.
        std::vector<int> doubled(n);
        for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
        const int max_sum = std::accumulate(doubled.begin(), doubled.end(), 0);
        std::vector<double> count(static_cast<std::size_t>(max_sum) + 1, 0.0);
        count[0] = 1.0;
        int reach = 0;
        for (int r : doubled) {
            for (int s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
            reach += r;
        }
        const double total = std::ldexp(1.0, static_cast<int>(n));
        const int observed = static_cast<int>(std::lround(2.0 * res.w_plus));
        double ge = 0.0;
        double le = 0.0;
        for (int s = 0; s <= max_sum; ++s) {
            if (s >= observed) ge += count[static_cast<std::size_t>(s)];
            if (s <= observed) le += count[static_cast<std::size_t>(s)];
        }
        res.exact = true;
        res.p_greater = ge / total;
        res.p_less = le / total;
    } else {
        const double nn = static_cast<double>(n);
        const double mu = nn * (nn + 1.0) / 4.0;
        double tie_term = 0.0;
        {
            auto sorted = ranks;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < n;) {
                std::size_t j = i + 1;
                while (j < n && sorted[j] == sorted[i]) ++j;
                const double t = static_cast<double>(j - i);
                tie_term += t * t * t - t;
                i = j;
            }
        }
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double sd = std::sqrt(var);
        res.p_greater = 1.0 - normal_cdf((res.w_plus - 0.5 - mu) / sd);
        res.p_less = normal_cdf((res.w_plus + 0.5 - mu) / sd);
    }
    res.p_two_sided = std::min(1.0, 2.0 * std::min(*res.p_greater, *res.p_less));
    return res;
}

}  // namespace streamscribe
