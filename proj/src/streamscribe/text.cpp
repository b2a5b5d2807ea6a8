#include "streamscribe/text.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "streamscribe/error.hpp"

namespace streamscribe {

namespace {

#include "contractions.inc"

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
           (u >= 123 && u <= 126);
}

char ascii_lower(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_word_char(char c) noexcept {
    return !is_ascii_punct(c) && !is_space(c);
}

// Unicode punctuation commonly emitted by ASR models, as UTF-8 sequences.
// Curly apostrophes are mapped to ASCII first so contractions still match.
constexpr std::string_view kCurlyApostrophes[] = {"\xE2\x80\x98", "\xE2\x80\x99"};
constexpr std::string_view kUnicodePunct[] = {
    "\xE2\x80\x9C", "\xE2\x80\x9D",  // double quotes
    "\xE2\x80\x93", "\xE2\x80\x94",  // en / em dash
    "\xE2\x80\xA6",                  // ellipsis
    "\xC2\xBF", "\xC2\xA1",          // inverted ? and !
    "\xC2\xAB", "\xC2\xBB",          // guillemets
};

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

namespace {

// Single-row DP over positions; eq(i, j) compares a[i] with b[j]. Short
// inputs keep the row on the stack.
template <typename Eq>
std::size_t edit_distance(std::size_t n, std::size_t m, Eq eq) {
    constexpr std::size_t kStack = 64;
    std::uint32_t stack_row[kStack];
    std::vector<std::uint32_t> heap_row;
    std::uint32_t* row = stack_row;
    if (m + 1 > kStack) {
        heap_row.resize(m + 1);
        row = heap_row.data();
    }
    for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<std::uint32_t>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        std::uint32_t diag = row[0];
        row[0] = static_cast<std::uint32_t>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const std::uint32_t up = row[j];
            const std::uint32_t sub = diag + (eq(i - 1, j - 1) ? 0u : 1u);
            row[j] = std::min(sub, std::min(up, row[j - 1]) + 1u);
            diag = up;
        }
    }
    return row[m];
}

// Bit-parallel global edit distance (Myers, in Hyyro's formulation) for a
// pattern of 1..64 symbols. peq(t) returns the match mask of text symbol t
// against the pattern.
template <typename Peq>
std::size_t bit_parallel_distance(std::size_t pattern_size, std::size_t text_size, Peq peq) {
    const std::uint64_t high = std::uint64_t{1} << (pattern_size - 1);
    std::uint64_t pv = pattern_size == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << pattern_size) - 1;
    std::uint64_t mv = 0;
    std::size_t score = pattern_size;
    for (std::size_t t = 0; t < text_size; ++t) {
        const std::uint64_t eq = peq(t);
        const std::uint64_t xv = eq | mv;
        const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
        std::uint64_t ph = mv | ~(xh | pv);
        std::uint64_t mh = pv & xh;
        score += static_cast<std::size_t>((ph & high) != 0);
        score -= static_cast<std::size_t>((mh & high) != 0);
        ph = (ph << 1) | 1;
        mh <<= 1;
        pv = mh | ~(xv | ph);
        mv = ph & xv;
    }
    return score;
}

// Length plus the first eight bytes. Equal keys mean equal tokens unless
// both are longer than eight bytes.
struct TokenKey {
    std::uint64_t prefix;
    std::size_t size;
};

TokenKey key_of(const std::string& token) {
    TokenKey k{0, token.size()};
    const std::size_t n = std::min<std::size_t>(token.size(), 8);
    for (std::size_t i = 0; i < n; ++i) k.prefix |= std::uint64_t{static_cast<unsigned char>(token[i])} << (8 * i);
    return k;
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();
    if (b.size() <= 64) {
        // Distinct pattern bytes get slots; everything else matches nothing.
        std::uint8_t slot[256];
        std::memset(slot, 0xff, sizeof slot);
        std::uint64_t masks[64];
        std::size_t used = 0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            auto& s = slot[static_cast<unsigned char>(b[i])];
            if (s == 0xff) {
                s = static_cast<std::uint8_t>(used);
                masks[used++] = 0;
            }
            masks[s] |= std::uint64_t{1} << i;
        }
        return bit_parallel_distance(b.size(), a.size(), [&](std::size_t t) {
            const auto s = slot[static_cast<unsigned char>(a[t])];
            return s == 0xff ? std::uint64_t{0} : masks[s];
        });
    }
    return edit_distance(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i] == b[j]; });
}

std::size_t token_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto& text = a.size() < b.size() ? b : a;
    const auto& pattern = a.size() < b.size() ? a : b;
    if (pattern.empty()) return text.size();
    const auto same = [](const TokenKey& x, const std::string& xs, const TokenKey& y, const std::string& ys) {
        return x.prefix == y.prefix && x.size == y.size && (x.size <= 8 || xs == ys);
    };
    if (pattern.size() <= 64) {
        // Distinct pattern tokens with their position masks.
        TokenKey keys[64];
        std::size_t first[64];
        std::uint64_t masks[64];
        std::size_t used = 0;
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            const auto k = key_of(pattern[i]);
            std::size_t s = 0;
            while (s < used && !same(keys[s], pattern[first[s]], k, pattern[i])) ++s;
            if (s == used) {
                keys[s] = k;
                first[s] = i;
                masks[s] = 0;
                ++used;
            }
            masks[s] |= std::uint64_t{1} << i;
        }
        return bit_parallel_distance(pattern.size(), text.size(), [&](std::size_t t) {
            const auto k = key_of(text[t]);
            if (k.size > 8) {
                for (std::size_t s = 0; s < used; ++s) {
                    if (same(keys[s], pattern[first[s]], k, text[t])) return masks[s];
                }
                return std::uint64_t{0};
            }
            // Short keys are exact, so at most one slot matches.
            std::uint64_t eq = 0;
            for (std::size_t s = 0; s < used; ++s) {
                eq |= masks[s] & (std::uint64_t{0} - ((keys[s].prefix == k.prefix) & (keys[s].size == k.size)));
            }
            return eq;
        });
    }
    std::vector<TokenKey> kt(text.size()), kp(pattern.size());
    for (std::size_t i = 0; i < text.size(); ++i) kt[i] = key_of(text[i]);
    for (std::size_t j = 0; j < pattern.size(); ++j) kp[j] = key_of(pattern[j]);
    return edit_distance(text.size(), pattern.size(),
                         [&](std::size_t i, std::size_t j) { return same(kt[i], text[i], kp[j], pattern[j]); });
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

std::string join(const std::vector<std::string>& tokens, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t i = first; i < last && i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string compare_token(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (!is_ascii_punct(c)) out += ascii_lower(c);
    }
    return out;
}

std::string compare_form(std::string_view text) {
    std::string out;
    for (const auto& token : tokenize(text)) {
        auto c = compare_token(token);
        if (c.empty()) continue;
        if (!out.empty()) out += ' ';
        out += c;
    }
    return out;
}

Suggestion generate_suggestion(std::string_view new_trx, std::string_view prev_trx) {
    const auto tokens = tokenize(new_trx);
    const std::string target = compare_form(prev_trx);

    // Compare form of the full transcription, plus the length of the compare
    // form of every prefix t1..tk. Each prefix's compare form is a prefix of
    // the full one, so one DP pass yields all n+1 distances.
    std::string full;
    std::vector<std::size_t> prefix_len(tokens.size() + 1, 0);
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        auto c = compare_token(tokens[k]);
        if (!c.empty()) {
            if (!full.empty()) full += ' ';
            full += c;
        }
        prefix_len[k + 1] = full.size();
    }

    // distance_at[i] = levenshtein(full[0..i), target)
    std::vector<std::size_t> distance_at(full.size() + 1);
    std::vector<std::size_t> row(target.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    distance_at[0] = row[target.size()];
    for (std::size_t i = 1; i <= full.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= target.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (full[i - 1] == target[j - 1] ? 0u : 1u)});
            diag = up;
        }
        distance_at[i] = row[target.size()];
    }

    Suggestion best;
    best.distance = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = tokens.size() + 1; k-- > 0;) {
        const std::size_t d = distance_at[prefix_len[k]];
        if (d < best.distance) {
            best.distance = d;
            best.overlap_token_count = k;
        }
    }
    best.text = join(tokens, best.overlap_token_count, tokens.size());
    return best;
}

void HallucinationConfig::validate() const {
    if (max_ngram < 1) throw Error(ErrorCode::config, "max_ngram must be at least 1");
    if (repeat_threshold < 2) throw Error(ErrorCode::config, "repeat_threshold must be at least 2");
}

HallucinationVerdict detect_hallucination(std::string_view text, const HallucinationConfig& config) {
    config.validate();
    const auto tokens = tokenize(text);
    std::vector<std::string> keys;
    keys.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto k = compare_token(t);
        keys.push_back(k.empty() ? t : std::move(k));
    }

    const auto units_equal = [&](std::size_t a, std::size_t b, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (keys[a + i] != keys[b + i]) return false;
        }
        return true;
    };

    HallucinationVerdict verdict;
    std::vector<std::string> kept;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t run_n = 0;
        std::size_t run_reps = 0;
        for (std::size_t n = 1; n <= static_cast<std::size_t>(config.max_ngram); ++n) {
            if (i + n > tokens.size()) break;
            std::size_t reps = 1;
            while (i + (reps + 1) * n <= tokens.size() && units_equal(i, i + reps * n, n)) ++reps;
            if (reps >= static_cast<std::size_t>(config.repeat_threshold)) {
                run_n = n;
                run_reps = reps;
                break;
            }
        }
        if (run_n == 0) {
            kept.push_back(tokens[i]);
            ++i;
            continue;
        }
        if (!verdict.detected) {
            verdict.detected = true;
            verdict.repeated_unit = join(tokens, i, i + run_n);
            verdict.repeat_count = static_cast<int>(run_reps);
        }
        for (std::size_t j = 0; j < run_n; ++j) kept.push_back(tokens[i + j]);
        i += run_n * run_reps;
    }
    verdict.filtered_text = join(kept, 0, kept.size());
    return verdict;
}

ContractionTable::ContractionTable(std::unordered_map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

const ContractionTable& ContractionTable::english() {
    static const ContractionTable table = parse(kEnglishContractionsTsv);
    return table;
}

ContractionTable ContractionTable::parse(std::string_view tsv) {
    std::unordered_map<std::string, std::string> entries;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw Error(ErrorCode::config,
                        "contraction table line " + std::to_string(line_no) + " is not key<TAB>value");
        }
        std::string key = line.substr(0, tab);
        std::transform(key.begin(), key.end(), key.begin(), ascii_lower);
        entries[std::move(key)] = line.substr(tab + 1);
    }
    return ContractionTable(std::move(entries));
}

ContractionTable ContractionTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open contraction table " + path.string());
    std::ostringstream content;
    content << in.rdbuf();
    return parse(content.str());
}

const std::string* ContractionTable::find(std::string_view contraction) const {
    auto it = entries_.find(std::string(contraction));
    return it == entries_.end() ? nullptr : &it->second;
}

std::string normalize(std::string_view text, const ContractionTable& table) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
    for (auto apostrophe : kCurlyApostrophes) lowered = replace_all(std::move(lowered), apostrophe, "'");

    std::string expanded;
    for (const auto& token : tokenize(lowered)) {
        // Look the contraction up without any surrounding punctuation.
        std::size_t begin = 0;
        std::size_t end = token.size();
        while (begin < end && !is_word_char(token[begin])) ++begin;
        while (end > begin && !is_word_char(token[end - 1])) --end;
        std::string piece = token;
        if (end > begin) {
            if (const auto* expansion = table.find(std::string_view(token).substr(begin, end - begin))) {
                piece = token.substr(0, begin) + *expansion + token.substr(end);
            }
        }
        if (!expanded.empty()) expanded += ' ';
        expanded += piece;
    }

    for (auto p : kUnicodePunct) expanded = replace_all(std::move(expanded), p, " ");

    std::string out;
    out.reserve(expanded.size());
    bool pending_space = false;
    for (char c : expanded) {
        if (is_ascii_punct(c)) continue;
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

}  // namespace streamscribe
