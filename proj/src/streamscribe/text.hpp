#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace streamscribe {

// Character (byte) level edit distance with unit insert/delete/substitute costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Edit distance between token sequences; used for word error rate.
std::size_t token_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

std::vector<std::string> tokenize(std::string_view text);
std::string join(const std::vector<std::string>& tokens, std::size_t first, std::size_t last);

// Lowercased token with ASCII punctuation removed; may be empty.
std::string compare_token(std::string_view token);
// Space-joined compare_token of every token, skipping tokens that become empty.
std::string compare_form(std::string_view text);

struct Suggestion {
    std::string text;
    std::size_t overlap_token_count = 0;
    std::size_t distance = 0;
};

// Walks prefixes of new_trx from the longest to the empty one and keeps the
// prefix closest (in compare form) to prev_trx; the remaining tokens are the
// suggestion. Ties resolve to the longest prefix.
Suggestion generate_suggestion(std::string_view new_trx, std::string_view prev_trx);

struct HallucinationConfig {
    int max_ngram = 4;
    int repeat_threshold = 5;

    void validate() const;
};

struct HallucinationVerdict {
    bool detected = false;
    std::string repeated_unit;
    int repeat_count = 0;
    std::string filtered_text;
};

// Flags any token n-gram (n <= max_ngram) repeated at least repeat_threshold
// times back to back. Every such run collapses to its first occurrence in
// filtered_text; the verdict reports the first run found.
HallucinationVerdict detect_hallucination(std::string_view text, const HallucinationConfig& config = {});

// Contraction -> expansion map, keys lowercase with ASCII apostrophes.
class ContractionTable {
public:
    ContractionTable() = default;
    explicit ContractionTable(std::unordered_map<std::string, std::string> entries);

    // Built-in English table; identical to data/contractions.tsv.
    static const ContractionTable& english();
    // One `contraction<TAB>expansion` pair per line; blank lines and lines
    // starting with '#' are skipped.
    static ContractionTable load(const std::filesystem::path& path);
    static ContractionTable parse(std::string_view tsv);

    const std::string* find(std::string_view contraction) const;
    std::size_t size() const noexcept { return entries_.size(); }
    const std::unordered_map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::unordered_map<std::string, std::string> entries_;
};

// Lowercase, expand contractions, strip punctuation, collapse whitespace.
std::string normalize(std::string_view text, const ContractionTable& table = ContractionTable::english());

}  // namespace streamscribe
