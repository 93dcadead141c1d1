#include "routewise/metrics.hpp"

#include "routewise/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace routewise {

namespace {

// Decodes the code point at `pos`, returning its byte length. Malformed
// sequences are consumed one byte at a time and never count as whitespace.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char lead = byte(pos);
    std::size_t len = 1;
    if (lead < 0x80) {
        cp = lead;
        return 1;
    }
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        cp = 0xFFFD;
        return 1;
    }
    if (pos + len > text.size()) {
        cp = 0xFFFD;
        return 1;
    }
    for (std::size_t i = 1; i < len; ++i) {
        if ((byte(pos + i) & 0xC0) != 0x80) {
            cp = 0xFFFD;
            return 1;
        }
        cp = (cp << 6) | (byte(pos + i) & 0x3F);
    }
    return len;
}

bool is_unicode_space(char32_t cp) {
    return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
           cp == 0x205F || cp == 0x3000;
}

// Splits on whitespace and lowercases ASCII.
std::vector<std::string> split_lower(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        const std::size_t len = decode_utf8(text, pos, cp);
        if (is_unicode_space(cp)) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            for (std::size_t i = 0; i < len; ++i)
                current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + i]))));
        }
        pos += len;
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

bool is_ascii_punct(char c) { return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c)); }

}  // namespace

std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& word : split_lower(text)) {
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

std::vector<std::string> rouge_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& word : split_lower(text)) {
        std::size_t begin = 0, end = word.size();
        while (begin < end && is_ascii_punct(word[begin])) ++begin;
        while (end > begin && is_ascii_punct(word[end - 1])) --end;
        if (begin < end) out.push_back(word.substr(begin, end - begin));
    }
    return out;
}

int accuracy_contains(std::string_view generation, std::span<const std::string> answers) {
    const std::string haystack = normalize_text(generation);
    for (const auto& answer : answers) {
        const std::string needle = normalize_text(answer);
        if (!needle.empty() && haystack.find(needle) != std::string::npos) return 1;
    }
    return 0;
}

double rouge2_f1(std::string_view candidate, std::string_view reference) {
    const auto bigrams = [](const std::vector<std::string>& tokens) {
        std::map<std::pair<std::string, std::string>, std::size_t> counts;
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++counts[{tokens[i], tokens[i + 1]}];
        return counts;
    };
    const auto cand_tokens = rouge_tokens(candidate);
    const auto ref_tokens = rouge_tokens(reference);
    if (cand_tokens.size() < 2 || ref_tokens.size() < 2) return 0.0;

    const auto cand = bigrams(cand_tokens);
    const auto ref = bigrams(ref_tokens);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
        const auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(cand_tokens.size() - 1);
    const double recall = static_cast<double>(overlap) / static_cast<double>(ref_tokens.size() - 1);
    return 2.0 * precision * recall / (precision + recall);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
        // positions start..end-1 are 1-based ranks start+1..end
        const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t p = start; p < end; ++p) ranks[order[p]] = rank;
        start = end;
    }
    return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(ErrorCode::invalid_argument, "spearman inputs differ in length");
    if (a.size() < 2) fail(ErrorCode::invalid_argument, "spearman needs at least two values");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            fail(ErrorCode::invalid_argument, "spearman inputs must be finite");

    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        var_a += (ra[i] - mean) * (ra[i] - mean);
        var_b += (rb[i] - mean) * (rb[i] - mean);
    }
    if (var_a == 0.0 || var_b == 0.0)
        fail(ErrorCode::undefined_value, "spearman correlation is undefined for a constant input");
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

std::size_t competition_rank(std::span<const double> values, std::size_t index) {
    if (index >= values.size()) fail(ErrorCode::invalid_argument, "rank index out of range");
    std::size_t better = 0;
    for (double v : values) better += v > values[index] ? 1 : 0;
    return better + 1;
}

std::vector<std::size_t> rank_histogram(std::span<const std::vector<double>> per_sample_quality,
                                        std::span<const RoutingDecision> decisions) {
    if (per_sample_quality.size() != decisions.size())
        fail(ErrorCode::invalid_argument, "rank histogram needs one decision per sample");
    if (per_sample_quality.empty()) return {};
    const std::size_t m = per_sample_quality.front().size();
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t s = 0; s < decisions.size(); ++s) {
        const auto& q = per_sample_quality[s];
        if (q.size() != m) fail(ErrorCode::inconsistent_embeddings, "quality rows differ in length");
        ++counts[competition_rank(q, decisions[s].chosen) - 1];
    }
    return counts;
}

}  // namespace routewise
