#include "acsa/parse.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace acsa {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void skip_ws() {
        while (!done() && is_space(peek())) ++pos;
    }
    bool accept(char c) {
        if (!done() && peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
};

struct StringLiteral {
    std::string value;
    CharSpan span;  // inner text, quotes excluded
};

// 'value' or "value"; no escape processing, the closing quote ends it.
std::optional<StringLiteral> parse_string(Cursor& cur) {
    if (cur.done()) return std::nullopt;
    char quote = cur.peek();
    if (quote != '\'' && quote != '"') return std::nullopt;
    ++cur.pos;
    std::size_t begin = cur.pos;
    while (!cur.done() && cur.peek() != quote) ++cur.pos;
    if (cur.done()) return std::nullopt;
    StringLiteral lit;
    lit.span = CharSpan{begin, cur.pos};
    lit.value = std::string(cur.text.substr(begin, cur.pos - begin));
    ++cur.pos;  // closing quote
    return lit;
}

// An ellipsis item, tolerated inside lists so that echoes of the
// instruction's "..., ...]" example still parse.
bool parse_ellipsis(Cursor& cur) {
    std::size_t start = cur.pos;
    if (cur.text.substr(cur.pos, 3) == "...") {
        cur.pos += 3;
        return true;
    }
    // U+2026 horizontal ellipsis
    if (cur.text.substr(cur.pos, 3) == "\xe2\x80\xa6") {
        cur.pos += 3;
        return true;
    }
    cur.pos = start;
    return false;
}

struct Tuple {
    std::vector<StringLiteral> elements;
    bool clean = true;  // false when an element was not a quoted string
};

// ( 'a', 'b', ... ) with tolerated trailing comma. Returns nullopt only
// when this is not a parenthesized group at all.
std::optional<Tuple> parse_tuple(Cursor& cur) {
    if (!cur.accept('(')) return std::nullopt;
    Tuple tup;
    cur.skip_ws();
    if (cur.accept(')')) return tup;  // empty tuple, arity 0
    for (;;) {
        cur.skip_ws();
        if (auto lit = parse_string(cur)) {
            tup.elements.push_back(std::move(*lit));
        } else {
            // Consume a bare token up to the next delimiter; the tuple
            // stays structurally valid but is no longer clean.
            std::size_t start = cur.pos;
            while (!cur.done() && cur.peek() != ',' && cur.peek() != ')') ++cur.pos;
            std::string_view bare = cur.text.substr(start, cur.pos - start);
            while (!bare.empty() && is_space(bare.back())) bare.remove_suffix(1);
            if (!bare.empty()) tup.clean = false;
        }
        cur.skip_ws();
        if (cur.accept(',')) {
            cur.skip_ws();
            if (cur.accept(')')) return tup;  // trailing comma
            continue;
        }
        if (cur.accept(')')) return tup;
        return std::nullopt;
    }
}

// One bracketed list of tuples starting at '['. A candidate must close
// and contain only tuples, ellipses and blanks; a list of bare words or
// plain strings (e.g. an echoed category schema) is not a candidate.
std::optional<ParsedList> parse_candidate(std::string_view text, std::size_t open) {
    Cursor cur{text, open};
    if (!cur.accept('[')) return std::nullopt;
    ParsedList out;
    bool saw_tuple = false;
    cur.skip_ws();
    if (cur.accept(']')) {
        out.list_span = CharSpan{open, cur.pos};
        return out;  // literal empty list: a valid empty prediction
    }
    for (;;) {
        cur.skip_ws();
        if (cur.done()) return std::nullopt;
        if (cur.peek() == '(') {
            auto tup = parse_tuple(cur);
            if (!tup) return std::nullopt;
            saw_tuple = true;
            if (tup->clean && tup->elements.size() == 2) {
                ParsedPair pair;
                pair.raw_category = tup->elements[0].value;
                pair.raw_polarity = tup->elements[1].value;
                pair.category_span = tup->elements[0].span;
                pair.polarity_span = tup->elements[1].span;
                out.pairs.push_back(std::move(pair));
            } else {
                ++out.dropped_tuples;
            }
        } else if (parse_ellipsis(cur)) {
            // ignored
        } else {
            return std::nullopt;
        }
        cur.skip_ws();
        if (cur.accept(',')) {
            cur.skip_ws();
            if (cur.accept(']')) break;  // trailing comma
            continue;
        }
        if (cur.accept(']')) break;
        return std::nullopt;
    }
    if (!saw_tuple) return std::nullopt;
    out.list_span = CharSpan{open, cur.pos};
    return out;
}

}  // namespace

std::optional<ParsedList> extract_list(std::string_view text) {
    std::optional<ParsedList> last;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '[') continue;
        if (auto cand = parse_candidate(text, i)) last = std::move(cand);
    }
    return last;
}

namespace {

std::string fold_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Longest common contiguous block of a[alo,ahi) x b[blo,bhi); among
// equally long blocks the one ending (hence starting) earliest in a,
// then earliest in b. Plain two-row DP.
void longest_block(const std::string& a, std::size_t alo, std::size_t ahi, const std::string& b,
                   std::size_t blo, std::size_t bhi, std::size_t& bi, std::size_t& bj,
                   std::size_t& bk) {
    bi = alo;
    bj = blo;
    bk = 0;
    if (alo >= ahi || blo >= bhi) return;
    std::vector<std::size_t> prev(bhi - blo, 0), cur(bhi - blo, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            std::size_t jj = j - blo;
            std::size_t k = 0;
            if (a[i] == b[j]) k = (i > alo && j > blo) ? prev[jj - 1] + 1 : 1;
            cur[jj] = k;
            if (k > bk) {
                bk = k;
                bi = i + 1 - k;
                bj = j + 1 - k;
            }
        }
        std::swap(prev, cur);
    }
}

std::size_t matched_total(const std::string& a, std::size_t alo, std::size_t ahi,
                          const std::string& b, std::size_t blo, std::size_t bhi) {
    std::size_t bi, bj, bk;
    longest_block(a, alo, ahi, b, blo, bhi, bi, bj, bk);
    if (bk == 0) return 0;
    return bk + matched_total(a, alo, bi, b, blo, bj) +
           matched_total(a, bi + bk, ahi, b, bj + bk, bhi);
}

}  // namespace

double similarity(std::string_view a, std::string_view b) {
    std::string fa = fold_ascii(a);
    std::string fb = fold_ascii(b);
    if (fa.empty() && fb.empty()) return 1.0;
    std::size_t m = matched_total(fa, 0, fa.size(), fb, 0, fb.size());
    return 2.0 * static_cast<double>(m) / static_cast<double>(fa.size() + fb.size());
}

std::pair<std::string, double> map_category(std::string_view raw, const CategorySchema& schema) {
    std::size_t best = 0;
    double best_ratio = -1.0;
    for (std::size_t i = 0; i < schema.labels.size(); ++i) {
        double r = similarity(raw, schema.labels[i]);
        if (r > best_ratio) {  // strict: ties keep the earlier label
            best_ratio = r;
            best = i;
        }
    }
    return {schema.labels[best], best_ratio};
}

Polarity map_polarity(std::string_view raw) {
    std::string folded = fold_ascii(raw);
    if (auto exact = parse_polarity(folded)) return *exact;
    constexpr Polarity order[] = {Polarity::positive, Polarity::neutral, Polarity::negative};
    Polarity best = Polarity::positive;
    double best_ratio = -1.0;
    for (Polarity p : order) {
        double r = similarity(folded, to_string(p));
        if (r > best_ratio) {
            best_ratio = r;
            best = p;
        }
    }
    return best;
}

std::optional<ParsedList> parse_generation(std::string_view text, const CategorySchema& schema,
                                           double min_ratio) {
    auto parsed = extract_list(text);
    if (!parsed) return std::nullopt;
    std::vector<ParsedPair> kept;
    kept.reserve(parsed->pairs.size());
    for (auto& pair : parsed->pairs) {
        auto [label, ratio] = map_category(pair.raw_category, schema);
        if (ratio < min_ratio) {
            ++parsed->dropped_low_ratio;
            continue;
        }
        pair.mapped_category = label;
        pair.match_ratio = ratio;
        pair.mapped_polarity = map_polarity(pair.raw_polarity);
        kept.push_back(std::move(pair));
    }
    parsed->pairs = std::move(kept);
    return parsed;
}

}  // namespace acsa
