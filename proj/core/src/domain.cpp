#include "acsa/domain.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "acsa/errors.hpp"

namespace acsa {

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::positive: return "positive";
        case Polarity::neutral: return "neutral";
        case Polarity::negative: return "negative";
    }
    return "neutral";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
    if (s == "positive") return Polarity::positive;
    if (s == "neutral") return Polarity::neutral;
    if (s == "negative") return Polarity::negative;
    return std::nullopt;
}

bool pair_less(const Pair& a, const Pair& b) {
    if (a.category != b.category) return a.category < b.category;
    return to_string(a.polarity) < to_string(b.polarity);
}

PairList canonical_form(const PairList& list) {
    PairList out = list;
    std::sort(out.begin(), out.end(), pair_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::string fold_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

CategorySchema CategorySchema::make(std::vector<std::string> labels, std::string domain_name) {
    if (labels.empty()) throw ConfigError("category schema needs at least one label");
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (label.empty()) throw ConfigError("category schema contains an empty label");
        if (!seen.insert(fold_ascii(label)).second)
            throw ConfigError("category schema label duplicated after case-folding: " + label);
    }
    return CategorySchema{std::move(labels), std::move(domain_name)};
}

std::string_view plural_name(Element e) {
    switch (e) {
        case Element::aspect: return "Aspects";
        case Element::category: return "Categories";
        case Element::opinion: return "Opinions";
    }
    return "Aspects";
}

namespace {

char element_letter(Element e) {
    switch (e) {
        case Element::aspect: return 'A';
        case Element::category: return 'C';
        case Element::opinion: return 'O';
    }
    return 'A';
}

std::optional<Element> element_from_letter(char c) {
    switch (c) {
        case 'A': return Element::aspect;
        case 'C': return Element::category;
        case 'O': return Element::opinion;
    }
    return std::nullopt;
}

}  // namespace

std::string ElementOrder::code() const {
    std::string out;
    for (Element e : sequence) out.push_back(element_letter(e));
    return out;
}

std::string ElementOrder::label() const {
    std::string out;
    for (Element e : sequence) {
        if (!out.empty()) out.push_back('>');
        out.push_back(element_letter(e));
    }
    return out;
}

int ElementOrder::position_of(Element e) const {
    for (int i = 0; i < 3; ++i)
        if (sequence[static_cast<std::size_t>(i)] == e) return i;
    return -1;
}

std::optional<ElementOrder> ElementOrder::from_code(std::string_view code) {
    if (code.size() != 3) return std::nullopt;
    ElementOrder order;
    bool seen[3] = {false, false, false};
    for (std::size_t i = 0; i < 3; ++i) {
        auto e = element_from_letter(code[i]);
        if (!e) return std::nullopt;
        if (seen[static_cast<int>(*e)]) return std::nullopt;
        seen[static_cast<int>(*e)] = true;
        order.sequence[i] = *e;
    }
    return order;
}

std::vector<ElementOrder> all_element_orders() {
    // Lexicographic on (aspect, category, opinion); first A>C>O, last O>C>A.
    std::array<Element, 3> base{Element::aspect, Element::category, Element::opinion};
    std::vector<ElementOrder> out;
    do {
        out.push_back(ElementOrder{base});
    } while (std::next_permutation(base.begin(), base.end(), [](Element a, Element b) {
        return static_cast<int>(a) < static_cast<int>(b);
    }));
    return out;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "test";
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    return std::nullopt;
}

ScoredList make_scored_list(std::vector<ScoredPair> pairs) {
    ScoredList out;
    out.pairs = std::move(pairs);
    if (!out.pairs.empty()) {
        double sum = 0.0;
        for (const auto& p : out.pairs) sum += p.confidence;
        out.list_confidence = sum / static_cast<double>(out.pairs.size());
    }
    return out;
}

PairList pairs_of(const ScoredList& list) {
    PairList out;
    out.reserve(list.pairs.size());
    for (const auto& p : list.pairs) out.push_back(p.pair);
    return out;
}

}  // namespace acsa
