#include "germforge/words.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "germforge/errors.hpp"

namespace germforge {

namespace {

void validate_torsion(const std::optional<Torsion>& torsion) {
    if (torsion && (torsion->k < 2 || torsion->l < 2)) {
        throw SemanticError("torsion orders must be at least 2");
    }
}

// Smallest-magnitude residue of e mod n, positive on ties; 0 means the block vanishes.
int canonical_exponent(int e, int n) {
    int m = e % n;
    if (m < 0) m += n;
    if (m == 0) return 0;
    const int neg = m - n; // in [-n+1, -1]
    if (std::abs(neg) < m) return neg;
    return m; // ties (2m == n) stay positive
}

std::vector<Block> letters_to_blocks(const std::vector<Letter>& letters) {
    std::vector<Block> blocks;
    for (Letter l : letters) {
        const Base b = base_of(l);
        const int s = sign_of(l);
        if (!blocks.empty() && blocks.back().base == b) {
            blocks.back().exponent += s;
        } else {
            blocks.push_back({b, s});
        }
    }
    return blocks;
}

std::vector<Letter> blocks_to_letters(const std::vector<Block>& blocks) {
    std::vector<Letter> letters;
    for (const Block& blk : blocks) {
        const Letter l = make_letter(blk.base, blk.exponent > 0 ? 1 : -1);
        for (int i = 0; i < std::abs(blk.exponent); ++i) letters.push_back(l);
    }
    return letters;
}

// One pass: canonicalize exponents (if torsion), drop vanished blocks, merge
// neighbours that become adjacent. Returns true when anything changed.
bool normalize_blocks_once(std::vector<Block>& blocks, const std::optional<Torsion>& torsion) {
    bool changed = false;
    std::vector<Block> out;
    out.reserve(blocks.size());
    for (Block blk : blocks) {
        if (torsion) {
            const int canon = canonical_exponent(blk.exponent, torsion->order_of(blk.base));
            if (canon != blk.exponent) changed = true;
            blk.exponent = canon;
        }
        if (blk.exponent == 0) {
            changed = true;
            continue;
        }
        if (!out.empty() && out.back().base == blk.base) {
            out.back().exponent += blk.exponent;
            changed = true;
            if (out.back().exponent == 0) out.pop_back();
        } else {
            out.push_back(blk);
        }
    }
    blocks = std::move(out);
    return changed;
}

int letter_rank(Letter l) { return static_cast<int>(l); }

bool lex_less(const std::vector<Letter>& a, const std::vector<Letter>& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [](Letter x, Letter y) { return letter_rank(x) < letter_rank(y); });
}

// Allowed block magnitudes and signs for a generator of order n (0 = free).
struct MagnitudeRule {
    int max_magnitude; // 0 means unbounded
    bool sign_both_at(int m) const {
        if (max_magnitude == 0) return true;
        return 2 * m < bound_order;
    }
    int bound_order = 0;
};

MagnitudeRule rule_for(const std::optional<Torsion>& torsion, Base b) {
    if (!torsion) return {0, 0};
    const int n = torsion->order_of(b);
    return {n / 2, n};
}

} // namespace

Base base_of(Letter l) {
    return (l == Letter::A || l == Letter::AInv) ? Base::A : Base::B;
}

int sign_of(Letter l) {
    return (l == Letter::A || l == Letter::B) ? 1 : -1;
}

Letter make_letter(Base b, int sign) {
    if (b == Base::A) return sign > 0 ? Letter::A : Letter::AInv;
    return sign > 0 ? Letter::B : Letter::BInv;
}

Letter inverse_letter(Letter l) {
    switch (l) {
        case Letter::A: return Letter::AInv;
        case Letter::AInv: return Letter::A;
        case Letter::B: return Letter::BInv;
        case Letter::BInv: return Letter::B;
    }
    return Letter::A;
}

Word reduce_word(const std::vector<Letter>& raw, std::optional<Torsion> torsion) {
    validate_torsion(torsion);
    // Free reduction via a stack, then block-level normalization to a fixpoint.
    std::vector<Letter> stack;
    for (Letter l : raw) {
        if (!stack.empty() && stack.back() == inverse_letter(l)) {
            stack.pop_back();
        } else {
            stack.push_back(l);
        }
    }
    std::vector<Block> blocks = letters_to_blocks(stack);
    while (normalize_blocks_once(blocks, torsion)) {
    }
    return Word(blocks_to_letters(blocks), torsion);
}

std::vector<Block> block_decompose(const Word& w) {
    return letters_to_blocks(w.letters());
}

Word word_from_blocks(const std::vector<Block>& blocks, std::optional<Torsion> torsion) {
    validate_torsion(torsion);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].exponent == 0) throw InvalidWord("block with zero exponent");
        if (i > 0 && blocks[i].base == blocks[i - 1].base) {
            throw InvalidWord("adjacent blocks share a base");
        }
    }
    return reduce_word(blocks_to_letters(blocks), torsion);
}

bool is_pure_power(const Word& w) {
    return block_decompose(w).size() == 1;
}

std::string serialize_word(const Word& w) {
    if (w.empty()) return "e";
    std::string out;
    const std::vector<Block> blocks = block_decompose(w);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) out += '.';
        out += blocks[i].base == Base::A ? 'A' : 'B';
        if (blocks[i].exponent != 1) {
            out += '^';
            out += std::to_string(blocks[i].exponent);
        }
    }
    return out;
}

Word parse_word(const std::string& text, std::optional<Torsion> torsion) {
    validate_torsion(torsion);
    if (text == "e" || text.empty()) return Word({}, torsion);
    std::vector<Block> blocks;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        Base base;
        if (c == 'A') {
            base = Base::A;
        } else if (c == 'B') {
            base = Base::B;
        } else {
            throw SyntaxError(pos, "'A' or 'B'");
        }
        ++pos;
        int exponent = 1;
        if (pos < text.size() && text[pos] == '^') {
            ++pos;
            const std::size_t start = pos;
            if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start])))) {
                throw SyntaxError(start, "integer exponent");
            }
            exponent = std::atoi(text.substr(start, pos - start).c_str());
            if (exponent == 0) throw InvalidWord("zero exponent in word");
        }
        // Dots separate blocks; letters may also abut directly ("AB").
        if (pos < text.size() && text[pos] == '.') ++pos;
        blocks.push_back({base, exponent});
    }
    // Blocks in the serialized form may repeat a base after reduction input;
    // reduce_word normalizes everything.
    std::vector<Letter> letters;
    for (const Block& blk : blocks) {
        const Letter l = make_letter(blk.base, blk.exponent > 0 ? 1 : -1);
        for (int i = 0; i < std::abs(blk.exponent); ++i) letters.push_back(l);
    }
    return reduce_word(letters, torsion);
}

WordEnumerator::WordEnumerator(std::optional<Torsion> torsion, int max_blocks,
                               bool exclude_pure_powers)
    : torsion_(torsion), max_blocks_(max_blocks), exclude_pure_powers_(exclude_pure_powers),
      current_length_(0), max_length_(0), buffer_pos_(0) {
    validate_torsion(torsion_);
    if (max_blocks_ < 1) throw SemanticError("max_blocks must be positive");
    if (torsion_) {
        const std::size_t ma = static_cast<std::size_t>(torsion_->k / 2);
        const std::size_t mb = static_cast<std::size_t>(torsion_->l / 2);
        // Longest word: alternate blocks, the richer base taking the extra slot.
        const std::size_t half = static_cast<std::size_t>(max_blocks_) / 2;
        const std::size_t odd = static_cast<std::size_t>(max_blocks_) % 2;
        max_length_ = half * (ma + mb) + odd * std::max(ma, mb);
    }
}

void WordEnumerator::refill() {
    buffer_.clear();
    buffer_pos_ = 0;
    ++current_length_;
    const std::size_t L = current_length_;
    const MagnitudeRule rule_a = rule_for(torsion_, Base::A);
    const MagnitudeRule rule_b = rule_for(torsion_, Base::B);

    std::vector<Block> stack;
    std::vector<Word> found;

    // Depth-first over alternating block sequences with total magnitude L.
    auto dfs = [&](auto&& self, Base next_base, std::size_t remaining, int blocks_left) -> void {
        if (remaining == 0) {
            if (exclude_pure_powers_ && stack.size() == 1) return;
            found.emplace_back(Word(
                [&] {
                    std::vector<Letter> ls;
                    for (const Block& blk : stack) {
                        const Letter l = make_letter(blk.base, blk.exponent > 0 ? 1 : -1);
                        for (int i = 0; i < std::abs(blk.exponent); ++i) ls.push_back(l);
                    }
                    return ls;
                }(),
                torsion_));
            return;
        }
        if (blocks_left == 0) return;
        const MagnitudeRule& rule = next_base == Base::A ? rule_a : rule_b;
        const std::size_t cap =
            rule.max_magnitude == 0 ? remaining
                                    : std::min(remaining, static_cast<std::size_t>(rule.max_magnitude));
        for (std::size_t m = 1; m <= cap; ++m) {
            const bool both = rule.max_magnitude == 0 || rule.sign_both_at(static_cast<int>(m));
            for (int sign : both ? std::vector<int>{1, -1} : std::vector<int>{1}) {
                stack.push_back({next_base, sign * static_cast<int>(m)});
                self(self, next_base == Base::A ? Base::B : Base::A, remaining - m, blocks_left - 1);
                stack.pop_back();
            }
        }
    };
    dfs(dfs, Base::A, L, max_blocks_);
    dfs(dfs, Base::B, L, max_blocks_);

    std::sort(found.begin(), found.end(), [](const Word& a, const Word& b) {
        return lex_less(a.letters(), b.letters());
    });
    buffer_ = std::move(found);
}

std::optional<Word> WordEnumerator::next() {
    // Degenerate: single-block words are all pure powers.
    if (!torsion_ && exclude_pure_powers_ && max_blocks_ == 1) return std::nullopt;
    while (buffer_pos_ >= buffer_.size()) {
        if (torsion_ && current_length_ >= max_length_) return std::nullopt;
        refill();
    }
    return buffer_[buffer_pos_++];
}

std::vector<Word> enumerate_words(std::optional<Torsion> torsion, int max_blocks,
                                  bool exclude_pure_powers,
                                  std::optional<std::size_t> max_letters) {
    if (!torsion && !max_letters) {
        throw SemanticError("free enumeration needs an explicit letter bound");
    }
    std::vector<Word> out;
    WordEnumerator en(torsion, max_blocks, exclude_pure_powers);
    while (auto w = en.next()) {
        if (max_letters && w->length() > *max_letters) break;
        out.push_back(std::move(*w));
    }
    return out;
}

} // namespace germforge
