#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace germforge {

// Generators of the two-generator group and their inverses.
// Lexicographic rank: A < A^-1 < B < B^-1.
enum class Letter : std::uint8_t { A = 0, AInv = 1, B = 2, BInv = 3 };

enum class Base : std::uint8_t { A = 0, B = 1 };

Base base_of(Letter l);
int sign_of(Letter l); // +1 for A/B, -1 for the inverses
Letter make_letter(Base b, int sign);
Letter inverse_letter(Letter l);

// Maximal run of one generator: base^exponent, exponent != 0.
struct Block {
    Base base;
    int exponent;

    bool operator==(const Block&) const = default;
};

// Optional torsion pair (k, l): relations A^k = B^l = identity.
// k, l >= 2 when present.
struct Torsion {
    int k;
    int l;

    int order_of(Base b) const { return b == Base::A ? k : l; }
    bool operator==(const Torsion&) const = default;
};

// A word in normal form: reduced letter sequence (no cancelling adjacencies;
// with torsion, block exponents in the canonical residue range).
class Word {
public:
    Word() = default;
    Word(std::vector<Letter> letters, std::optional<Torsion> torsion)
        : letters_(std::move(letters)), torsion_(torsion) {}

    const std::vector<Letter>& letters() const { return letters_; }
    const std::optional<Torsion>& torsion() const { return torsion_; }

    bool empty() const { return letters_.empty(); }
    std::size_t length() const { return letters_.size(); }

    bool operator==(const Word&) const = default;

private:
    std::vector<Letter> letters_;
    std::optional<Torsion> torsion_;
};

// Reduce a raw letter sequence to normal form. Free reduction cancels
// adjacent inverse pairs; with torsion, each block exponent is mapped to its
// smallest-magnitude residue mod the generator order (positive on ties), and
// reduction recurses until stable. The empty word is a valid result.
Word reduce_word(const std::vector<Letter>& raw, std::optional<Torsion> torsion);

// Group a normal-form word into alternating blocks.
std::vector<Block> block_decompose(const Word& w);

// Assemble a word from blocks (validates alternation and nonzero exponents,
// then normalizes through reduce_word).
Word word_from_blocks(const std::vector<Block>& blocks, std::optional<Torsion> torsion);

bool is_pure_power(const Word& w);

// Compact form "A^2.B^-3"; exponent suffix omitted when +1. Empty word: "e".
std::string serialize_word(const Word& w);

// Parse the serialize_word format (letters 'A'/'B', optional ^exp, '.' separators).
Word parse_word(const std::string& text, std::optional<Torsion> torsion);

// Streams every nonempty normal-form word with at most max_blocks blocks,
// each exactly once, in length-lexicographic order (shorter words first,
// ties by letter rank). Without torsion the stream is infinite and the
// caller decides when to stop.
class WordEnumerator {
public:
    WordEnumerator(std::optional<Torsion> torsion, int max_blocks, bool exclude_pure_powers);

    // Next word in order, or nullopt when the (finite) stream is exhausted.
    std::optional<Word> next();

private:
    void refill();

    std::optional<Torsion> torsion_;
    int max_blocks_;
    bool exclude_pure_powers_;
    std::size_t current_length_;
    std::size_t max_length_; // exhaustion bound for torsion streams
    std::vector<Word> buffer_;
    std::size_t buffer_pos_;
};

// Convenience: collect the full finite stream (requires torsion), or the
// first words up to letter length max_letters when free.
std::vector<Word> enumerate_words(std::optional<Torsion> torsion, int max_blocks,
                                  bool exclude_pure_powers,
                                  std::optional<std::size_t> max_letters = std::nullopt);

} // namespace germforge
