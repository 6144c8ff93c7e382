#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "germforge/errors.hpp"
#include "germforge/map_expr.hpp"

namespace germforge {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// Recursive-descent cursor over the source text. All errors carry the byte
// offset of the offending character.
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr_node();
        skip_ws();
        if (pos_ != text_.size()) {
            throw SyntaxError(pos_, "end of input");
        }
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c, const char* what) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw SyntaxError(pos_, what);
        }
        ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string read_ident() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) {
            throw SyntaxError(start, "expression name (rot, poly, moeb, comp, inv, conj)");
        }
        return text_.substr(start, pos_ - start);
    }

    bool at_number() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return true;
        return c == '.' && pos_ + 1 < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
    }

    double read_number() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '.')) {
            throw SyntaxError(start, "number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t exp_pos = pos_ + 1;
            if (exp_pos < text_.size() && (text_[exp_pos] == '+' || text_[exp_pos] == '-')) ++exp_pos;
            std::size_t digits = exp_pos;
            while (digits < text_.size() && std::isdigit(static_cast<unsigned char>(text_[digits]))) ++digits;
            if (digits > exp_pos) pos_ = digits; // only consume a complete exponent
        }
        return std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr);
    }

    bool at_word(const char* w) {
        skip_ws();
        std::size_t n = 0;
        while (w[n] != '\0') ++n;
        if (pos_ + n > text_.size() || text_.compare(pos_, n, w) != 0) return false;
        // keyword must not continue as a longer identifier
        if (pos_ + n < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_ + n]))) return false;
        return true;
    }

    // --- real arithmetic for angles ---------------------------------------

    double real_expr() {
        double v = real_term();
        while (true) {
            if (accept('+')) {
                v += real_term();
            } else if (accept('-')) {
                v -= real_term();
            } else {
                return v;
            }
        }
    }

    double real_term() {
        double v = real_factor();
        while (true) {
            if (accept('*')) {
                v *= real_factor();
            } else if (accept('/')) {
                const std::size_t at = pos_;
                const double d = real_factor();
                if (d == 0.0) throw SyntaxError(at, "nonzero divisor");
                v /= d;
            } else {
                return v;
            }
        }
    }

    double real_factor() {
        skip_ws();
        if (accept('-')) return -real_factor();
        if (accept('+')) return real_factor();
        double v;
        if (at_word("pi")) {
            pos_ += 2;
            v = kPi;
        } else if (at_number()) {
            v = read_number();
        } else if (accept('(')) {
            v = real_expr();
            expect(')', "')'");
        } else {
            throw SyntaxError(pos_, "number, pi, or '('");
        }
        // implicit multiplication: "2pi", "2(1+1)", "pi(...)"
        while (true) {
            if (at_word("pi")) {
                pos_ += 2;
                v *= kPi;
            } else if (peek() == '(') {
                ++pos_;
                v *= real_expr();
                expect(')', "')'");
            } else {
                return v;
            }
        }
    }

    // --- complex literals: a, bi, a+bi, a-bi (i alone means 1i) ------------

    Complex complex_literal() {
        skip_ws();
        double sign = 1.0;
        if (accept('-')) sign = -1.0;
        else accept('+');

        double first;
        bool first_imag = false;
        if (at_word("i")) {
            pos_ += 1;
            first = 1.0;
            first_imag = true;
        } else if (at_number()) {
            first = read_number();
            if (at_word("i")) {
                pos_ += 1;
                first_imag = true;
            }
        } else {
            throw SyntaxError(pos_, "complex literal");
        }
        first *= sign;
        if (first_imag) return Complex(0.0, first);

        skip_ws();
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
            const double s2 = (text_[pos_] == '-') ? -1.0 : 1.0;
            ++pos_;
            skip_ws();
            double b;
            if (at_word("i")) {
                pos_ += 1;
                b = 1.0;
            } else if (at_number()) {
                b = read_number();
                if (!at_word("i")) throw SyntaxError(pos_, "'i' after imaginary part");
                pos_ += 1;
            } else {
                throw SyntaxError(pos_, "imaginary part");
            }
            return Complex(first, s2 * b);
        }
        return Complex(first, 0.0);
    }

    // --- expression nodes ---------------------------------------------------

    ExprPtr parse_expr_node() {
        skip_ws();
        const std::size_t name_pos = pos_;
        const std::string name = read_ident();
        expect('(', "'('");
        if (name == "rot") {
            const double angle = real_expr();
            expect(')', "')'");
            return make_rotation(angle);
        }
        if (name == "poly") {
            std::vector<Complex> coeffs;
            coeffs.push_back(complex_literal());
            while (accept(',')) coeffs.push_back(complex_literal());
            expect(')', "')'");
            return make_polynomial(std::move(coeffs));
        }
        if (name == "moeb") {
            const Complex a = complex_literal();
            expect(',', "','");
            const Complex b = complex_literal();
            expect(',', "','");
            const Complex c = complex_literal();
            expect(',', "','");
            const Complex d = complex_literal();
            expect(')', "')'");
            return make_moebius(a, b, c, d);
        }
        if (name == "comp") {
            ExprPtr f = parse_expr_node();
            expect(',', "','");
            ExprPtr g = parse_expr_node();
            expect(')', "')'");
            return make_compose(std::move(f), std::move(g));
        }
        if (name == "inv") {
            ExprPtr inner = parse_expr_node();
            expect(')', "')'");
            return make_inverse(std::move(inner));
        }
        if (name == "conj") {
            ExprPtr base = parse_expr_node();
            expect(',', "','");
            ExprPtr by = parse_expr_node();
            expect(')', "')'");
            return make_conjugate(std::move(base), std::move(by));
        }
        throw SyntaxError(name_pos, "one of rot, poly, moeb, comp, inv, conj");
    }
};

} // namespace

ExprPtr parse_expr(const std::string& text) {
    Parser p(text);
    return p.parse();
}

} // namespace germforge
