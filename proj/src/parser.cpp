#include "fitk/parser.hpp"

#include <cctype>

namespace fitk {

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::set<std::string>& names)
        : s_(text), names_(names) {}

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& s_;
    const std::set<std::string>& names_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) { ++pos_; return true; }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) e = e * unary();
            else if (accept('/')) e = e / unary();
            else return e;
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (accept('^')) {
            std::size_t at = pos_;
            Expr ex = unary();
            auto r = ex.exact_value();
            if (!r) throw ParseError("exponent must be a rational constant", at);
            return Expr::pow(base, *r);
        }
        return base;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // the 'e' belongs to an identifier or is junk
            }
        }
        std::string tok = s_.substr(start, pos_ - start);
        if (tok == ".") throw ParseError("malformed number", start);
        try {
            return Expr::number(Rational::parse(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    Expr ident() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(start, pos_ - start);
        if (name == "exp" || name == "ln" || name == "sqrt" || name == "sin" || name == "cos") {
            expect('(');
            Expr arg = expr();
            expect(')');
            if (name == "exp") return exp_of(arg);
            if (name == "ln") return ln_of(arg);
            if (name == "sqrt") return sqrt_of(arg);
            if (name == "sin") return sin_of(arg);
            return cos_of(arg);
        }
        if (!names_.count(name)) throw ParseError("unknown identifier '" + name + "'", start);
        return Expr::symbol(name);
    }
};

}  // namespace

Expr parse_expr(const std::string& text, const std::set<std::string>& known_names) {
    return Parser(text, known_names).run();
}

}  // namespace fitk
