#include "llab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "llab/error.hpp"

namespace llab {

struct Expression::Node {
    enum class Kind { Number, X1, X2, T, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 };
    Kind kind = Kind::Number;
    double value = 0.0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;

    double eval(double x1, double x2, double t) const {
        switch (kind) {
            case Kind::Number: return value;
            case Kind::X1: return x1;
            case Kind::X2: return x2;
            case Kind::T: return t;
            case Kind::Neg: return -a->eval(x1, x2, t);
            case Kind::Add: return a->eval(x1, x2, t) + b->eval(x1, x2, t);
            case Kind::Sub: return a->eval(x1, x2, t) - b->eval(x1, x2, t);
            case Kind::Mul: return a->eval(x1, x2, t) * b->eval(x1, x2, t);
            case Kind::Div: return a->eval(x1, x2, t) / b->eval(x1, x2, t);
            case Kind::Pow: return std::pow(a->eval(x1, x2, t), b->eval(x1, x2, t));
            case Kind::Call1: return fn1(a->eval(x1, x2, t));
            case Kind::Call2: return fn2(a->eval(x1, x2, t), b->eval(x1, x2, t));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_exp(double x) { return std::exp(x); }
double f_abs(double x) { return std::fabs(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_min(double a, double b) { return std::fmin(a, b); }
double f_max(double a, double b) { return std::fmax(a, b); }

NodePtr leaf(Kind k, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->value = v;
    return n;
}

NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& s, const std::map<std::string, double>& constants) : s_(s), constants_(constants) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

    bool uses_t = false;

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression \"" + s_ + "\": " + msg + " at column " + std::to_string(pos_ + 1));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = binary(Kind::Add, lhs, term());
            else if (eat('-'))
                lhs = binary(Kind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = binary(Kind::Mul, lhs, unary());
            else if (eat('/'))
                lhs = binary(Kind::Div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) {
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Neg;
            n->a = unary();
            return n;
        }
        if (eat('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return binary(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return leaf(Kind::Number, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(') return call(name);
            if (name == "x1" || name == "x") return leaf(Kind::X1);
            if (name == "x2" || name == "y") return leaf(Kind::X2);
            if (name == "t") {
                uses_t = true;
                return leaf(Kind::T);
            }
            if (name == "pi") return leaf(Kind::Number, std::numbers::pi);
            if (auto it = constants_.find(name); it != constants_.end()) return leaf(Kind::Number, it->second);
            pos_ = start;
            fail("unknown name '" + name + "'");
        }
        fail("unexpected character");
    }

    NodePtr call(const std::string& name) {
        eat('(');
        auto n = std::make_shared<Expression::Node>();
        n->a = expr();
        if (name == "min" || name == "max") {
            if (!eat(',')) fail(name + " takes two arguments");
            n->b = expr();
            n->kind = Kind::Call2;
            n->fn2 = name == "min" ? f_min : f_max;
        } else {
            n->kind = Kind::Call1;
            if (name == "sin") n->fn1 = f_sin;
            else if (name == "cos") n->fn1 = f_cos;
            else if (name == "exp") n->fn1 = f_exp;
            else if (name == "abs") n->fn1 = f_abs;
            else if (name == "sqrt") n->fn1 = f_sqrt;
            else fail("unknown function '" + name + "'");
        }
        if (!eat(')')) fail("expected ')'");
        return n;
    }

    const std::string& s_;
    const std::map<std::string, double>& constants_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(leaf(Kind::Number, 0.0)), source_("0") {}

Expression Expression::parse(const std::string& text, const std::map<std::string, double>& constants) {
    Parser p(text, constants);
    Expression e;
    e.root_ = p.parse();
    e.source_ = text;
    e.uses_t_ = p.uses_t;
    return e;
}

double Expression::operator()(double x1, double x2, double t) const { return root_->eval(x1, x2, t); }

}  // namespace llab
