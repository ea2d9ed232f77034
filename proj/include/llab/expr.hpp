/// @file expr.hpp
/// @brief Arithmetic expressions in x1, x2, t for closed-form scenario data.
///
/// Grammar: numbers, + - * / ^ (right associative, binds tighter than unary
/// minus), parentheses, sin cos exp abs sqrt, min(a,b), max(a,b), the constant
/// pi and caller-supplied named constants.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace llab {

class Expression {
public:
    Expression();

    /// Throws ConfigError with the offending column on malformed input.
    static Expression parse(const std::string& text, const std::map<std::string, double>& constants = {});

    double operator()(double x1, double x2, double t) const;
    const std::string& source() const noexcept { return source_; }

    /// True when the expression does not reference t.
    bool time_independent() const noexcept { return !uses_t_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
    bool uses_t_ = false;
};

}  // namespace llab
