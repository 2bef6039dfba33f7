#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sdmp/coefficients.hpp"

namespace sdmp {

// Variables an expression may reference, in Point order.
enum class Var : std::uint8_t { T = 0, X = 1, Xd = 2, V = 3, Vd = 4 };
inline constexpr std::size_t kVarCount = 5;

// Smooth coefficient expressions restricted to sums of products of integer
// powers of the variables and integer powers of sin/cos of single variables:
//
//   c * prod_j  var_j^a_j * sin(var_j)^s_j * cos(var_j)^c_j
//
// This set is closed under differentiation, so derivatives are exact and
// derived symbolically rather than declared by hand. Accepted syntax:
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor (('*' factor) | ('/' number))*
//   factor := primary ['^' integer]
//   primary:= number | var | ('sin'|'cos') '(' var ')' | '(' expr ')' | '-' factor
//   var    := t | x | xd | v | vd
class Expression {
public:
    struct Term {
        double coef = 0.0;
        std::array<std::uint8_t, kVarCount> power{};
        std::array<std::uint8_t, kVarCount> sin_power{};
        std::array<std::uint8_t, kVarCount> cos_power{};
    };

    Expression() = default;
    static Expression constant(double c);
    static Expression variable(Var v);
    static Expression sine(Var v);
    static Expression cosine(Var v);
    // Throws ConfigError with the column of the offending token.
    static Expression parse(std::string_view text);

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool depends_on(Var v) const;

    double eval(const std::array<double, kVarCount>& vars) const;
    // Same, with sin/cos of every variable precomputed by the caller.
    double eval(const std::array<double, kVarCount>& vars, const std::array<double, kVarCount>& sines,
                const std::array<double, kVarCount>& cosines) const;
    Expression derivative(Var v) const;

    Expression operator+(const Expression& o) const;
    Expression operator-(const Expression& o) const;
    Expression operator*(const Expression& o) const;
    Expression scaled(double c) const;

    std::string to_string() const;

private:
    void canonicalize();
    std::vector<Term> terms_;
};

// Coefficient set given by four expressions; h may only reference x.
class ExpressionCoefficients final : public Coefficients {
public:
    ExpressionCoefficients(std::string name, const std::string& drift, const std::string& diffusion,
                           const std::string& running_cost, const std::string& terminal_cost,
                           CoefficientBounds bounds = {});

    std::string name() const override { return name_; }
    ThetaRecord evaluate(const Point& p) const override;
    TerminalRecord terminal(double x) const override;
    CoefficientBounds bounds() const override { return bounds_; }

    const std::array<std::string, 4>& sources() const { return sources_; }

private:
    struct Family {
        std::array<Expression, 6> f;  // value, x, xd, xx, xxd, xdxd
    };
    static Family differentiate(const Expression& e);

    std::string name_;
    std::array<std::string, 4> sources_;
    Family b_, sigma_, cost_;
    std::array<Expression, 3> h_;
    CoefficientBounds bounds_;
};

}  // namespace sdmp
