#include "sdmp/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {

constexpr std::array<const char*, kVarCount> kVarNames = {"t", "x", "xd", "v", "vd"};

using Term = Expression::Term;

bool same_monomial(const Term& a, const Term& b) {
    return a.power == b.power && a.sin_power == b.sin_power && a.cos_power == b.cos_power;
}

bool monomial_less(const Term& a, const Term& b) {
    if (a.power != b.power) return a.power < b.power;
    if (a.sin_power != b.sin_power) return a.sin_power < b.sin_power;
    return a.cos_power < b.cos_power;
}

std::uint8_t add_exponent(std::uint8_t a, int b) {
    const int s = a + b;
    if (s > 255) throw ConfigError("expression exponent exceeds 255");
    return static_cast<std::uint8_t>(s);
}

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expression parse() {
        Expression e = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "expression parse error at column " << (pos_ + 1) << ": " << what << " in \""
            << text_ << "\"";
        throw ConfigError(msg.str());
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    std::string identifier() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    double number() {
        skip_space();
        const std::string rest(text_.substr(pos_));
        if (rest.empty() || !(std::isdigit(static_cast<unsigned char>(rest[0])) || rest[0] == '.'))
            fail("expected a number");
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        return value;
    }

    int integer() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a non-negative integer exponent");
        if (pos_ - start > 3) fail("exponent too large");
        return std::stoi(std::string(text_.substr(start, pos_ - start)));
    }

    Var variable(const std::string& name) {
        for (std::size_t j = 0; j < kVarCount; ++j)
            if (name == kVarNames[j]) return static_cast<Var>(j);
        fail("unknown variable '" + name + "'");
    }

    Expression expr() {
        Expression result;
        if (accept('-'))
            result = term().scaled(-1.0);
        else {
            accept('+');
            result = term();
        }
        while (true) {
            if (accept('+'))
                result = result + term();
            else if (accept('-'))
                result = result - term();
            else
                return result;
        }
    }

    Expression term() {
        Expression result = factor();
        while (true) {
            if (accept('*')) {
                result = result * factor();
            } else if (accept('/')) {
                const double d = number();
                if (d == 0.0) fail("division by zero");
                result = result.scaled(1.0 / d);
            } else {
                return result;
            }
        }
    }

    Expression factor() {
        Expression base = primary();
        if (accept('^')) {
            const int e = integer();
            Expression r = Expression::constant(1.0);
            for (int i = 0; i < e; ++i) r = r * base;
            return r;
        }
        return base;
    }

    Expression primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = expr();
            expect(')');
            return e;
        }
        if (c == '-') {
            ++pos_;
            return factor().scaled(-1.0);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return Expression::constant(number());
        const std::string name = identifier();
        if (name.empty()) fail(std::string("unexpected character '") + c + "'");
        if (name == "sin" || name == "cos") {
            expect('(');
            const Var v = variable(identifier());
            expect(')');
            return name == "sin" ? Expression::sine(v) : Expression::cosine(v);
        }
        return Expression::variable(variable(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::constant(double c) {
    Expression e;
    Term t;
    t.coef = c;
    e.terms_.push_back(t);
    e.canonicalize();
    return e;
}

Expression Expression::variable(Var v) {
    Expression e;
    Term t;
    t.coef = 1.0;
    t.power[static_cast<std::size_t>(v)] = 1;
    e.terms_.push_back(t);
    return e;
}

Expression Expression::sine(Var v) {
    Expression e;
    Term t;
    t.coef = 1.0;
    t.sin_power[static_cast<std::size_t>(v)] = 1;
    e.terms_.push_back(t);
    return e;
}

Expression Expression::cosine(Var v) {
    Expression e;
    Term t;
    t.coef = 1.0;
    t.cos_power[static_cast<std::size_t>(v)] = 1;
    e.terms_.push_back(t);
    return e;
}

Expression Expression::parse(std::string_view text) { return Parser(text).parse(); }

bool Expression::depends_on(Var v) const {
    const auto j = static_cast<std::size_t>(v);
    return std::any_of(terms_.begin(), terms_.end(), [j](const Term& t) {
        return t.power[j] || t.sin_power[j] || t.cos_power[j];
    });
}

double Expression::eval(const std::array<double, kVarCount>& vars) const {
    std::array<double, kVarCount> s{}, c{};
    for (std::size_t j = 0; j < kVarCount; ++j) {
        s[j] = std::sin(vars[j]);
        c[j] = std::cos(vars[j]);
    }
    return eval(vars, s, c);
}

double Expression::eval(const std::array<double, kVarCount>& vars,
                        const std::array<double, kVarCount>& sines,
                        const std::array<double, kVarCount>& cosines) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
        double prod = t.coef;
        for (std::size_t j = 0; j < kVarCount; ++j) {
            if (t.power[j]) prod *= ipow(vars[j], t.power[j]);
            if (t.sin_power[j]) prod *= ipow(sines[j], t.sin_power[j]);
            if (t.cos_power[j]) prod *= ipow(cosines[j], t.cos_power[j]);
        }
        sum += prod;
    }
    return sum;
}

Expression Expression::derivative(Var v) const {
    const auto j = static_cast<std::size_t>(v);
    Expression out;
    for (const auto& t : terms_) {
        if (t.power[j]) {
            Term d = t;
            d.coef *= t.power[j];
            d.power[j] -= 1;
            out.terms_.push_back(d);
        }
        if (t.sin_power[j]) {
            Term d = t;
            d.coef *= t.sin_power[j];
            d.sin_power[j] -= 1;
            d.cos_power[j] = add_exponent(d.cos_power[j], 1);
            out.terms_.push_back(d);
        }
        if (t.cos_power[j]) {
            Term d = t;
            d.coef *= -static_cast<double>(t.cos_power[j]);
            d.cos_power[j] -= 1;
            d.sin_power[j] = add_exponent(d.sin_power[j], 1);
            out.terms_.push_back(d);
        }
    }
    out.canonicalize();
    return out;
}

Expression Expression::operator+(const Expression& o) const {
    Expression out = *this;
    out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
    out.canonicalize();
    return out;
}

Expression Expression::operator-(const Expression& o) const { return *this + o.scaled(-1.0); }

Expression Expression::operator*(const Expression& o) const {
    Expression out;
    out.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            Term t;
            t.coef = a.coef * b.coef;
            for (std::size_t j = 0; j < kVarCount; ++j) {
                t.power[j] = add_exponent(a.power[j], b.power[j]);
                t.sin_power[j] = add_exponent(a.sin_power[j], b.sin_power[j]);
                t.cos_power[j] = add_exponent(a.cos_power[j], b.cos_power[j]);
            }
            out.terms_.push_back(t);
        }
    }
    out.canonicalize();
    return out;
}

Expression Expression::scaled(double c) const {
    Expression out = *this;
    for (auto& t : out.terms_) t.coef *= c;
    out.canonicalize();
    return out;
}

void Expression::canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(), monomial_less);
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (!merged.empty() && same_monomial(merged.back(), t))
            merged.back().coef += t.coef;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coef == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
}

std::string Expression::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (i > 0) out += " + ";
        out += format_number(t.coef);
        for (std::size_t j = 0; j < kVarCount; ++j) {
            auto put = [&](const std::string& base, int e) {
                if (e == 0) return;
                out += "*" + base;
                if (e > 1) out += "^" + std::to_string(e);
            };
            put(kVarNames[j], t.power[j]);
            put(std::string("sin(") + kVarNames[j] + ")", t.sin_power[j]);
            put(std::string("cos(") + kVarNames[j] + ")", t.cos_power[j]);
        }
    }
    return out;
}

ExpressionCoefficients::ExpressionCoefficients(std::string name, const std::string& drift,
                                               const std::string& diffusion,
                                               const std::string& running_cost,
                                               const std::string& terminal_cost,
                                               CoefficientBounds bounds)
    : name_(std::move(name)),
      sources_{drift, diffusion, running_cost, terminal_cost},
      bounds_(bounds) {
    b_ = differentiate(Expression::parse(drift));
    sigma_ = differentiate(Expression::parse(diffusion));
    cost_ = differentiate(Expression::parse(running_cost));
    const Expression h = Expression::parse(terminal_cost);
    for (Var v : {Var::T, Var::Xd, Var::V, Var::Vd})
        if (h.depends_on(v))
            throw ConfigError("terminal cost may only depend on x: \"" + terminal_cost + "\"");
    h_[0] = h;
    h_[1] = h.derivative(Var::X);
    h_[2] = h_[1].derivative(Var::X);
}

ExpressionCoefficients::Family ExpressionCoefficients::differentiate(const Expression& e) {
    Family f;
    f.f[0] = e;
    f.f[1] = e.derivative(Var::X);
    f.f[2] = e.derivative(Var::Xd);
    f.f[3] = f.f[1].derivative(Var::X);
    f.f[4] = f.f[1].derivative(Var::Xd);
    f.f[5] = f.f[2].derivative(Var::Xd);
    return f;
}

ThetaRecord ExpressionCoefficients::evaluate(const Point& p) const {
    const std::array<double, kVarCount> vars{p.t, p.x, p.xd, p.v, p.vd};
    std::array<double, kVarCount> s{}, c{};
    for (std::size_t j = 0; j < kVarCount; ++j) {
        s[j] = std::sin(vars[j]);
        c[j] = std::cos(vars[j]);
    }
    auto fill = [&](const Family& fam) {
        Partials out;
        out.value = fam.f[0].eval(vars, s, c);
        out.d_x = fam.f[1].eval(vars, s, c);
        out.d_xd = fam.f[2].eval(vars, s, c);
        out.d_xx = fam.f[3].eval(vars, s, c);
        out.d_xxd = fam.f[4].eval(vars, s, c);
        out.d_xdxd = fam.f[5].eval(vars, s, c);
        return out;
    };
    return {fill(b_), fill(sigma_), fill(cost_)};
}

TerminalRecord ExpressionCoefficients::terminal(double x) const {
    const std::array<double, kVarCount> vars{0.0, x, 0.0, 0.0, 0.0};
    return {h_[0].eval(vars), h_[1].eval(vars), h_[2].eval(vars)};
}

}  // namespace sdmp
