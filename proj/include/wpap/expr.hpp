#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wpap/common.hpp"

namespace wpap {

/// A parsed scalar expression over named variables. Variables resolve to
/// argument slots at parse time, so evaluation is a plain closure call.
/// Grammar: + - * / ^ (right-assoc), unary minus, parentheses, `pi`, and the
/// functions sin cos tan atan exp log sqrt abs sinh cosh tanh erf min max pow.
class Expr {
public:
    using Fn = std::function<double(const std::vector<double>&)>;

    static Expr parse(const std::string& src, const std::vector<std::string>& variables) {
        Parser p{src, variables, 0};
        Expr e;
        e.fn_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != src.size()) p.fail("trailing input");
        e.source_ = src;
        e.arity_ = variables.size();
        return e;
    }

    double operator()(const std::vector<double>& args) const {
        if (args.size() != arity_) throw PreconditionError("Expr: argument count mismatch");
        return fn_(args);
    }
    double eval1(double a) const { return fn_({a}); }
    double eval2(double a, double b) const { return fn_({a, b}); }

    const std::string& source() const { return source_; }
    size_t arity() const { return arity_; }
    bool valid() const { return static_cast<bool>(fn_); }

private:
    struct Parser {
        const std::string& src;
        const std::vector<std::string>& vars;
        size_t pos;

        [[noreturn]] void fail(const std::string& what) const {
            throw ConfigError({"expression '" + src + "': " + what + " at position " +
                               std::to_string(pos)});
        }
        void skip_ws() {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        bool eat(char c) {
            skip_ws();
            if (pos < src.size() && src[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        Fn parse_expr() {
            Fn lhs = parse_term();
            for (;;) {
                if (eat('+')) {
                    Fn rhs = parse_term();
                    lhs = [lhs, rhs](const std::vector<double>& a) { return lhs(a) + rhs(a); };
                } else if (eat('-')) {
                    Fn rhs = parse_term();
                    lhs = [lhs, rhs](const std::vector<double>& a) { return lhs(a) - rhs(a); };
                } else {
                    return lhs;
                }
            }
        }

        Fn parse_term() {
            Fn lhs = parse_unary();
            for (;;) {
                if (eat('*')) {
                    Fn rhs = parse_unary();
                    lhs = [lhs, rhs](const std::vector<double>& a) { return lhs(a) * rhs(a); };
                } else if (eat('/')) {
                    Fn rhs = parse_unary();
                    lhs = [lhs, rhs](const std::vector<double>& a) { return lhs(a) / rhs(a); };
                } else {
                    return lhs;
                }
            }
        }

        // unary minus binds looser than '^': -t^2 reads as -(t^2)
        Fn parse_unary() {
            if (eat('-')) {
                Fn inner = parse_unary();
                return [inner](const std::vector<double>& a) { return -inner(a); };
            }
            if (eat('+')) return parse_unary();
            return parse_power();
        }

        Fn parse_power() {
            Fn base = parse_primary();
            if (eat('^')) {
                Fn exp = parse_unary();  // right associative, allows t^-2
                return [base, exp](const std::vector<double>& a) {
                    return std::pow(base(a), exp(a));
                };
            }
            return base;
        }

        Fn parse_primary() {
            skip_ws();
            if (pos >= src.size()) fail("unexpected end of input");
            const char c = src[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
            if (eat('(')) {
                Fn inner = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return inner;
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        Fn parse_number() {
            size_t end = pos;
            errno = 0;
            const double v = std::strtod(src.c_str() + pos, nullptr);
            while (end < src.size() &&
                   (std::isdigit(static_cast<unsigned char>(src[end])) || src[end] == '.' ||
                    src[end] == 'e' || src[end] == 'E' ||
                    ((src[end] == '+' || src[end] == '-') && end > pos &&
                     (src[end - 1] == 'e' || src[end - 1] == 'E'))))
                ++end;
            pos = end;
            return [v](const std::vector<double>&) { return v; };
        }

        Fn parse_ident() {
            size_t end = pos;
            while (end < src.size() && (std::isalnum(static_cast<unsigned char>(src[end])) ||
                                        src[end] == '_'))
                ++end;
            const std::string name = src.substr(pos, end - pos);
            pos = end;

            if (name == "pi") {
                return [](const std::vector<double>&) { return M_PI; };
            }
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == name) {
                    return [i](const std::vector<double>& a) { return a[i]; };
                }

            skip_ws();
            if (!eat('(')) fail("unknown identifier '" + name + "'");
            std::vector<Fn> args;
            if (!eat(')')) {
                args.push_back(parse_expr());
                while (eat(',')) args.push_back(parse_expr());
                if (!eat(')')) fail("expected ')' after arguments of " + name);
            }
            return make_call(name, std::move(args));
        }

        Fn make_call(const std::string& name, std::vector<Fn> args) {
            const auto unary = [&](double (*f)(double)) {
                if (args.size() != 1) fail(name + " expects 1 argument");
                Fn a0 = args[0];
                return Fn([f, a0](const std::vector<double>& a) { return f(a0(a)); });
            };
            const auto binary = [&](double (*f)(double, double)) {
                if (args.size() != 2) fail(name + " expects 2 arguments");
                Fn a0 = args[0], a1 = args[1];
                return Fn([f, a0, a1](const std::vector<double>& a) { return f(a0(a), a1(a)); });
            };
            if (name == "sin") return unary(std::sin);
            if (name == "cos") return unary(std::cos);
            if (name == "tan") return unary(std::tan);
            if (name == "atan") return unary(std::atan);
            if (name == "exp") return unary(std::exp);
            if (name == "log") return unary(std::log);
            if (name == "sqrt") return unary(std::sqrt);
            if (name == "abs") return unary(std::fabs);
            if (name == "sinh") return unary(std::sinh);
            if (name == "cosh") return unary(std::cosh);
            if (name == "tanh") return unary(std::tanh);
            if (name == "erf") return unary(std::erf);
            if (name == "min") return binary([](double a, double b) { return std::min(a, b); });
            if (name == "max") return binary([](double a, double b) { return std::max(a, b); });
            if (name == "pow") return binary([](double a, double b) { return std::pow(a, b); });
            fail("unknown function '" + name + "'");
        }
    };

    Fn fn_;
    std::string source_;
    size_t arity_ = 0;
};

}  // namespace wpap
