#include "pk/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "pk/errors.hpp"

namespace pk::expr {

namespace {
enum class Kind { Number, Symbol, Add, Sub, Mul, Div, Neg, Pow, Log, Exp, Sqrt };
}

struct Expr::Node {
    Kind kind;
    double num = 0.0;
    std::string name;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw ParseError("unexpected input at offset " + std::to_string(pos_) +
                             " in expression \"" + std::string(s_) + "\"");
        return e;
    }

  private:
    std::string_view s_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = make(Kind::Add, lhs, term());
            else if (eat('-'))
                lhs = make(Kind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = make(Kind::Mul, lhs, unary());
            else if (eat('/'))
                lhs = make(Kind::Div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::Neg, unary());
        if (eat('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of expression");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) throw ParseError("missing ')' in expression");
            return e;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at offset " +
                         std::to_string(pos_));
    }

    NodePtr number() {
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number at offset " + std::to_string(pos_));
        pos_ += static_cast<size_t>(end - begin);
        auto n = make(Kind::Number);
        const_cast<Expr::Node*>(n.get())->num = v;
        return n;
    }

    NodePtr ident() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        if (peek() == '(') {
            Kind k;
            if (name == "log")
                k = Kind::Log;
            else if (name == "exp")
                k = Kind::Exp;
            else if (name == "sqrt")
                k = Kind::Sqrt;
            else
                throw ParseError("unknown function \"" + name + "\"");
            eat('(');
            NodePtr arg = expr();
            if (!eat(')')) throw ParseError("missing ')' after " + name + " argument");
            return make(k, arg);
        }
        auto n = make(Kind::Symbol);
        const_cast<Expr::Node*>(n.get())->name = std::move(name);
        return n;
    }
};

// Exponents must be constant: evaluate numerically from params alone.
double eval_const(const Expr::Node& n, const std::map<std::string, double>& params) {
    switch (n.kind) {
        case Kind::Number: return n.num;
        case Kind::Symbol: {
            auto it = params.find(n.name);
            if (it == params.end())
                throw ConfigError("exponent refers to \"" + n.name +
                                  "\", which is not a constant parameter");
            return it->second;
        }
        case Kind::Add: return eval_const(*n.a, params) + eval_const(*n.b, params);
        case Kind::Sub: return eval_const(*n.a, params) - eval_const(*n.b, params);
        case Kind::Mul: return eval_const(*n.a, params) * eval_const(*n.b, params);
        case Kind::Div: return eval_const(*n.a, params) / eval_const(*n.b, params);
        case Kind::Neg: return -eval_const(*n.a, params);
        case Kind::Pow: return std::pow(eval_const(*n.a, params), eval_const(*n.b, params));
        case Kind::Log: return std::log(eval_const(*n.a, params));
        case Kind::Exp: return std::exp(eval_const(*n.a, params));
        case Kind::Sqrt: return std::sqrt(eval_const(*n.a, params));
    }
    throw ConfigError("corrupt expression node");
}

jets::Jet eval_node(const Expr::Node& n, const std::map<std::string, jets::Jet>& env,
                    const std::map<std::string, double>& params, int dim, int order) {
    switch (n.kind) {
        case Kind::Number: return jets::Jet::constant(dim, order, n.num);
        case Kind::Symbol: {
            auto it = env.find(n.name);
            if (it != env.end()) return it->second;
            auto pit = params.find(n.name);
            if (pit != params.end()) return jets::Jet::constant(dim, order, pit->second);
            throw ConfigError("unbound symbol \"" + n.name + "\" in expression");
        }
        case Kind::Add:
            return eval_node(*n.a, env, params, dim, order) +
                   eval_node(*n.b, env, params, dim, order);
        case Kind::Sub:
            return eval_node(*n.a, env, params, dim, order) -
                   eval_node(*n.b, env, params, dim, order);
        case Kind::Mul:
            return eval_node(*n.a, env, params, dim, order) *
                   eval_node(*n.b, env, params, dim, order);
        case Kind::Div:
            return eval_node(*n.a, env, params, dim, order) /
                   eval_node(*n.b, env, params, dim, order);
        case Kind::Neg: return -eval_node(*n.a, env, params, dim, order);
        case Kind::Pow:
            return jets::pow(eval_node(*n.a, env, params, dim, order),
                             eval_const(*n.b, params));
        case Kind::Log: return jets::log(eval_node(*n.a, env, params, dim, order));
        case Kind::Exp: return jets::exp(eval_node(*n.a, env, params, dim, order));
        case Kind::Sqrt: return jets::sqrt(eval_node(*n.a, env, params, dim, order));
    }
    throw ConfigError("corrupt expression node");
}

void collect_symbols(const Expr::Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Symbol) out.insert(n.name);
    if (n.a) collect_symbols(*n.a, out);
    if (n.b) collect_symbols(*n.b, out);
}

}  // namespace

Expr Expr::parse(std::string_view text) {
    Expr e;
    e.root_ = Parser(text).run();
    e.text_ = std::string(text);
    return e;
}

jets::Jet Expr::eval(const std::map<std::string, jets::Jet>& env,
                     const std::map<std::string, double>& params) const {
    if (!root_) throw ConfigError("eval() on an unparsed expression");
    if (env.empty()) throw ConfigError("expression evaluation needs at least one jet binding");
    const jets::Jet& probe = env.begin()->second;
    return eval_node(*root_, env, params, probe.dim(), probe.order());
}

std::set<std::string> Expr::symbols() const {
    std::set<std::string> out;
    if (root_) collect_symbols(*root_, out);
    return out;
}

}  // namespace pk::expr
