#include "pinnsolve/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pinnsolve/errors.hpp"

namespace pinnsolve::expr {

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 8> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"tanh", Func::Tanh},
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
}};

constexpr std::array<std::pair<std::string_view, double>, 2> kConstants{{
    {"pi", std::numbers::pi},
    {"e", std::numbers::e},
}};

// Letters that can name an axis anywhere in the library.
constexpr std::string_view kAxisLetters = "txy";

std::optional<Func> find_function(std::string_view name) {
    for (const auto& [n, f] : kFunctions)
        if (n == name) return f;
    return std::nullopt;
}

std::optional<double> find_constant(std::string_view name) {
    for (const auto& [n, v] : kConstants)
        if (n == name) return v;
    return std::nullopt;
}

std::string_view func_name(Func f) {
    for (const auto& [n, g] : kFunctions)
        if (g == f) return n;
    return "?";
}

bool is_lower_alpha(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

void VarConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCategory::Config, "variables: " + m); };
    if (independent.empty()) fail("no independent variables declared");
    std::set<std::string> seen;
    auto check = [&](const std::string& name, const char* role) {
        if (!is_lower_alpha(name)) fail(std::string(role) + " name '" + name + "' must be lowercase alphabetic");
        if (find_function(name) || find_constant(name))
            fail(std::string(role) + " name '" + name + "' is reserved");
        if (!seen.insert(name).second) fail("duplicate name '" + name + "'");
    };
    for (const auto& n : independent) {
        check(n, "independent");
        if (n.size() != 1) fail("independent name '" + n + "' must be a single letter");
    }
    for (const auto& n : dependent) check(n, "dependent");
    for (const auto& n : symbols) check(n, "symbol");
    if (!order_caps.empty() && order_caps.size() != dependent.size())
        fail("order caps must match the dependent variables");
}

int VarConfig::cap(std::size_t variable) const {
    return order_caps.empty() ? default_cap : order_caps.at(variable);
}

namespace {
int index_in(const std::vector<std::string>& names, std::string_view name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}
}  // namespace

int VarConfig::independent_index(std::string_view name) const { return index_in(independent, name); }
int VarConfig::dependent_index(std::string_view name) const { return index_in(dependent, name); }
int VarConfig::symbol_index(std::string_view name) const { return index_in(symbols, name); }

std::string normalize_source(std::string_view source) {
    static constexpr std::array<std::string_view, 4> prefixes{"tf.", "np.", "math.", "torch."};
    std::string out;
    out.reserve(source.size());
    std::size_t i = 0;
    while (i < source.size()) {
        bool stripped = false;
        const bool at_word_start = i == 0 || !(std::isalnum(static_cast<unsigned char>(source[i - 1])) ||
                                               source[i - 1] == '_' || source[i - 1] == '.');
        if (at_word_start) {
            for (auto p : prefixes) {
                if (source.substr(i, p.size()) == p) {
                    i += p.size();
                    stripped = true;
                    break;
                }
            }
        }
        if (!stripped) out.push_back(source[i++]);
    }
    return out;
}

namespace {

struct Token {
    enum class Kind { Number, Name, Op, LParen, RParen, End } kind;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() &&
                                                              std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                    i = j;
                    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                }
            }
            Token t{Token::Kind::Number, std::string(s.substr(start, i - start))};
            t.pos = start;
            const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (res.ec != std::errc()) throw ParseError("malformed number '" + t.text + "'", start);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                throw ParseError("unknown identifier '" + std::string(s.substr(start, i + 1 - start)) + "'", start);
            out.push_back({Token::Kind::Name, std::string(s.substr(start, i - start)), 0.0, start});
            continue;
        }
        if (c == '*' && i + 1 < s.size() && s[i + 1] == '*') {
            out.push_back({Token::Kind::Op, "^", 0.0, start});
            i += 2;
            continue;
        }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            out.push_back({Token::Kind::Op, std::string(1, c), 0.0, start});
            ++i;
            continue;
        }
        if (c == '(') {
            out.push_back({Token::Kind::LParen, "(", 0.0, start});
            ++i;
            continue;
        }
        if (c == ')') {
            out.push_back({Token::Kind::RParen, ")", 0.0, start});
            ++i;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Token::Kind::End, "", 0.0, s.size()});
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, const VarConfig& config) : toks_(std::move(tokens)), cfg_(config) {}

    NodePtr parse_all() {
        if (peek().kind == Token::Kind::End) throw ParseError("empty expression", 0);
        NodePtr n = expr();
        if (peek().kind != Token::Kind::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return n;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& next() { return toks_[i_++]; }
    bool at_op(char c) const { return peek().kind == Token::Kind::Op && peek().text[0] == c; }

    static NodePtr binary(char op, NodePtr a, NodePtr b, std::size_t pos) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        n->position = pos;
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (at_op('+') || at_op('-')) {
            const Token& t = next();
            lhs = binary(t.text[0], lhs, term(), t.pos);
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (at_op('*') || at_op('/')) {
            const Token& t = next();
            lhs = binary(t.text[0], lhs, unary(), t.pos);
        }
        return lhs;
    }

    NodePtr unary() {
        if (at_op('-')) {
            const Token& t = next();
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Negate;
            n->lhs = unary();
            n->position = t.pos;
            return n;
        }
        if (at_op('+')) throw ParseError("unexpected '+'", peek().pos);
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (at_op('^')) {
            const Token& t = next();
            return binary('^', base, unary(), t.pos);
        }
        return base;
    }

    NodePtr primary() {
        const Token& t = next();
        switch (t.kind) {
        case Token::Kind::Number: {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Number;
            n->number = t.number;
            n->position = t.pos;
            return n;
        }
        case Token::Kind::LParen: {
            NodePtr inner = expr();
            if (peek().kind != Token::Kind::RParen) throw ParseError("expected ')'", peek().pos);
            next();
            return inner;
        }
        case Token::Kind::Name: return name(t);
        case Token::Kind::End: throw ParseError("unexpected end of expression", t.pos);
        default: throw ParseError("unexpected '" + t.text + "'", t.pos);
        }
    }

    NodePtr name(const Token& t) {
        auto n = std::make_shared<Node>();
        n->position = t.pos;
        n->name = t.text;
        if (peek().kind == Token::Kind::LParen) {
            const auto f = find_function(t.text);
            if (!f) throw ParseError("unknown function '" + t.text + "'", t.pos);
            next();
            n->kind = Node::Kind::Call;
            n->func = *f;
            n->lhs = expr();
            if (peek().kind != Token::Kind::RParen) throw ParseError("expected ')'", peek().pos);
            next();
            return n;
        }
        if (find_function(t.text)) throw ParseError("function '" + t.text + "' requires an argument", t.pos);
        if (int k = cfg_.independent_index(t.text); k >= 0) {
            n->kind = Node::Kind::Coordinate;
            n->index = k;
            return n;
        }
        if (int k = cfg_.symbol_index(t.text); k >= 0) {
            n->kind = Node::Kind::Symbol;
            n->index = k;
            return n;
        }
        if (auto ref = resolve_derivative(t)) {
            n->kind = Node::Kind::Derivative;
            n->deriv = *ref;
            return n;
        }
        if (const auto c = find_constant(t.text)) {
            n->kind = Node::Kind::Constant;
            n->number = *c;
            return n;
        }
        throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    }

    std::optional<DerivRef> resolve_derivative(const Token& t) const {
        int best = -1;
        std::size_t best_len = 0;
        for (std::size_t v = 0; v < cfg_.dependent.size(); ++v) {
            const std::string& dep = cfg_.dependent[v];
            if (t.text.size() >= dep.size() && t.text.compare(0, dep.size(), dep) == 0 && dep.size() > best_len) {
                const std::string_view rest = std::string_view(t.text).substr(dep.size());
                const bool axis_letters = std::all_of(rest.begin(), rest.end(), [](char c) {
                    return kAxisLetters.find(c) != std::string_view::npos;
                });
                if (axis_letters) {
                    best = static_cast<int>(v);
                    best_len = dep.size();
                }
            }
        }
        if (best < 0) return std::nullopt;
        DerivRef ref;
        ref.variable = best;
        for (std::size_t i = best_len; i < t.text.size(); ++i) {
            const int axis = cfg_.independent_index(std::string_view(&t.text[i], 1));
            if (axis < 0)
                throw Error(ErrorCategory::Parse, "derivative '" + t.text + "' uses undeclared independent variable '" +
                                                      t.text[i] + "' at position " + std::to_string(t.pos + i));
            ref.key.push_back(axis);
        }
        ref.key = canonical(std::move(ref.key));
        const int cap = cfg_.cap(static_cast<std::size_t>(best));
        if (static_cast<int>(ref.key.size()) > cap)
            throw Error(ErrorCategory::Parse, "derivative '" + t.text + "' exceeds order cap " + std::to_string(cap) +
                                                  " at position " + std::to_string(t.pos));
        return ref;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const VarConfig& cfg_;
};

void collect(const Node& n, std::set<DerivRef>& out) {
    if (n.kind == Node::Kind::Derivative) out.insert(n.deriv);
    if (n.lhs) collect(*n.lhs, out);
    if (n.rhs) collect(*n.rhs, out);
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void render(const Node& n, const VarConfig& cfg, std::string& out) {
    using K = Node::Kind;
    switch (n.kind) {
    case K::Number: out += format_number(n.number); return;
    case K::Constant:
    case K::Coordinate:
    case K::Symbol: out += n.name; return;
    case K::Derivative:
        out += cfg.dependent.at(static_cast<std::size_t>(n.deriv.variable));
        out += suffix(n.deriv, cfg);
        return;
    case K::Call:
        out += func_name(n.func);
        out += '(';
        render(*n.lhs, cfg, out);
        out += ')';
        return;
    case K::Negate:
        out += "(-";
        render(*n.lhs, cfg, out);
        out += ')';
        return;
    case K::Binary:
        out += '(';
        render(*n.lhs, cfg, out);
        out += ' ';
        out += n.op;
        out += ' ';
        render(*n.rhs, cfg, out);
        out += ')';
        return;
    }
}

}  // namespace

ResidualAst parse(std::string_view source, const VarConfig& config) {
    config.validate();
    Parser p(lex(source), config);
    return ResidualAst(p.parse_all(), config, std::string(source));
}

std::set<DerivRef> derivative_requirements(const ResidualAst& ast) {
    std::set<DerivRef> out;
    collect(ast.root(), out);
    return out;
}

int max_order(const ResidualAst& ast) {
    int m = 0;
    for (const auto& r : derivative_requirements(ast)) m = std::max(m, static_cast<int>(r.key.size()));
    return m;
}

int max_axis_order(const ResidualAst& ast, int variable, int axis) {
    int m = 0;
    for (const auto& r : derivative_requirements(ast))
        if (r.variable == variable)
            m = std::max(m, static_cast<int>(std::count(r.key.begin(), r.key.end(), axis)));
    return m;
}

std::string suffix(const DerivRef& ref, const VarConfig& config) {
    std::string s;
    for (int axis : ref.key) s += config.independent.at(static_cast<std::size_t>(axis));
    return s;
}

std::string to_string(const ResidualAst& ast) {
    std::string out;
    render(ast.root(), ast.config(), out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    using K = Node::Kind;
    switch (a.kind) {
    case K::Number:
    case K::Constant:
        if (a.number != b.number) return false;
        break;
    case K::Coordinate:
    case K::Symbol:
        if (a.index != b.index) return false;
        break;
    case K::Derivative:
        if (a.deriv != b.deriv) return false;
        break;
    case K::Call:
        if (a.func != b.func) return false;
        break;
    case K::Binary:
        if (a.op != b.op) return false;
        break;
    case K::Negate: break;
    }
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
    return true;
}

namespace {

struct ConstantBackend {
    bool ok = true;
    double number(double v) { return v; }
    double coordinate(int) { ok = false; return 0.0; }
    double derivative(const DerivRef&) { ok = false; return 0.0; }
    double symbol(int) { ok = false; return 0.0; }
    double call(Func f, double a);
    double negate(double a) { return -a; }
    double add(double a, double b) { return a + b; }
    double sub(double a, double b) { return a - b; }
    double mul(double a, double b) { return a * b; }
    double div(double a, double b) { return a / b; }
    double pow_int(double a, int e) { return std::pow(a, e); }
    double exp(double a) { return std::exp(a); }
    double log(double a) { return std::log(a); }
};

double apply(Func f, double a) {
    switch (f) {
    case Func::Sin: return std::sin(a);
    case Func::Cos: return std::cos(a);
    case Func::Tan: return std::tan(a);
    case Func::Tanh: return std::tanh(a);
    case Func::Exp: return std::exp(a);
    case Func::Log: return std::log(a);
    case Func::Sqrt: return std::sqrt(a);
    case Func::Abs: return std::fabs(a);
    }
    return 0.0;
}

double ConstantBackend::call(Func f, double a) { return apply(f, a); }

struct PointBackend {
    const ResidualAst& ast;
    const PointValues& pv;

    double number(double v) { return v; }
    double coordinate(int k) {
        const auto& name = ast.config().independent.at(static_cast<std::size_t>(k));
        const auto it = pv.coords.find(name);
        if (it == pv.coords.end()) throw Error(ErrorCategory::Argument, "missing coordinate '" + name + "'");
        return it->second;
    }
    double derivative(const DerivRef& r) {
        const auto it = pv.derivs.find(r);
        if (it == pv.derivs.end())
            throw Error(ErrorCategory::Argument,
                        "missing derivative '" + ast.config().dependent.at(static_cast<std::size_t>(r.variable)) +
                            suffix(r, ast.config()) + "'");
        return it->second;
    }
    double symbol(int k) {
        const auto& name = ast.config().symbols.at(static_cast<std::size_t>(k));
        const auto it = pv.symbols.find(name);
        if (it == pv.symbols.end()) throw Error(ErrorCategory::Argument, "missing symbol '" + name + "'");
        return it->second;
    }
    double call(Func f, double a) {
        if (f == Func::Log && !(a > 0.0)) throw DomainError("log of non-positive value", 0);
        if (f == Func::Sqrt && a < 0.0) throw DomainError("sqrt of negative value", 0);
        if (f == Func::Tan && std::cos(a) == 0.0) throw DomainError("tan pole", 0);
        return apply(f, a);
    }
    double negate(double a) { return -a; }
    double add(double a, double b) { return a + b; }
    double sub(double a, double b) { return a - b; }
    double mul(double a, double b) { return a * b; }
    double div(double a, double b) {
        if (b == 0.0) throw DomainError("division by zero", 0);
        return a / b;
    }
    double pow_int(double a, int e) {
        if (a == 0.0 && e < 0) throw DomainError("negative power of zero", 0);
        return std::pow(a, e);
    }
    double exp(double a) { return std::exp(a); }
    double log(double a) { return call(Func::Log, a); }
};

}  // namespace

std::optional<double> constant_value(const Node& node) {
    ConstantBackend be;
    const double v = fold(node, be);
    if (!be.ok) return std::nullopt;
    return v;
}

double eval_residual(const ResidualAst& ast, const PointValues& values) {
    PointBackend be{ast, values};
    return fold(ast.root(), be);
}

}  // namespace pinnsolve::expr
