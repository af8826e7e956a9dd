#include "multiauto/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "multiauto/errors.hpp"
#include "multiauto/quadrature.hpp"

namespace multiauto {

ExprPtr e_const(double v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const;
    e->value = v;
    return e;
}
ExprPtr e_time(int i) {
    auto e = std::make_shared<Expr>();
    e->op = Op::TimeVar;
    e->index = i;
    return e;
}
ExprPtr e_state(int i) {
    auto e = std::make_shared<Expr>();
    e->op = Op::StateVar;
    e->index = i;
    return e;
}
ExprPtr e_bound(int depth) {
    auto e = std::make_shared<Expr>();
    e->op = Op::BoundVar;
    e->index = depth;
    return e;
}
ExprPtr e_node(Op op, std::vector<ExprPtr> kids) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->kids = std::move(kids);
    return e;
}
ExprPtr e_add(ExprPtr a, ExprPtr b) { return e_node(Op::Add, {std::move(a), std::move(b)}); }
ExprPtr e_sub(ExprPtr a, ExprPtr b) { return e_node(Op::Sub, {std::move(a), std::move(b)}); }
ExprPtr e_neg(ExprPtr a) { return e_node(Op::Neg, {std::move(a)}); }
ExprPtr e_mul(ExprPtr a, ExprPtr b) { return e_node(Op::Mul, {std::move(a), std::move(b)}); }
ExprPtr e_div(ExprPtr a, ExprPtr b) { return e_node(Op::Div, {std::move(a), std::move(b)}); }
ExprPtr e_sin(ExprPtr a) { return e_node(Op::Sin, {std::move(a)}); }
ExprPtr e_cos(ExprPtr a) { return e_node(Op::Cos, {std::move(a)}); }
ExprPtr e_exp(ExprPtr a) { return e_node(Op::Exp, {std::move(a)}); }
ExprPtr e_abs(ExprPtr a) { return e_node(Op::Abs, {std::move(a)}); }
ExprPtr e_sqrt(ExprPtr a) { return e_node(Op::Sqrt, {std::move(a)}); }
ExprPtr e_atan(ExprPtr a) { return e_node(Op::Atan, {std::move(a)}); }
ExprPtr e_ln(ExprPtr a) { return e_node(Op::Ln, {std::move(a)}); }
ExprPtr e_floor(ExprPtr a) { return e_node(Op::Floor, {std::move(a)}); }
ExprPtr e_min(ExprPtr a, ExprPtr b) { return e_node(Op::Min, {std::move(a), std::move(b)}); }
ExprPtr e_max(ExprPtr a, ExprPtr b) { return e_node(Op::Max, {std::move(a), std::move(b)}); }

double eval_expr(const Expr& e, const EvalCtx& ctx) {
    switch (e.op) {
    case Op::Const:
        return e.value;
    case Op::TimeVar:
        if (e.index < 0 || e.index >= ctx.nt) throw DimensionMismatch("time variable t" + std::to_string(e.index));
        return ctx.t[e.index];
    case Op::StateVar:
        if (e.index < 0 || e.index >= ctx.nx) throw DimensionMismatch("state variable x" + std::to_string(e.index));
        return ctx.x[e.index];
    case Op::BoundVar:
        if (e.index < 0 || e.index >= ctx.depth) throw ParseError("bound variable outside integral scope");
        return ctx.bound[e.index];
    case Op::Add: {
        double s = 0;
        for (const auto& k : e.kids) s += eval_expr(*k, ctx);
        return s;
    }
    case Op::Sub:
        return eval_expr(*e.kids[0], ctx) - eval_expr(*e.kids[1], ctx);
    case Op::Neg:
        return -eval_expr(*e.kids[0], ctx);
    case Op::Mul: {
        double s = 1;
        for (const auto& k : e.kids) s *= eval_expr(*k, ctx);
        return s;
    }
    case Op::Div: {
        double num = eval_expr(*e.kids[0], ctx);
        double den = eval_expr(*e.kids[1], ctx);
        if (den == 0.0 || !std::isfinite(num / den)) throw SingularPoint("division by zero");
        return num / den;
    }
    case Op::Sin:
        return std::sin(eval_expr(*e.kids[0], ctx));
    case Op::Cos:
        return std::cos(eval_expr(*e.kids[0], ctx));
    case Op::Exp:
        return std::exp(eval_expr(*e.kids[0], ctx));
    case Op::Ln: {
        double a = eval_expr(*e.kids[0], ctx);
        if (a <= 0.0) throw SingularPoint("ln of non-positive argument");
        return std::log(a);
    }
    case Op::Abs:
        return std::fabs(eval_expr(*e.kids[0], ctx));
    case Op::Sqrt: {
        double a = eval_expr(*e.kids[0], ctx);
        if (a < 0.0) throw SingularPoint("sqrt of negative argument");
        return std::sqrt(a);
    }
    case Op::Atan:
        return std::atan(eval_expr(*e.kids[0], ctx));
    case Op::Min:
        return std::min(eval_expr(*e.kids[0], ctx), eval_expr(*e.kids[1], ctx));
    case Op::Max:
        return std::max(eval_expr(*e.kids[0], ctx), eval_expr(*e.kids[1], ctx));
    case Op::Floor:
        // left-continuous floor convention; discontinuity points are first-class
        return std::floor(eval_expr(*e.kids[0], ctx));
    case Op::Integral: {
        if (ctx.depth >= 4) throw ParseError("integral nesting too deep");
        double lo = eval_expr(*e.kids[1], ctx);
        double hi = eval_expr(*e.kids[2], ctx);
        EvalCtx inner = ctx;
        inner.depth = ctx.depth + 1;
        const Expr& body = *e.kids[0];
        return integrate_gl8(
            [&](double uu) {
                inner.bound[ctx.depth] = uu;
                return eval_expr(body, inner);
            },
            lo, hi, 2);
    }
    }
    throw Error("unreachable expression op");
}

namespace {

const char* op_name(Op op) {
    switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Neg: return "neg";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Abs: return "abs";
    case Op::Sqrt: return "sqrt";
    case Op::Atan: return "atan";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Floor: return "floor";
    case Op::Integral: return "int";
    default: return "?";
    }
}

void print_rec(const Expr& e, std::string& out) {
    switch (e.op) {
    case Op::Const: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", e.value);
        out += buf;
        return;
    }
    case Op::TimeVar:
        out += "t" + std::to_string(e.index);
        return;
    case Op::StateVar:
        out += "x" + std::to_string(e.index);
        return;
    case Op::BoundVar:
        out += e.index == 0 ? std::string("u") : "u" + std::to_string(e.index);
        return;
    default:
        out += "(";
        out += op_name(e.op);
        for (const auto& k : e.kids) {
            out += " ";
            print_rec(*k, out);
        }
        out += ")";
    }
}

struct Tokenizer {
    const std::string& s;
    std::size_t pos = 0;

    std::string next() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos >= s.size()) return {};
        if (s[pos] == '(' || s[pos] == ')') return std::string(1, s[pos++]);
        std::size_t start = pos;
        while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' && s[pos] != ')')
            ++pos;
        return s.substr(start, pos - start);
    }
};

Op op_from_name(const std::string& name) {
    static const std::pair<const char*, Op> table[] = {
        {"add", Op::Add},   {"sub", Op::Sub},   {"neg", Op::Neg}, {"mul", Op::Mul},
        {"div", Op::Div},   {"sin", Op::Sin},   {"cos", Op::Cos}, {"exp", Op::Exp},
        {"ln", Op::Ln},     {"abs", Op::Abs},   {"sqrt", Op::Sqrt}, {"atan", Op::Atan},
        {"min", Op::Min},   {"max", Op::Max},   {"floor", Op::Floor}, {"int", Op::Integral},
    };
    for (const auto& [n, op] : table)
        if (name == n) return op;
    throw ParseError("unknown operator '" + name + "'");
}

ExprPtr parse_rec(Tokenizer& tk, int bound_depth) {
    std::string tok = tk.next();
    if (tok.empty()) throw ParseError("unexpected end of expression");
    if (tok == ")") throw ParseError("unexpected ')'");
    if (tok != "(") {
        // atom
        if (tok == "pi") return e_const(3.14159265358979323846);
        if (tok == "u") return e_bound(0);
        if (tok.size() >= 2 && (tok[0] == 't' || tok[0] == 'x' || tok[0] == 'u') &&
            std::isdigit(static_cast<unsigned char>(tok[1]))) {
            int idx = std::stoi(tok.substr(1));
            if (tok[0] == 't') return e_time(idx);
            if (tok[0] == 'x') return e_state(idx);
            return e_bound(idx);
        }
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw ParseError("bad number '" + tok + "'");
            return e_const(v);
        } catch (const std::invalid_argument&) {
            throw ParseError("bad atom '" + tok + "'");
        }
    }
    std::string head = tk.next();
    Op op = op_from_name(head);
    std::vector<ExprPtr> kids;
    int child_depth = bound_depth + (op == Op::Integral ? 1 : 0);
    while (true) {
        std::size_t save = tk.pos;
        std::string peek = tk.next();
        if (peek.empty()) throw ParseError("missing ')'");
        if (peek == ")") break;
        tk.pos = save;
        // integral bounds are evaluated in the enclosing scope
        int d = child_depth;
        if (op == Op::Integral && kids.size() >= 1) d = bound_depth;
        kids.push_back(parse_rec(tk, d));
    }
    // arity checks
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (kids.size() < lo || kids.size() > hi)
            throw ParseError(std::string("wrong arity for '") + head + "'");
    };
    switch (op) {
    case Op::Add:
    case Op::Mul: need(1, 64); break;
    case Op::Sub:
    case Op::Div:
    case Op::Min:
    case Op::Max: need(2, 2); break;
    case Op::Integral: need(3, 3); break;
    default: need(1, 1); break;
    }
    return e_node(op, std::move(kids));
}

} // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    print_rec(e, out);
    return out;
}

ExprPtr parse_expr(const std::string& text) {
    Tokenizer tk{text};
    ExprPtr e = parse_rec(tk, 0);
    std::string rest = tk.next();
    if (!rest.empty()) throw ParseError("trailing tokens after expression");
    return e;
}

namespace {

ExprPtr map_tree(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& leaf) {
    if (ExprPtr r = leaf(*e)) return r;
    if (e->kids.empty()) return e;
    auto out = std::make_shared<Expr>(*e);
    for (auto& k : out->kids) k = map_tree(k, leaf);
    return out;
}

} // namespace

ExprPtr shift_time(const ExprPtr& e, int axis, double h) {
    return map_tree(e, [&](const Expr& n) -> ExprPtr {
        if (n.op == Op::TimeVar && n.index == axis) return e_add(e_time(axis), e_const(h));
        return nullptr;
    });
}

ExprPtr substitute_state(const ExprPtr& e, const std::vector<ExprPtr>& repl) {
    return map_tree(e, [&](const Expr& n) -> ExprPtr {
        if (n.op == Op::StateVar) {
            if (n.index < 0 || n.index >= static_cast<int>(repl.size()))
                throw DimensionMismatch("state substitution index");
            return repl[n.index];
        }
        return nullptr;
    });
}

ExprPtr substitute_time(const ExprPtr& e, const std::vector<ExprPtr>& repl) {
    return map_tree(e, [&](const Expr& n) -> ExprPtr {
        if (n.op == Op::TimeVar) {
            if (n.index < 0 || n.index >= static_cast<int>(repl.size()))
                throw DimensionMismatch("time substitution index");
            return repl[n.index];
        }
        return nullptr;
    });
}

FunctionExpr::FunctionExpr(int arity_time, int arity_state, std::vector<ExprPtr> components)
    : arity_time_(arity_time), arity_state_(arity_state), components_(std::move(components)) {
    if (arity_time_ < 1 || arity_state_ < 0 || components_.empty())
        throw DimensionMismatch("FunctionExpr arities");
}

void FunctionExpr::eval_into(const double* t, const double* x, double* out) const {
    EvalCtx ctx;
    ctx.t = t;
    ctx.nt = arity_time_;
    ctx.x = x;
    ctx.nx = arity_state_;
    double amax = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        double v = eval_expr(*components_[i], ctx);
        if (!std::isfinite(v)) throw SingularPoint("non-finite value at evaluation point");
        out[i] = v;
        amax = std::max(amax, std::fabs(v));
    }
    if (sup_bound && amax > *sup_bound * (1.0 + 1e-9) + 1e-12)
        throw SupBoundViolated("observed " + std::to_string(amax) + " > declared " + std::to_string(*sup_bound));
}

std::vector<double> FunctionExpr::eval(std::span<const double> t, std::span<const double> x) const {
    if (static_cast<int>(t.size()) != arity_time_ || static_cast<int>(x.size()) != arity_state_)
        throw DimensionMismatch("eval: expected t^" + std::to_string(arity_time_) + ", x^" +
                                std::to_string(arity_state_));
    std::vector<double> out(components_.size());
    eval_into(t.data(), x.data(), out.data());
    return out;
}

double FunctionExpr::eval_scalar(std::span<const double> t, std::span<const double> x) const {
    auto v = eval(t, x);
    if (v.size() != 1) throw DimensionMismatch("eval_scalar on vector-valued function");
    return v[0];
}

double FunctionExpr::eval1(double t0) const {
    return eval_scalar(std::span<const double>(&t0, 1));
}

std::string FunctionExpr::print() const {
    std::string out;
    for (const auto& c : components_) {
        out += print_expr(*c);
        out += "\n";
    }
    return out;
}

FunctionExpr FunctionExpr::parse(int arity_time, int arity_state, const std::string& text) {
    std::vector<ExprPtr> comps;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        if (blank) continue;
        comps.push_back(parse_expr(line));
    }
    if (comps.empty()) throw ParseError("no expressions in input");
    return FunctionExpr(arity_time, arity_state, std::move(comps));
}

} // namespace multiauto
