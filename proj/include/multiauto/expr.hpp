#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace multiauto {

// Scalar expression tree. Vector-valued functions are lists of these.
//
// Serialized form is prefix notation, one expression per line, e.g.
//   (sin (div 1 (add 2 (cos t0) (cos (mul 1.4142135623730951 t0)))))
// Variables: t0,t1,... time coordinates; x0,x1,... state coordinates;
// u (and u1, u2 for nested scopes) the bound variable of a definite
// integral (int body lo hi).
enum class Op {
    Const,
    TimeVar,
    StateVar,
    BoundVar, // index = integral nesting depth
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Atan,
    Min,
    Max,
    Floor,
    Integral, // kids: body, lo, hi; integrates body over the bound var
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    Op op = Op::Const;
    double value = 0.0; // Const payload
    int index = 0;      // variable index
    std::vector<ExprPtr> kids;
};

ExprPtr e_const(double v);
ExprPtr e_time(int i);
ExprPtr e_state(int i);
ExprPtr e_bound(int depth = 0);
ExprPtr e_node(Op op, std::vector<ExprPtr> kids);

ExprPtr e_add(ExprPtr a, ExprPtr b);
ExprPtr e_sub(ExprPtr a, ExprPtr b);
ExprPtr e_neg(ExprPtr a);
ExprPtr e_mul(ExprPtr a, ExprPtr b);
ExprPtr e_div(ExprPtr a, ExprPtr b);
ExprPtr e_sin(ExprPtr a);
ExprPtr e_cos(ExprPtr a);
ExprPtr e_exp(ExprPtr a);
ExprPtr e_abs(ExprPtr a);
ExprPtr e_sqrt(ExprPtr a);
ExprPtr e_atan(ExprPtr a);
ExprPtr e_ln(ExprPtr a);
ExprPtr e_floor(ExprPtr a);
ExprPtr e_min(ExprPtr a, ExprPtr b);
ExprPtr e_max(ExprPtr a, ExprPtr b);

// Evaluation context: t/x coordinate blocks plus the bound-variable stack
// of enclosing definite integrals.
struct EvalCtx {
    const double* t = nullptr;
    int nt = 0;
    const double* x = nullptr;
    int nx = 0;
    double bound[4] = {0, 0, 0, 0};
    int depth = 0;
};

// Evaluates a scalar expression. Throws SingularPoint on excluded domain
// points (ln/div/sqrt) or non-finite results.
double eval_expr(const Expr& e, const EvalCtx& ctx);

std::string print_expr(const Expr& e);
ExprPtr parse_expr(const std::string& text);

// Structural substitutions (return new trees, inputs untouched).
ExprPtr shift_time(const ExprPtr& e, int axis, double h);
ExprPtr substitute_state(const ExprPtr& e, const std::vector<ExprPtr>& repl);
ExprPtr substitute_time(const ExprPtr& e, const std::vector<ExprPtr>& repl);

// Evaluable closed-form map F : R^n x R^p -> R^q with analyst-supplied
// metadata. Immutable after construction; evaluation is re-entrant.
class FunctionExpr {
public:
    FunctionExpr() = default;
    FunctionExpr(int arity_time, int arity_state, std::vector<ExprPtr> components);

    int arity_time() const { return arity_time_; }
    int arity_state() const { return arity_state_; }
    int out_dim() const { return static_cast<int>(components_.size()); }
    const std::vector<ExprPtr>& components() const { return components_; }

    std::optional<double> lipschitz_in_state;
    std::optional<double> sup_bound;

    // Checks dimensions, evaluates all components, and enforces sup_bound
    // opportunistically (violation is a hard error).
    std::vector<double> eval(std::span<const double> t, std::span<const double> x = {}) const;
    void eval_into(const double* t, const double* x, double* out) const;

    double eval_scalar(std::span<const double> t, std::span<const double> x = {}) const;
    double eval1(double t0) const; // scalar function of one time variable

    std::string print() const; // one component per line
    static FunctionExpr parse(int arity_time, int arity_state, const std::string& text);

private:
    int arity_time_ = 1;
    int arity_state_ = 0;
    std::vector<ExprPtr> components_;
};

} // namespace multiauto
