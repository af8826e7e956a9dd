#pragma once

#include <string>
#include <vector>

#include "multiauto/expr.hpp"

namespace multiauto {

// Generator constructions ------------------------------------------------

// Two-time-parameter kernel G(t,s;x) = e^{int_s^t phi} T(t-s) x with the
// scalar surrogate semigroup T(r) = M e^{-delta max(r,0)} acting
// componentwise on x in R^p. phi must be scalar with sup_bound set.
FunctionExpr make_green_kernel(const FunctionExpr& phi, double M, double delta, int state_dim = 1);

// Matrix of products f_i(t) g_j(s) on R^{n+m}, flattened row-major.
FunctionExpr make_tensor_product(const std::vector<FunctionExpr>& fs, const std::vector<FunctionExpr>& gs);

// Superposition W(t;x) = G(t; F(t;x)); Lipschitz metadata multiplies.
FunctionExpr make_nemytskii(const FunctionExpr& g_outer, const FunctionExpr& f_inner);

// Expression helpers -----------------------------------------------------

FunctionExpr scalar_fn(ExprPtr body, int arity_time = 1, int arity_state = 0);
// sum_i coeff_i * sin(freq_i * t0)
FunctionExpr sine_sum(const std::vector<double>& freqs, const std::vector<double>& coeffs);

// Built-in catalogue -----------------------------------------------------

struct CatalogueEntry {
    std::string name;
    std::string description;
    FunctionExpr fn;
};

// The named generator catalogue (levitan, sin_sqrt2, green_exp, tensor, ...).
const std::vector<CatalogueEntry>& catalogue();
const CatalogueEntry& catalogue_get(const std::string& name);

} // namespace multiauto
