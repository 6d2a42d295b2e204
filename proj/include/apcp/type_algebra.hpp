#pragma once

// Pure algebra on session types: duality, priority, lift, recursive-type
// unfolding, syntactic equality modulo alpha. Equi-recursive matching is not
// done here; the semantics module unfolds explicitly where needed.

#include "apcp/ast.hpp"

namespace apcp {

/// Structural dual. Priorities are preserved; bullet and recursion variables
/// are self-dual; mu dualizes its body. Metavariables are not handled here
/// (the inference engine keeps dual links for those).
TypePtr dual(const TypePtr& a);

/// Priority of the outermost connective; mu recurses into its body; bullet
/// and recursion variables have priority omega.
PriorityTerm priority(const TypePtr& a);

/// Add t to every connective priority (omega absorbs; bullet and variables
/// unchanged).
TypePtr lift(std::uint64_t t, const TypePtr& a);

/// Unfold mu X. A once, substituting lift(t, mu X. A) for X in A.
/// Throws std::invalid_argument if m is not a mu type.
TypePtr unfold_type(const TypePtr& m, std::uint64_t t);

/// Substitute replacement for the recursion variable var_id in a.
TypePtr subst_tvar(const TypePtr& a, std::uint64_t var_id, const TypePtr& replacement);

/// Syntactic equality modulo alpha-renaming of mu binders; priorities
/// compared symbolically.
bool type_equal(const TypePtr& a, const TypePtr& b);

/// Like type_equal but ignoring all priority annotations (shape comparison).
bool type_shape_equal(const TypePtr& a, const TypePtr& b);

/// Contractive check: no mu chain whose stripped body is a chain variable.
bool type_contractive(const TypePtr& a);

/// True if the type contains a metavariable or an open selection row.
bool type_has_unresolved(const TypePtr& a);

}  // namespace apcp
