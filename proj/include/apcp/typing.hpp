#pragma once

// Constraint-generating type checker/inferencer and the priority-constraint
// solver over naturals with omega. Structural problems surface as TypeError;
// priority problems are values (UnsatCore), so diagnoses carry complete
// cores instead of first-failure errors.

#include "apcp/ast.hpp"

#include <variant>

namespace apcp {

struct Provenance {
    std::string rule;      // typing rule that emitted the constraint
    std::string path;      // structural path to the AST node
    std::string endpoint;  // endpoint the constraint concerns
};

struct Constraint {
    enum class Kind { StrictLess, Equal };
    Kind kind;
    PriorityTerm lhs, rhs;
    Provenance prov;
};

using ConstraintSet = std::vector<Constraint>;

struct TypeError : std::runtime_error {
    std::string path;
    TypeError(const std::string& msg, std::string path_ = "")
        : std::runtime_error(msg), path(std::move(path_)) {}
};

struct Judgment {
    ProcPtr process;
    RecursionContext omega;
    TypingContext gamma;  // resolved as far as inference allows
    ConstraintSet constraints;
    std::vector<Provenance> proof_log;
    PriorityNames priority_names;  // names for declared priority variables
};

struct TypingOptions {
    bool extensions = false;
};

/// Syntax-directed constraint-generating inference. Never fails on priority
/// grounds; throws TypeError on structural grounds (linearity, arity,
/// guardedness, unification failure).
Judgment infer(const ProcPtr& p, const RecursionContext& omega = {},
               const TypingOptions& opts = {});

/// infer, then unify the result against declared types (concrete or named
/// priorities become equality constraints). declared must cover all free
/// endpoints of p.
Judgment check(const ProcPtr& p, const TypingContext& declared,
               const TypingOptions& opts = {}, const PriorityNames* names = nullptr);

// ---------------------------------------------------------------------------
// Solver

struct PriorityValue {
    bool omega = false;
    std::uint64_t value = 0;

    static PriorityValue of(std::uint64_t v) { return {false, v}; }
    static PriorityValue make_omega() { return {true, 0}; }
    bool operator==(const PriorityValue& o) const {
        return omega == o.omega && (omega || value == o.value);
    }
};

using Assignment = std::map<std::uint64_t, PriorityValue>;

struct UnsatCore {
    std::vector<Constraint> constraints;
    std::string reason;
};

struct SolveResult {
    bool sat = false;
    Assignment assignment;
    UnsatCore core;
};

/// Equalities merge classes; strict inequalities form a difference graph;
/// satisfiable iff no positive-weight cycle. On success the assignment is a
/// longest-path layering (finite naturals; omega only for classes equated
/// with omega). On failure the core is a minimal cycle or omega-chain.
SolveResult solve(const ConstraintSet& cs);

/// Substitute a partial assignment, then solve what remains.
SolveResult solve_with(const ConstraintSet& cs, const Assignment& partial);

/// Constraints violated under a (total, defaulting to 0) assignment.
std::vector<Constraint> violations(const ConstraintSet& cs, const Assignment& a);

PriorityValue eval_priority(const PriorityTerm& t, const Assignment& a);

// ---------------------------------------------------------------------------
// Certification

struct Certificate {
    TypingContext gamma;  // empty for closed processes
    Assignment assignment;
    ConstraintSet constraints;
    std::vector<Provenance> proof_log;
};

struct Diagnosis {
    std::string kind;  // "typing-error" or "unsat"
    std::string message;
    UnsatCore core;  // populated when kind == "unsat"
};

using CertifyResult = std::variant<Certificate, Diagnosis>;

/// Succeeds iff inference yields an empty context and the constraint set is
/// satisfiable. Diagnosis is a value, not an error.
CertifyResult certify_deadlock_free(const ProcPtr& p, const TypingOptions& opts = {});

bool is_certified(const CertifyResult& r);

/// Law 1: every input/branch prefix priority is strictly below the priority
/// of every other endpoint type in its continuation context (re-evaluated
/// from the emitted constraints under the certificate's assignment).
bool audit_law1(const Certificate& c);
/// Law 2: every duality-induced equality holds under the assignment.
bool audit_law2(const Certificate& c);
/// Adding t to every finite value still satisfies all constraints.
bool lift_admissible(const Certificate& c, std::uint64_t t);

/// Substitute solved priorities into a type.
TypePtr concretize(const TypePtr& t, const Assignment& a);

/// Do the contexts agree endpoint-wise up to one uniform finite lift?
/// (Priorities must be concrete.) Returns the lift when they do.
std::optional<std::uint64_t> gamma_lift_distance(const TypingContext& before,
                                                 const TypingContext& after);

}  // namespace apcp
