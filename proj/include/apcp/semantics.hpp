#pragma once

// Operational semantics: structural-congruence normalization, redex
// discovery, single/multi-step reduction, recursion unfolding, active-name
// and liveness analysis, and exhaustive state-space exploration.

#include "apcp/ast.hpp"

#include <random>

namespace apcp {

struct SemOptions {
    bool extensions = false;  // enables the 1/bot and ?/! rules and the
                              // unused-server cleanup congruence
};

/// Canonical form: parallel flattened and sorted by a structural key,
/// restrictions floated outward maximally, units and unused restrictions
/// dropped, fwd/restriction argument order canonicalized. Recursion is not
/// unfolded here.
ProcPtr normalize(const ProcPtr& p, const SemOptions& opts = {});

/// Alpha-insensitive serialization of a normalized process; used as a state
/// identity for exploration and stale-redex detection.
std::string state_key(const ProcPtr& normalized);

/// One unfolding of a recursive definition: every call of the bound variable
/// is replaced by a fresh copy of the definition with parameters substituted.
/// Throws std::invalid_argument on arity mismatch or a non-RecDef argument.
ProcPtr unfold_rec(const ProcPtr& recdef);

/// normalize + bounded lazy unfolding of top-level recursive definitions so
/// guarded actions become visible (at most one unfolding per definition per
/// pass, a few passes).
ProcPtr expose(const ProcPtr& p, const SemOptions& opts = {});

/// Exposed form together with its state key; lets callers reuse the work of
/// expose across redex discovery and stepping.
struct Exposed {
    ProcPtr proc;
    std::string key;
};
Exposed expose_keyed(const ProcPtr& p, const SemOptions& opts = {});

enum class RuleTag {
    BetaId, BetaTensorPar, BetaPlusWith, BetaOneBot, BetaQueryBang,
    KappaPar, KappaWith, KappaBot, KappaBang
};

const char* rule_tag_name(RuleTag t);
bool is_beta(RuleTag t);

struct Redex {
    RuleTag rule;
    Name x, y;            // endpoints involved (subject pair; for BetaId: fwd ends)
    std::size_t comp_a = 0, comp_b = 0;  // component indices in the exposed form
    std::string label;    // selected label for BetaPlusWith
    std::string key;      // state key of the exposed process this was found on
};

/// All enabled beta-redexes of p (on its exposed form); kappa-redexes only
/// when include_kappa and the prefix subject is free in p.
std::vector<Redex> find_redexes(const ProcPtr& p, bool include_kappa,
                                const SemOptions& opts = {});
std::vector<Redex> find_redexes(const Exposed& e, bool include_kappa,
                                const SemOptions& opts = {});

struct StaleRedex : std::runtime_error {
    StaleRedex() : std::runtime_error("stale redex: process changed since discovery") {}
};

/// Apply a redex discovered on p. The result is re-normalized.
ProcPtr step(const ProcPtr& p, const Redex& r, const SemOptions& opts = {});
ProcPtr step(const Exposed& e, const Redex& r, const SemOptions& opts = {});

enum class Outcome { ReachedInaction, Stuck, FuelExhausted };
const char* outcome_name(Outcome o);

struct RunPolicy {
    bool deterministic = true;
    std::uint64_t seed = 0;
};

struct TraceStep {
    Redex redex;
    ProcPtr result;  // normalized
};

struct Trace {
    ProcPtr initial;  // normalized
    std::vector<TraceStep> steps;
    Outcome outcome = Outcome::FuelExhausted;
};

/// Iterate step() under the policy until no redex or fuel runs out.
Trace run(const ProcPtr& p, const RunPolicy& policy, std::size_t fuel,
          bool include_kappa = false, const SemOptions& opts = {});

/// Line-delimited structured records for a trace; field names are the
/// documented contract (see README).
std::vector<std::string> trace_records(const Trace& t);

/// Names offering an unguarded action.
std::set<Name> active_names(const ProcPtr& p);

/// True iff some congruent rearrangement exposes a restriction on two
/// active names (checked on the normalized form).
bool is_live(const ProcPtr& p);

/// Number of parallel components of the normalized form.
std::size_t component_count(const ProcPtr& p, const SemOptions& opts = {});

struct ExploreResult {
    std::size_t states = 0;       // distinct states visited
    std::size_t transitions = 0;
    bool complete = false;        // state space exhausted within the cap
    std::vector<ProcPtr> stuck;   // stuck non-inaction states found
};

/// Breadth-first exhaustive exploration with state dedup, capped by
/// max_states.
ExploreResult explore(const ProcPtr& p, std::size_t max_states,
                      bool include_kappa = false, const SemOptions& opts = {});

}  // namespace apcp
