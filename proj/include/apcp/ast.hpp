#pragma once

// Core ASTs of the calculus: names, priorities, session types, processes,
// typing contexts. All nodes are immutable after construction and shared
// through shared_ptr<const ...>; they are safe to use across threads.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace apcp {

// ---------------------------------------------------------------------------
// Names

/// A channel endpoint. Identity is the numeric id; the identifier string is
/// kept for printing only (the printer disambiguates on collision).
struct Name {
    std::string ident;
    std::uint64_t id = 0;

    bool operator==(const Name& o) const { return id == o.id; }
    bool operator!=(const Name& o) const { return id != o.id; }
    bool operator<(const Name& o) const { return id < o.id; }
};

/// Globally unique id supply for names, recursion binders, priority
/// variables and type metavariables. Atomic so parsing and inference stay
/// reentrant.
std::uint64_t fresh_id();

Name fresh_name(const std::string& ident);

// ---------------------------------------------------------------------------
// Priorities

/// A priority expression: a natural, omega, an inference variable, or a
/// variable plus a natural offset. omega absorbs addition.
struct PriorityTerm {
    bool omega = false;
    std::optional<std::uint64_t> var;  // priority variable id
    std::uint64_t offset = 0;          // literal value, or shift on var

    static PriorityTerm lit(std::uint64_t n) { return {false, std::nullopt, n}; }
    static PriorityTerm make_omega() { return {true, std::nullopt, 0}; }
    static PriorityTerm pvar(std::uint64_t v) { return {false, v, 0}; }
    static PriorityTerm shift_of(std::uint64_t v, std::uint64_t k) { return {false, v, k}; }

    bool is_omega() const { return omega; }
    bool is_lit() const { return !omega && !var.has_value(); }
    bool is_var() const { return !omega && var.has_value(); }

    /// t + k, with omega + k = omega.
    PriorityTerm shifted(std::uint64_t k) const {
        if (omega) return *this;
        PriorityTerm r = *this;
        r.offset += k;
        return r;
    }

    bool operator==(const PriorityTerm& o) const {
        return omega == o.omega && var == o.var && (omega || offset == o.offset);
    }
    bool operator!=(const PriorityTerm& o) const { return !(*this == o); }
};

/// Fresh priority inference variable.
PriorityTerm fresh_pvar();

/// Register/recall a named priority variable (used by parsed annotations so
/// the same name denotes the same variable within one source unit).
class PriorityNames {
  public:
    PriorityTerm named(const std::string& name);
    std::optional<std::string> name_of(std::uint64_t var) const;
    const std::map<std::string, std::uint64_t>& table() const { return by_name_; }

  private:
    std::map<std::string, std::uint64_t> by_name_;
    std::map<std::uint64_t, std::string> by_var_;
};

// ---------------------------------------------------------------------------
// Session types

struct SessionType;
using TypePtr = std::shared_ptr<const SessionType>;

struct TTensor {  // A *o B : output payload A, continue as B
    PriorityTerm pr;
    TypePtr payload, cont;
};
struct TPar {  // A %o B : input payload A, continue as B
    PriorityTerm pr;
    TypePtr payload, cont;
};
struct TPlus {  // +{l: A}o : internal choice
    PriorityTerm pr;
    std::map<std::string, TypePtr> branches;
    bool row_open = false;  // inference only; resolved in reported types
};
struct TWith {  // &{l: A}o : external choice
    PriorityTerm pr;
    std::map<std::string, TypePtr> branches;
};
struct TBullet {};  // closed endpoint
struct TMu {        // mu X. A   (binder id identifies X)
    std::string var;
    std::uint64_t var_id = 0;
    TypePtr body;
};
struct TVarRef {
    std::string var;
    std::uint64_t var_id = 0;
};
// Extension connectives (explicit closing, replicated servers).
struct TOne { PriorityTerm pr; };
struct TBot { PriorityTerm pr; };
struct TQuery { PriorityTerm pr; TypePtr payload; };
struct TBang { PriorityTerm pr; TypePtr payload; };
/// Inference-only type metavariable.
struct TMeta { std::uint64_t id = 0; };

struct SessionType {
    std::variant<TTensor, TPar, TPlus, TWith, TBullet, TMu, TVarRef,
                 TOne, TBot, TQuery, TBang, TMeta>
        node;
};

TypePtr t_tensor(PriorityTerm o, TypePtr a, TypePtr b);
TypePtr t_par(PriorityTerm o, TypePtr a, TypePtr b);
TypePtr t_plus(PriorityTerm o, std::map<std::string, TypePtr> bs, bool row_open = false);
TypePtr t_with(PriorityTerm o, std::map<std::string, TypePtr> bs);
TypePtr t_bullet();
TypePtr t_mu(const std::string& var, std::uint64_t var_id, TypePtr body);
TypePtr t_tvar(const std::string& var, std::uint64_t var_id);
TypePtr t_one(PriorityTerm o);
TypePtr t_bot(PriorityTerm o);
TypePtr t_query(PriorityTerm o, TypePtr a);
TypePtr t_bang(PriorityTerm o, TypePtr a);
TypePtr t_meta();

// ---------------------------------------------------------------------------
// Processes

struct Process;
using ProcPtr = std::shared_ptr<const Process>;

struct POutput {  // x[y,z]
    Name subj, payload, cont;
};
struct PInput {  // x(y,z); P   binds payload, cont in body
    Name subj, payload, cont;
    ProcPtr body;
};
struct PSelect {  // x[z] < l
    Name subj, cont;
    std::string label;
};
struct PBranch {  // x(z) > { l: P }   binds cont in each body
    Name subj, cont;
    std::map<std::string, ProcPtr> branches;
};
struct PRestrict {  // new (a,b) P   binds a, b
    Name a, b;
    ProcPtr body;
};
struct PPar {
    ProcPtr left, right;
};
struct PInact {};
struct PFwd {  // fwd a b
    Name a, b;
};
struct PRecDef {  // mu X(xs); P  — binds X in body; xs are free occurrences
    std::string var;
    std::uint64_t var_id = 0;
    std::vector<Name> params;
    ProcPtr body;
};
struct PRecCall {  // call X(xs)
    std::string var;
    std::uint64_t var_id = 0;
    std::vector<Name> args;
};
// Extension constructs; rejected by parser/typing unless the flag is on.
struct PEmptyOut { Name subj; };                     // x[]
struct PEmptyIn { Name subj; ProcPtr body; };        // x(); P
struct PClientReq { Name subj, payload; };           // ?x[y]
struct PServer { Name subj, payload; ProcPtr body; };// !x(y); P  binds payload

struct Process {
    std::variant<POutput, PInput, PSelect, PBranch, PRestrict, PPar, PInact,
                 PFwd, PRecDef, PRecCall, PEmptyOut, PEmptyIn, PClientReq,
                 PServer>
        node;
};

ProcPtr p_output(Name x, Name y, Name z);
ProcPtr p_input(Name x, Name y, Name z, ProcPtr body);
ProcPtr p_select(Name x, Name z, const std::string& label);
ProcPtr p_branch(Name x, Name z, std::map<std::string, ProcPtr> branches);
ProcPtr p_restrict(Name a, Name b, ProcPtr body);
ProcPtr p_par(ProcPtr l, ProcPtr r);
ProcPtr p_inact();
ProcPtr p_fwd(Name a, Name b);
ProcPtr p_recdef(const std::string& var, std::uint64_t var_id,
                 std::vector<Name> params, ProcPtr body);
ProcPtr p_reccall(const std::string& var, std::uint64_t var_id,
                  std::vector<Name> args);
ProcPtr p_empty_out(Name x);
ProcPtr p_empty_in(Name x, ProcPtr body);
ProcPtr p_client_req(Name x, Name y);
ProcPtr p_server(Name x, Name y, ProcPtr body);

// ---------------------------------------------------------------------------
// Contexts

/// Linear typing context Gamma: ordered endpoint -> type assignments.
struct TypingContext {
    std::vector<std::pair<Name, TypePtr>> entries;

    const TypePtr* lookup(const Name& n) const {
        for (auto& e : entries)
            if (e.first == n) return &e.second;
        return nullptr;
    }
    void bind(const Name& n, TypePtr t) {
        if (lookup(n)) throw std::runtime_error("duplicate endpoint in context: " + n.ident);
        entries.emplace_back(n, std::move(t));
    }
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

/// Recursion context Omega: recursion variable id -> arity. Permits
/// re-binding (weakening/contraction).
using RecursionContext = std::map<std::uint64_t, std::size_t>;

// ---------------------------------------------------------------------------
// Core operations on processes

/// Free names of p. Output/selection arguments are free; binders are removed;
/// recursion parameter lists are free occurrences.
std::set<Name> free_names(const ProcPtr& p);

/// Free recursion variables (by binder id).
std::set<std::uint64_t> free_rec_vars(const ProcPtr& p);

/// Simultaneous capture-avoiding substitution of free occurrences.
/// Binder ids are globally unique, so replacement is direct; use
/// refresh_binders when duplicating subterms.
ProcPtr substitute(const ProcPtr& p, const std::map<std::uint64_t, Name>& sub);

/// Fresh ids for every binder in p (alpha-renaming a copy).
ProcPtr refresh_binders(const ProcPtr& p);

/// Alpha-equivalence: bound names matched positionally, free names by id.
bool alpha_equal(const ProcPtr& a, const ProcPtr& b);

/// Structural contractiveness (no mu-chain whose body is a call of a chain
/// variable). Returns an offending variable name, or nullopt if fine.
std::optional<std::string> find_uncontractive(const ProcPtr& p);

/// True if p contains any action construct (output/input/select/branch/
/// forwarder or an extension action) at any depth.
bool has_actions(const ProcPtr& p);

}  // namespace apcp
