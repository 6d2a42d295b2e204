#include "apcp/typing.hpp"

#include "apcp/syntax.hpp"
#include "apcp/type_algebra.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace apcp {

namespace {

// ---------------------------------------------------------------------------
// Inference engine state

struct PendingChoice {
    bool plus;  // true: endpoint must offer +{label: payload}; false: &{...}
    PriorityTerm pr;
    std::string label;
    TypePtr payload;
    Provenance prov;
};

struct MetaInfo {
    TypePtr self;
    TypePtr bound;  // null while unbound
    std::uint64_t dual = 0;
    std::optional<PriorityTerm> pr_var;
    std::vector<PendingChoice> pendings;
};

// Context entry: a linear type, or (extension) a bag of client requests that
// contraction keeps separate until the cut against a server.
struct Entry {
    bool requests = false;
    TypePtr single;
    std::vector<std::pair<PriorityTerm, TypePtr>> reqs;  // (outer priority, payload)
};

using Ctx = std::vector<std::pair<Name, Entry>>;

Entry* ctx_find(Ctx& c, const Name& n) {
    for (auto& e : c)
        if (e.first == n) return &e.second;
    return nullptr;
}

struct ServerScheme {
    TypePtr payload;
    PriorityTerm pr;
    std::size_t cs_begin = 0, cs_end = 0;  // constraint range of the server body
};

struct Engine {
    TypingOptions opts;
    ConstraintSet cs;
    std::vector<Provenance> log;
    std::map<std::uint64_t, MetaInfo> metas;
    std::map<std::uint64_t, std::uint64_t> rec_uf;  // recursion binder classes
    std::map<const SessionType*, ServerScheme> schemes;
    // coinductive guard for equi-recursive unification; scoped to one
    // top-level unify call and keyed on live nodes
    std::map<std::pair<const void*, const void*>, std::pair<TypePtr, TypePtr>> uni_guard;
    int uni_depth = 0;

    // ---- constraints ----
    void emit_eq(const PriorityTerm& a, const PriorityTerm& b, const Provenance& prov) {
        if (a == b) return;
        cs.push_back({Constraint::Kind::Equal, a, b, prov});
    }
    void emit_lt(const PriorityTerm& a, const PriorityTerm& b, const Provenance& prov) {
        cs.push_back({Constraint::Kind::StrictLess, a, b, prov});
    }

    // ---- recursion variable classes ----
    std::uint64_t rec_find(std::uint64_t v) {
        auto it = rec_uf.find(v);
        if (it == rec_uf.end()) return v;
        std::uint64_t r = rec_find(it->second);
        rec_uf[v] = r;
        return r;
    }
    void rec_unite(std::uint64_t a, std::uint64_t b) {
        a = rec_find(a);
        b = rec_find(b);
        if (a != b) rec_uf[a] = b;
    }

    // ---- metas ----
    TypePtr fresh() {
        TypePtr m = t_meta();
        auto id = std::get<TMeta>(m->node).id;
        metas[id] = MetaInfo{m, nullptr, 0, std::nullopt, {}};
        return m;
    }

    MetaInfo& info(std::uint64_t id) { return metas.at(id); }

    TypePtr resolve(TypePtr t) {
        while (auto* m = std::get_if<TMeta>(&t->node)) {
            auto it = metas.find(m->id);
            if (it == metas.end() || !it->second.bound) return t;
            t = it->second.bound;
        }
        return t;
    }

    bool contains_meta(const TypePtr& t0, std::uint64_t id) {
        TypePtr t = resolve(t0);
        return std::visit(
            [&](const auto& n) -> bool {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TMeta>) return n.id == id;
                else if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>)
                    return contains_meta(n.payload, id) || contains_meta(n.cont, id);
                else if constexpr (std::is_same_v<T, TPlus> || std::is_same_v<T, TWith>) {
                    for (auto& [l, b] : n.branches)
                        if (contains_meta(b, id)) return true;
                    return false;
                } else if constexpr (std::is_same_v<T, TMu>) return contains_meta(n.body, id);
                else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>)
                    return contains_meta(n.payload, id);
                else return false;
            },
            t->node);
    }

    /// dual that tolerates metavariables (partner metas, created on demand).
    TypePtr edual(const TypePtr& t0) {
        TypePtr t = resolve(t0);
        if (auto* m = std::get_if<TMeta>(&t->node)) {
            MetaInfo& mi = info(m->id);
            if (!mi.dual) {
                TypePtr d = fresh();
                auto did = std::get<TMeta>(d->node).id;
                mi.dual = did;
                info(did).dual = m->id;
                // mirror pendings onto the new partner
                for (auto& p : mi.pendings)
                    info(did).pendings.push_back(
                        {!p.plus, p.pr, p.label, edual(p.payload), p.prov});
            }
            return info(mi.dual).self;
        }
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor>) return t_par(n.pr, edual(n.payload), edual(n.cont));
                else if constexpr (std::is_same_v<T, TPar>) return t_tensor(n.pr, edual(n.payload), edual(n.cont));
                else if constexpr (std::is_same_v<T, TPlus>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, edual(b));
                    return t_with(n.pr, std::move(bs));
                } else if constexpr (std::is_same_v<T, TWith>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, edual(b));
                    return t_plus(n.pr, std::move(bs));
                } else if constexpr (std::is_same_v<T, TBullet> || std::is_same_v<T, TVarRef>) return t;
                else if constexpr (std::is_same_v<T, TMu>) return t_mu(n.var, n.var_id, edual(n.body));
                else if constexpr (std::is_same_v<T, TOne>) return t_bot(n.pr);
                else if constexpr (std::is_same_v<T, TBot>) return t_one(n.pr);
                else if constexpr (std::is_same_v<T, TQuery>) return t_bang(n.pr, edual(n.payload));
                else if constexpr (std::is_same_v<T, TBang>) return t_query(n.pr, edual(n.payload));
                else throw TypeError("unreachable dual case");
            },
            t->node);
    }

    PriorityTerm pr_of(const TypePtr& t0) {
        TypePtr t = resolve(t0);
        if (auto* m = std::get_if<TMeta>(&t->node)) {
            MetaInfo& mi = info(m->id);
            if (!mi.pr_var) mi.pr_var = fresh_pvar();
            return *mi.pr_var;
        }
        if (auto* mu = std::get_if<TMu>(&t->node)) return pr_of(mu->body);
        return priority(t);
    }

    void add_pending(const TypePtr& t, PendingChoice p, const std::string& path) {
        TypePtr r = resolve(t);
        if (auto* m = std::get_if<TMeta>(&r->node)) {
            MetaInfo& mi = info(m->id);
            mi.pendings.push_back(p);
            if (mi.dual)
                info(mi.dual).pendings.push_back({!p.plus, p.pr, p.label, edual(p.payload), p.prov});
            return;
        }
        apply_pending(r, p, path);
    }

    void apply_pending(const TypePtr& t, const PendingChoice& p, const std::string& path) {
        if (auto* mu = std::get_if<TMu>(&t->node)) {
            // equi-recursion: a choice demanded of a recursive type lands on
            // its unfolding
            TypePtr body = resolve(mu->body);
            if (std::holds_alternative<TMeta>(body->node)) {
                add_pending(body, p, path);
                return;
            }
            TypePtr unfolded = esubst_tvar(body, rec_find(mu->var_id), t);
            if (std::holds_alternative<TMeta>(unfolded->node)) add_pending(unfolded, p, path);
            else apply_pending(unfolded, p, path);
            return;
        }
        if (auto* pl = std::get_if<TPlus>(&t->node)) {
            if (!p.plus)
                throw TypeError("endpoint offers a selection but is used for branching", path);
            auto it = pl->branches.find(p.label);
            if (it == pl->branches.end())
                throw TypeError("label " + p.label + " not offered by " + print_type(t), path);
            emit_eq(p.pr, pl->pr, p.prov);
            unify(p.payload, it->second, p.prov, path);
            return;
        }
        if (auto* w = std::get_if<TWith>(&t->node)) {
            if (p.plus)
                throw TypeError("endpoint is a branch but is used for selection", path);
            auto it = w->branches.find(p.label);
            if (it == w->branches.end())
                throw TypeError("label " + p.label + " not offered by " + print_type(t), path);
            emit_eq(p.pr, w->pr, p.prov);
            unify(p.payload, it->second, p.prov, path);
            return;
        }
        throw TypeError("selection used against non-choice type " + print_type(resolve(t)), path);
    }

    void bind(std::uint64_t id, TypePtr t, const Provenance& prov, const std::string& path) {
        TypePtr target = resolve(t);
        if (auto* m = std::get_if<TMeta>(&target->node); m && m->id == id) return;
        if (contains_meta(target, id))
            throw TypeError("cyclic type during unification", path);
        MetaInfo& mi = info(id);
        mi.bound = target;
        // bridge the on-demand priority variable
        if (mi.pr_var) emit_eq(*mi.pr_var, pr_of(target), {"pr", path, prov.endpoint});
        // discharge pendings
        std::vector<PendingChoice> ps = std::move(mi.pendings);
        mi.pendings.clear();
        for (auto& p : ps) {
            TypePtr r = resolve(target);
            if (std::holds_alternative<TMeta>(r->node))
                add_pending(r, p, path);
            else
                apply_pending(r, p, path);
        }
        // keep the dual partner consistent
        if (mi.dual) {
            MetaInfo& di = info(mi.dual);
            if (di.bound)
                unify(di.bound, edual(target), prov, path);
            else if (!std::holds_alternative<TMeta>(resolve(target)->node) ||
                     std::get<TMeta>(resolve(target)->node).id != mi.dual)
                bind(mi.dual, edual(target), prov, path);
        }
    }

    /// Resolving substitution of a recursion variable; stops at unresolved
    /// metavariables (their later bindings still mention the variable, which
    /// the equi-recursive cases resolve through the class body).
    TypePtr esubst_tvar(const TypePtr& t0, std::uint64_t cls, const TypePtr& repl) {
        TypePtr t = resolve(t0);
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor>)
                    return t_tensor(n.pr, esubst_tvar(n.payload, cls, repl),
                                    esubst_tvar(n.cont, cls, repl));
                else if constexpr (std::is_same_v<T, TPar>)
                    return t_par(n.pr, esubst_tvar(n.payload, cls, repl),
                                 esubst_tvar(n.cont, cls, repl));
                else if constexpr (std::is_same_v<T, TPlus>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, esubst_tvar(b, cls, repl));
                    return t_plus(n.pr, std::move(bs), n.row_open);
                } else if constexpr (std::is_same_v<T, TWith>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, esubst_tvar(b, cls, repl));
                    return t_with(n.pr, std::move(bs));
                } else if constexpr (std::is_same_v<T, TMu>) {
                    if (rec_find(n.var_id) == cls) return t;  // shadowed
                    return t_mu(n.var, n.var_id, esubst_tvar(n.body, cls, repl));
                } else if constexpr (std::is_same_v<T, TVarRef>) {
                    return rec_find(n.var_id) == cls ? repl : t;
                } else if constexpr (std::is_same_v<T, TQuery>)
                    return t_query(n.pr, esubst_tvar(n.payload, cls, repl));
                else if constexpr (std::is_same_v<T, TBang>)
                    return t_bang(n.pr, esubst_tvar(n.payload, cls, repl));
                else
                    return t;
            },
            t->node);
    }

    /// Re-roll a concrete type as a recursion body: every recursive subterm
    /// becomes the bound variable, and the rolled-away subterms are collected
    /// so the caller can reconcile them with the recursion.
    TypePtr roll(const TypePtr& t0, std::uint64_t cls, const std::string& var_name,
                 std::vector<TypePtr>& rolled) {
        TypePtr t = resolve(t0);
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TMu>) {
                    rolled.push_back(t);
                    return t_tvar(var_name, cls);
                } else if constexpr (std::is_same_v<T, TTensor>)
                    return t_tensor(n.pr, roll(n.payload, cls, var_name, rolled),
                                    roll(n.cont, cls, var_name, rolled));
                else if constexpr (std::is_same_v<T, TPar>)
                    return t_par(n.pr, roll(n.payload, cls, var_name, rolled),
                                 roll(n.cont, cls, var_name, rolled));
                else if constexpr (std::is_same_v<T, TPlus>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, roll(b, cls, var_name, rolled));
                    return t_plus(n.pr, std::move(bs), n.row_open);
                } else if constexpr (std::is_same_v<T, TWith>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, roll(b, cls, var_name, rolled));
                    return t_with(n.pr, std::move(bs));
                } else if constexpr (std::is_same_v<T, TQuery>)
                    return t_query(n.pr, roll(n.payload, cls, var_name, rolled));
                else if constexpr (std::is_same_v<T, TBang>)
                    return t_bang(n.pr, roll(n.payload, cls, var_name, rolled));
                else
                    return t;
            },
            t->node);
    }

    void unify(TypePtr a0, TypePtr b0, const Provenance& prov, const std::string& path) {
        TypePtr a = resolve(a0), b = resolve(b0);
        if (a.get() == b.get()) return;
        auto* ma = std::get_if<TMeta>(&a->node);
        auto* mb = std::get_if<TMeta>(&b->node);
        if (ma && mb && ma->id == mb->id) return;
        if (ma) return bind(ma->id, b, prov, path);
        if (mb) return bind(mb->id, a, prov, path);

        // coinductive guard: recursive types re-visit the same pairs
        if (uni_depth == 0) uni_guard.clear();
        auto guard_key = std::pair<const void*, const void*>(a.get(), b.get());
        if (!uni_guard.emplace(guard_key, std::pair<TypePtr, TypePtr>(a, b)).second) return;
        if (++uni_depth > 500) throw TypeError("unification does not converge", path);
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } dg{uni_depth};

        auto* mua = std::get_if<TMu>(&a->node);
        auto* mub = std::get_if<TMu>(&b->node);
        if (mua && mub) {
            rec_unite(mua->var_id, mub->var_id);
            unify(mua->body, mub->body, prov, path);
            return;
        }
        // equi-recursion: one side folded, the other exposed by a reduction
        if (mua || mub) {
            const TMu* mu = mua ? mua : mub;
            TypePtr mu_node = mua ? a : b;
            TypePtr other = mua ? b : a;
            std::uint64_t cls = rec_find(mu->var_id);
            if (auto* v = std::get_if<TVarRef>(&other->node)) {
                rec_unite(cls, v->var_id);
                return;
            }
            TypePtr body = resolve(mu->body);
            if (auto* bm = std::get_if<TMeta>(&body->node)) {
                // roll the exposed side into a body for the unknown recursion,
                // then reconcile the rolled-away recursive occurrences
                std::vector<TypePtr> rolled;
                TypePtr rb = roll(other, cls, mu->var, rolled);
                bind(bm->id, rb, prov, path);
                for (auto& s : rolled) unify(s, mu_node, prov, path);
                return;
            }
            unify(esubst_tvar(body, cls, mu_node), other, prov, path);
            return;
        }
        if (auto* va = std::get_if<TVarRef>(&a->node)) {
            if (auto* vb = std::get_if<TVarRef>(&b->node)) {
                rec_unite(va->var_id, vb->var_id);
                return;
            }
            throw TypeError("recursion variable " + va->var + " met " + print_type(b), path);
        }
        if (std::holds_alternative<TVarRef>(b->node)) return unify(b, a, prov, path);

        if (a->node.index() != b->node.index())
            throw TypeError("type mismatch: " + print_type(a) + " vs " + print_type(b), path);
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                const T& y = std::get<T>(b->node);
                if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>) {
                    emit_eq(x.pr, y.pr, prov);
                    unify(x.payload, y.payload, prov, path);
                    unify(x.cont, y.cont, prov, path);
                } else if constexpr (std::is_same_v<T, TPlus> || std::is_same_v<T, TWith>) {
                    if (x.branches.size() != y.branches.size())
                        throw TypeError("label sets differ: " + print_type(a) + " vs " + print_type(b),
                                        path);
                    emit_eq(x.pr, y.pr, prov);
                    for (auto& [l, tb] : x.branches) {
                        auto it = y.branches.find(l);
                        if (it == y.branches.end())
                            throw TypeError("label sets differ on " + l, path);
                        unify(tb, it->second, prov, path);
                    }
                } else if constexpr (std::is_same_v<T, TBullet>) {
                } else if constexpr (std::is_same_v<T, TOne> || std::is_same_v<T, TBot>) {
                    emit_eq(x.pr, y.pr, prov);
                } else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>) {
                    emit_eq(x.pr, y.pr, prov);
                    unify(x.payload, y.payload, prov, path);
                }
            },
            a->node);
    }

    // ---- deep resolution for reporting ----
    TypePtr resolve_deep(const TypePtr& t0) {
        TypePtr t = resolve(t0);
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TMeta>) {
                    // unresolved: render pendings as an open selection row
                    auto it = metas.find(n.id);
                    if (it != metas.end() && !it->second.pendings.empty()) {
                        std::map<std::string, TypePtr> rows;
                        bool plus = it->second.pendings.front().plus;
                        PriorityTerm o = it->second.pendings.front().pr;
                        for (auto& p : it->second.pendings)
                            rows.emplace(p.label, resolve_deep(p.payload));
                        return plus ? t_plus(o, std::move(rows), true) : t_with(o, std::move(rows));
                    }
                    return t;
                } else if constexpr (std::is_same_v<T, TTensor>)
                    return t_tensor(n.pr, resolve_deep(n.payload), resolve_deep(n.cont));
                else if constexpr (std::is_same_v<T, TPar>)
                    return t_par(n.pr, resolve_deep(n.payload), resolve_deep(n.cont));
                else if constexpr (std::is_same_v<T, TPlus>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, resolve_deep(b));
                    return t_plus(n.pr, std::move(bs), n.row_open);
                } else if constexpr (std::is_same_v<T, TWith>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, resolve_deep(b));
                    return t_with(n.pr, std::move(bs));
                } else if constexpr (std::is_same_v<T, TMu>)
                    return t_mu(n.var, rec_find(n.var_id), resolve_deep(n.body));
                else if constexpr (std::is_same_v<T, TVarRef>)
                    return t_tvar(n.var, rec_find(n.var_id));
                else if constexpr (std::is_same_v<T, TQuery>)
                    return t_query(n.pr, resolve_deep(n.payload));
                else if constexpr (std::is_same_v<T, TBang>)
                    return t_bang(n.pr, resolve_deep(n.payload));
                else
                    return t;
            },
            t->node);
    }

    // ---- inference proper ----

    void log_rule(const char* rule, const std::string& path, const std::string& ep = "") {
        log.push_back({rule, path, ep});
    }

    void ctx_bind(Ctx& c, const Name& n, Entry e, const std::string& path) {
        if (ctx_find(c, n))
            throw TypeError("linearity violation: endpoint " + n.ident + " used twice", path);
        c.emplace_back(n, std::move(e));
    }

    Ctx mix(Ctx left, Ctx right, const std::string& path) {
        for (auto& [n, e] : right) {
            Entry* have = ctx_find(left, n);
            if (!have) {
                left.emplace_back(n, std::move(e));
                continue;
            }
            if (have->requests && e.requests) {
                for (auto& r : e.reqs) have->reqs.push_back(r);  // contraction
                continue;
            }
            throw TypeError("linearity violation: endpoint " + n.ident +
                                " used in parallel components",
                            path);
        }
        return left;
    }

    // Priority guard o < pr(C) for every residual entry.
    void guard_residual(const Ctx& c, const PriorityTerm& o, const char* rule,
                        const std::string& path) {
        for (auto& [n, e] : c) {
            if (e.requests) {
                for (auto& [ro, pay] : e.reqs) emit_lt(o, ro, {rule, path, n.ident});
            } else {
                emit_lt(o, pr_of(e.single), {rule, path, n.ident});
            }
        }
    }

    Entry take_or_bullet(Ctx& c, const Name& n, const std::string& path) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i].first == n) {
                Entry e = std::move(c[i].second);
                c.erase(c.begin() + i);
                return e;
            }
        }
        // rule "bullet": unused endpoints are silently closed
        log_rule("bullet", path, n.ident);
        Entry e;
        e.single = t_bullet();
        return e;
    }

    TypePtr single_of(Entry e, const Name& n, const std::string& path) {
        if (!e.requests) return e.single;
        // fold multiple requests into one query type (literal contraction)
        if (e.reqs.empty()) throw TypeError("empty request set for " + n.ident, path);
        TypePtr pay = e.reqs[0].second;
        for (std::size_t i = 1; i < e.reqs.size(); ++i) {
            unify(pay, e.reqs[i].second, {"contract", path, n.ident}, path);
            emit_eq(e.reqs[0].first, e.reqs[i].first, {"contract", path, n.ident});
        }
        return t_query(e.reqs[0].first, pay);
    }

    Ctx infer_node(const ProcPtr& p, RecursionContext& omega, const std::string& path) {
        return std::visit(
            [&](const auto& n) -> Ctx {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, PInact>) {
                    log_rule("empty", path);
                    return {};
                } else if constexpr (std::is_same_v<T, PFwd>) {
                    log_rule("id", path, n.a.ident + "," + n.b.ident);
                    TypePtr a = fresh();
                    Ctx c;
                    ctx_bind(c, n.a, Entry{false, edual(a), {}}, path);
                    ctx_bind(c, n.b, Entry{false, a, {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, POutput>) {
                    log_rule("tensor", path, n.subj.ident);
                    TypePtr a = fresh(), b = fresh();
                    Ctx c;
                    ctx_bind(c, n.subj, Entry{false, t_tensor(fresh_pvar(), a, b), {}}, path);
                    ctx_bind(c, n.payload, Entry{false, edual(a), {}}, path);
                    ctx_bind(c, n.cont, Entry{false, edual(b), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PInput>) {
                    Ctx c = infer_node(n.body, omega, path + "/in(" + n.subj.ident + ")");
                    TypePtr a = single_of(take_or_bullet(c, n.payload, path), n.payload, path);
                    TypePtr b = single_of(take_or_bullet(c, n.cont, path), n.cont, path);
                    if (ctx_find(c, n.subj))
                        throw TypeError("linearity violation: " + n.subj.ident +
                                            " used under its own input prefix",
                                        path);
                    PriorityTerm o = fresh_pvar();
                    guard_residual(c, o, "par", path + "/in(" + n.subj.ident + ")");
                    log_rule("par", path, n.subj.ident);
                    ctx_bind(c, n.subj, Entry{false, t_par(o, a, b), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PSelect>) {
                    log_rule("plus", path, n.subj.ident);
                    TypePtr payload = fresh();
                    TypePtr subj_ty = fresh();
                    PriorityTerm o = fresh_pvar();
                    add_pending(subj_ty,
                                {true, o, n.label, payload, {"plus", path, n.subj.ident}}, path);
                    Ctx c;
                    ctx_bind(c, n.subj, Entry{false, subj_ty, {}}, path);
                    ctx_bind(c, n.cont, Entry{false, edual(payload), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PBranch>) {
                    std::string here = path + "/bra(" + n.subj.ident + ")";
                    PriorityTerm o = fresh_pvar();
                    std::map<std::string, TypePtr> alts;
                    std::optional<Ctx> residual;
                    for (auto& [label, body] : n.branches) {
                        RecursionContext om = omega;
                        Ctx cb = infer_node(body, om, here + "/" + label);
                        TypePtr ai = single_of(take_or_bullet(cb, n.cont, here), n.cont, here);
                        alts.emplace(label, ai);
                        if (ctx_find(cb, n.subj))
                            throw TypeError("linearity violation: " + n.subj.ident +
                                                " used under its own branch prefix",
                                            here);
                        if (!residual) {
                            residual = std::move(cb);
                            continue;
                        }
                        // all branches must share one residual context
                        if (cb.size() != residual->size())
                            throw TypeError("branches of " + n.subj.ident +
                                                " use different endpoint sets",
                                            here);
                        for (auto& [nm, e] : cb) {
                            Entry* have = ctx_find(*residual, nm);
                            if (!have)
                                throw TypeError("branches of " + n.subj.ident +
                                                    " use different endpoint sets",
                                                here);
                            if (have->requests != e.requests)
                                throw TypeError("branches disagree on request usage of " + nm.ident,
                                                here);
                            if (e.requests) {
                                if (e.reqs.size() != have->reqs.size())
                                    throw TypeError("branches disagree on requests of " + nm.ident,
                                                    here);
                                for (std::size_t i = 0; i < e.reqs.size(); ++i) {
                                    emit_eq(e.reqs[i].first, have->reqs[i].first,
                                            {"with", here, nm.ident});
                                    unify(e.reqs[i].second, have->reqs[i].second,
                                          {"with", here, nm.ident}, here);
                                }
                            } else {
                                unify(have->single, e.single, {"with", here, nm.ident}, here);
                            }
                        }
                    }
                    Ctx c = residual ? std::move(*residual) : Ctx{};
                    guard_residual(c, o, "with", here);
                    log_rule("with", path, n.subj.ident);
                    ctx_bind(c, n.subj, Entry{false, t_with(o, std::move(alts)), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PRestrict>) {
                    Ctx c = infer_node(n.body, omega, path + "/nu");
                    cycle(c, n.a, n.b, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PPar>) {
                    Ctx l = infer_node(n.left, omega, path + "/0");
                    Ctx r = infer_node(n.right, omega, path + "/1");
                    log_rule("mix", path);
                    return mix(std::move(l), std::move(r), path);
                } else if constexpr (std::is_same_v<T, PRecDef>) {
                    RecursionContext om = omega;
                    om[n.var_id] = n.params.size();
                    Ctx c = infer_node(n.body, om, path + "/mu(" + n.var + ")");
                    Ctx out;
                    for (auto& x : n.params) {
                        TypePtr ai =
                            single_of(take_or_bullet(c, x, path), x, path);
                        TypePtr r = resolve(ai);
                        if (auto* v = std::get_if<TVarRef>(&r->node);
                            v && rec_find(v->var_id) == rec_find(n.var_id))
                            throw TypeError("guardedness violation: parameter " + x.ident +
                                                " of " + n.var + " recurses without an action",
                                            path);
                        ctx_bind(out, x, Entry{false, t_mu(n.var, n.var_id, ai), {}}, path);
                    }
                    if (!c.empty())
                        throw TypeError("recursion body of " + n.var + " uses endpoint " +
                                            c.front().first.ident +
                                            " outside its parameter list",
                                        path);
                    log_rule("rec", path, n.var);
                    return out;
                } else if constexpr (std::is_same_v<T, PRecCall>) {
                    auto it = omega.find(n.var_id);
                    if (it == omega.end())
                        throw TypeError("recursion variable " + n.var + " not in scope", path);
                    if (it->second != n.args.size())
                        throw TypeError("recursion arity mismatch on " + n.var + ": expected " +
                                            std::to_string(it->second) + " endpoints, got " +
                                            std::to_string(n.args.size()),
                                        path);
                    log_rule("var", path, n.var);
                    Ctx c;
                    for (auto& x : n.args)
                        ctx_bind(c, x, Entry{false, t_tvar(n.var, n.var_id), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                    require_ext(path);
                    log_rule("one", path, n.subj.ident);
                    Ctx c;
                    ctx_bind(c, n.subj, Entry{false, t_one(fresh_pvar()), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                    require_ext(path);
                    Ctx c = infer_node(n.body, omega, path + "/ein(" + n.subj.ident + ")");
                    if (ctx_find(c, n.subj))
                        throw TypeError("linearity violation: " + n.subj.ident +
                                            " used under its own empty input",
                                        path);
                    PriorityTerm o = fresh_pvar();
                    guard_residual(c, o, "bot", path);
                    log_rule("bot", path, n.subj.ident);
                    ctx_bind(c, n.subj, Entry{false, t_bot(o), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PClientReq>) {
                    require_ext(path);
                    log_rule("query", path, n.subj.ident);
                    TypePtr a = fresh();
                    Ctx c;
                    Entry e;
                    e.requests = true;
                    e.reqs.emplace_back(fresh_pvar(), a);
                    c.emplace_back(n.subj, std::move(e));
                    ctx_bind(c, n.payload, Entry{false, edual(a), {}}, path);
                    return c;
                } else if constexpr (std::is_same_v<T, PServer>) {
                    require_ext(path);
                    std::size_t cs_begin = cs.size();
                    Ctx c = infer_node(n.body, omega, path + "/srv(" + n.subj.ident + ")");
                    TypePtr a = single_of(take_or_bullet(c, n.payload, path), n.payload, path);
                    if (ctx_find(c, n.subj))
                        throw TypeError("linearity violation: " + n.subj.ident +
                                            " used under its own server",
                                        path);
                    // residual context must consist of client requests
                    PriorityTerm o = fresh_pvar();
                    for (auto& [nm, e] : c) {
                        if (e.requests) continue;
                        TypePtr r = resolve(e.single);
                        if (std::holds_alternative<TMeta>(r->node)) {
                            unify(e.single, t_query(fresh_pvar(), fresh()),
                                  {"bang", path, nm.ident}, path);
                        } else if (!std::holds_alternative<TQuery>(r->node)) {
                            throw TypeError("server " + n.subj.ident +
                                                " captures non-request endpoint " + nm.ident,
                                            path);
                        }
                    }
                    guard_residual(c, o, "bang", path);
                    log_rule("bang", path, n.subj.ident);
                    TypePtr bang = t_bang(o, a);
                    schemes[bang.get()] = ServerScheme{a, o, cs_begin, cs.size()};
                    ctx_bind(c, n.subj, Entry{false, bang, {}}, path);
                    return c;
                }
            },
            p->node);
    }

    void require_ext(const std::string& path) {
        if (!opts.extensions)
            throw TypeError("extension construct used without the extension flag", path);
    }

    // Cycle: remove a dual pair, emitting duality equalities; servers are cut
    // against their request bags with per-request instantiation.
    void cycle(Ctx& c, const Name& a, const Name& b, const std::string& path) {
        log_rule("cycle", path, a.ident + "," + b.ident);
        auto grab = [&](const Name& n) -> std::optional<Entry> {
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (c[i].first == n) {
                    Entry e = std::move(c[i].second);
                    c.erase(c.begin() + i);
                    return e;
                }
            }
            return std::nullopt;
        };
        std::optional<Entry> ea = grab(a), eb = grab(b);
        bool ra = ea && ea->requests, rb = eb && eb->requests;
        if (ra || rb) {
            const Name& req_name = ra ? a : b;
            std::optional<Entry>& reqs = ra ? ea : eb;
            std::optional<Entry>& srv = ra ? eb : ea;
            TypePtr srv_ty = srv ? srv->single : TypePtr{};
            if (srv && srv->requests)
                throw TypeError("both endpoints of a restriction carry client requests: " +
                                    a.ident + ", " + b.ident,
                                path);
            if (!srv)
                throw TypeError("client requests on " + req_name.ident + " have no server",
                                path);
            TypePtr rs = resolve(srv_ty);
            if (auto* bang = std::get_if<TBang>(&rs->node)) {
                auto sch = schemes.find(rs.get());
                for (auto& [ro, pay] : reqs->reqs) {
                    Provenance prov{"duality", path, a.ident + "," + b.ident};
                    emit_eq(ro, bang->pr, prov);
                    TypePtr inst;
                    if (sch != schemes.end())
                        inst = instantiate(sch->second, path);
                    else
                        inst = bang->payload;
                    unify(pay, edual(inst), prov, path);
                }
                return;
            }
            if (std::holds_alternative<TMeta>(rs->node)) {
                PriorityTerm o = fresh_pvar();
                TypePtr pay = fresh();
                unify(rs, t_bang(o, pay), {"duality", path, a.ident}, path);
                for (auto& [ro, rp] : reqs->reqs) {
                    Provenance prov{"duality", path, a.ident + "," + b.ident};
                    emit_eq(ro, o, prov);
                    unify(rp, edual(pay), prov, path);
                }
                return;
            }
            throw TypeError("client requests cut against non-server type " + print_type(rs), path);
        }
        TypePtr ta = ea ? ea->single : t_bullet();
        TypePtr tb = eb ? eb->single : t_bullet();
        // weakening: an unused endpoint against a server is fine
        if (!ea && std::holds_alternative<TBang>(resolve(tb)->node)) return;
        if (!eb && std::holds_alternative<TBang>(resolve(ta)->node)) return;
        unify(ta, edual(tb), {"duality", path, a.ident + "," + b.ident}, path);
    }

    /// Per-request copy of a server payload. Only priority variables the
    /// server's own derivation leaves unconstrained are polymorphic; any
    /// variable pinned by a server-side check stays shared across copies.
    TypePtr instantiate(const ServerScheme& sch, const std::string& path) {
        TypePtr pay = resolve_deep(sch.payload);
        std::map<std::uint64_t, std::uint64_t> pinned;
        for (std::size_t i = sch.cs_begin; i < sch.cs_end && i < cs.size(); ++i) {
            collect_term_pvars(cs[i].lhs, pinned);
            collect_term_pvars(cs[i].rhs, pinned);
        }
        std::map<std::uint64_t, std::uint64_t> ren;
        collect_pvars(pay, ren);
        for (auto it = ren.begin(); it != ren.end();) {
            if (pinned.count(it->first)) it = ren.erase(it);
            else ++it;
        }
        for (auto& [old_v, fresh_v] : ren) fresh_v = fresh_id();
        (void)path;
        return rename_pvars(pay, ren);
    }

    static void collect_term_pvars(const PriorityTerm& t, std::map<std::uint64_t, std::uint64_t>& out) {
        if (t.is_var()) out.emplace(*t.var, 0);
    }

    void collect_pvars(const TypePtr& t, std::map<std::uint64_t, std::uint64_t>& out) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>) {
                    collect_term_pvars(n.pr, out);
                    collect_pvars(n.payload, out);
                    collect_pvars(n.cont, out);
                } else if constexpr (std::is_same_v<T, TPlus> || std::is_same_v<T, TWith>) {
                    collect_term_pvars(n.pr, out);
                    for (auto& [l, b] : n.branches) collect_pvars(b, out);
                } else if constexpr (std::is_same_v<T, TMu>) collect_pvars(n.body, out);
                else if constexpr (std::is_same_v<T, TOne> || std::is_same_v<T, TBot>)
                    collect_term_pvars(n.pr, out);
                else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>) {
                    collect_term_pvars(n.pr, out);
                    collect_pvars(n.payload, out);
                }
            },
            t->node);
    }

    static PriorityTerm rename_term(const PriorityTerm& t,
                                    const std::map<std::uint64_t, std::uint64_t>& ren) {
        if (!t.is_var()) return t;
        auto it = ren.find(*t.var);
        if (it == ren.end()) return t;
        PriorityTerm r = t;
        r.var = it->second;
        return r;
    }

    TypePtr rename_pvars(const TypePtr& t, const std::map<std::uint64_t, std::uint64_t>& ren) {
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor>)
                    return t_tensor(rename_term(n.pr, ren), rename_pvars(n.payload, ren),
                                    rename_pvars(n.cont, ren));
                else if constexpr (std::is_same_v<T, TPar>)
                    return t_par(rename_term(n.pr, ren), rename_pvars(n.payload, ren),
                                 rename_pvars(n.cont, ren));
                else if constexpr (std::is_same_v<T, TPlus>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, rename_pvars(b, ren));
                    return t_plus(rename_term(n.pr, ren), std::move(bs), n.row_open);
                } else if constexpr (std::is_same_v<T, TWith>) {
                    std::map<std::string, TypePtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, rename_pvars(b, ren));
                    return t_with(rename_term(n.pr, ren), std::move(bs));
                } else if constexpr (std::is_same_v<T, TMu>)
                    return t_mu(n.var, n.var_id, rename_pvars(n.body, ren));
                else if constexpr (std::is_same_v<T, TOne>) return t_one(rename_term(n.pr, ren));
                else if constexpr (std::is_same_v<T, TBot>) return t_bot(rename_term(n.pr, ren));
                else if constexpr (std::is_same_v<T, TQuery>)
                    return t_query(rename_term(n.pr, ren), rename_pvars(n.payload, ren));
                else if constexpr (std::is_same_v<T, TBang>)
                    return t_bang(rename_term(n.pr, ren), rename_pvars(n.payload, ren));
                else
                    return t;
            },
            t->node);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Public inference entry points

Judgment infer(const ProcPtr& p, const RecursionContext& omega, const TypingOptions& opts) {
    if (auto bad = find_uncontractive(p))
        throw TypeError("non-contractive recursion on " + *bad);
    Engine eng;
    eng.opts = opts;
    RecursionContext om = omega;
    Ctx c = eng.infer_node(p, om, "");
    Judgment j;
    j.process = p;
    j.omega = omega;
    for (auto& [n, e] : c) {
        if (e.requests) {
            Entry copy = e;
            j.gamma.bind(n, eng.resolve_deep(eng.single_of(std::move(copy), n, "")));
        } else {
            j.gamma.bind(n, eng.resolve_deep(e.single));
        }
    }
    j.constraints = std::move(eng.cs);
    j.proof_log = std::move(eng.log);
    return j;
}

Judgment check(const ProcPtr& p, const TypingContext& declared, const TypingOptions& opts,
               const PriorityNames* names) {
    if (auto bad = find_uncontractive(p))
        throw TypeError("non-contractive recursion on " + *bad);
    Engine eng;
    eng.opts = opts;
    RecursionContext om;
    Ctx c = eng.infer_node(p, om, "");
    // every inferred endpoint must be declared
    for (auto& [n, e] : c) {
        if (!declared.lookup(n))
            throw TypeError("free endpoint " + n.ident + " has no declared type");
    }
    for (auto& [n, want] : declared.entries) {
        Entry* have = ctx_find(c, n);
        if (!have) {
            // unused: fine for servers (weakening) and closed endpoints
            TypePtr w = want;
            if (std::holds_alternative<TBang>(w->node) || std::holds_alternative<TQuery>(w->node))
                continue;
            eng.unify(t_bullet(), w, {"annotation", "", n.ident}, "");
            continue;
        }
        if (have->requests) {
            TypePtr w = want;
            auto* q = std::get_if<TQuery>(&w->node);
            if (!q) throw TypeError("endpoint " + n.ident + " used for requests but declared " +
                                    print_type(w, names));
            for (auto& [ro, pay] : have->reqs) {
                eng.emit_eq(ro, q->pr, {"annotation", "", n.ident});
                eng.unify(pay, q->payload, {"annotation", "", n.ident}, "");
            }
            continue;
        }
        eng.unify(have->single, want, {"annotation", "", n.ident}, "");
    }
    Judgment j;
    j.process = p;
    for (auto& [n, e] : c) {
        Entry copy = e;
        j.gamma.bind(n, eng.resolve_deep(eng.single_of(std::move(copy), n, "")));
    }
    j.constraints = std::move(eng.cs);
    j.proof_log = std::move(eng.log);
    if (names) j.priority_names = *names;
    return j;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

constexpr std::uint64_t kZero = 0;  // anchor node: the constant 0

struct TermView {
    bool omega = false;
    std::uint64_t node = kZero;
    std::int64_t off = 0;
};

TermView view(const PriorityTerm& t) {
    if (t.is_omega()) return {true, 0, 0};
    if (t.is_lit()) return {false, kZero, static_cast<std::int64_t>(t.offset)};
    return {false, *t.var, static_cast<std::int64_t>(t.offset)};
}

}  // namespace

SolveResult solve(const ConstraintSet& cs) {
    SolveResult res;

    // --- omega closure: which variables are forced to omega, with provenance
    std::map<std::uint64_t, std::pair<std::size_t, std::uint64_t>> omega_set;  // var -> (constraint, parent or 0)
    auto omega_chain = [&](std::uint64_t v) {
        std::vector<Constraint> chain;
        while (v != 0) {
            auto it = omega_set.find(v);
            if (it == omega_set.end()) break;
            chain.push_back(cs[it->second.first]);
            v = it->second.second;
        }
        return chain;
    };
    auto is_omega_term = [&](const TermView& t) {
        return t.omega || (t.node != kZero && omega_set.count(t.node));
    };
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            TermView l = view(cs[i].lhs), r = view(cs[i].rhs);
            bool lo = is_omega_term(l), ro = is_omega_term(r);
            if (cs[i].kind == Constraint::Kind::StrictLess) {
                if (lo) {
                    res.core.reason = "a priority below another is forced to omega";
                    if (l.node != kZero) res.core.constraints = omega_chain(l.node);
                    res.core.constraints.push_back(cs[i]);
                    res.sat = false;
                    return res;
                }
                continue;
            }
            // equality
            if (lo == ro) continue;
            const TermView& fin = lo ? r : l;
            std::uint64_t src = lo ? l.node : r.node;
            if (fin.node == kZero) {
                res.core.reason = "omega equated with a finite literal";
                if (src != kZero) res.core.constraints = omega_chain(src);
                res.core.constraints.push_back(cs[i]);
                res.sat = false;
                return res;
            }
            omega_set[fin.node] = {i, src};
            grew = true;
        }
    }

    // --- difference graph over the finite part
    struct Edge {
        std::uint64_t from, to;
        std::int64_t w;
        std::size_t constraint;
    };
    std::vector<Edge> edges;
    std::set<std::uint64_t> nodes{kZero};
    auto add_edge = [&](std::uint64_t u, std::int64_t a, std::uint64_t v, std::int64_t b,
                        std::int64_t strict, std::size_t ci) {
        // val(u) + a + strict <= val(v) + b
        edges.push_back({u, v, a - b + strict, ci});
        nodes.insert(u);
        nodes.insert(v);
    };
    for (std::size_t i = 0; i < cs.size(); ++i) {
        TermView l = view(cs[i].lhs), r = view(cs[i].rhs);
        bool lo = is_omega_term(l), ro = is_omega_term(r);
        if (cs[i].kind == Constraint::Kind::Equal) {
            if (lo || ro) continue;  // handled above / both omega
            add_edge(l.node, l.off, r.node, r.off, 0, i);
            add_edge(r.node, r.off, l.node, l.off, 0, i);
        } else {
            if (ro) continue;  // anything finite is below omega
            add_edge(l.node, l.off, r.node, r.off, 1, i);
        }
    }

    // --- longest path from the zero anchor (positive cycle = unsat)
    std::map<std::uint64_t, std::int64_t> dist;
    std::map<std::uint64_t, std::size_t> pred;  // node -> incoming edge index
    for (auto n : nodes) dist[n] = 0;
    std::size_t V = nodes.size();
    bool changed = false;
    for (std::size_t round = 0; round <= V; ++round) {
        changed = false;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            auto& ed = edges[e];
            if (dist[ed.from] + ed.w > dist[ed.to]) {
                dist[ed.to] = dist[ed.from] + ed.w;
                pred[ed.to] = e;
                changed = true;
            }
        }
        if (!changed) break;
    }
    if (changed) {
        // walk predecessors to find a node on a positive cycle
        std::uint64_t x = 0;
        for (auto& e : edges) {
            if (dist[e.from] + e.w > dist[e.to]) {
                x = e.to;
                break;
            }
        }
        for (std::size_t i = 0; i < V; ++i) x = edges[pred.at(x)].from;
        // collect the cycle
        std::vector<std::size_t> cyc;
        std::uint64_t cur = x;
        do {
            std::size_t e = pred.at(cur);
            cyc.push_back(edges[e].constraint);
            cur = edges[e].from;
        } while (cur != x && cyc.size() <= edges.size());
        res.sat = false;
        res.core.reason = "cyclic priority requirement";
        std::set<std::size_t> uniq(cyc.begin(), cyc.end());
        for (auto ci : uniq) res.core.constraints.push_back(cs[ci]);
        return res;
    }

    res.sat = true;
    std::int64_t base = dist[kZero];  // 0 unless literals pushed it (cycle otherwise)
    for (auto n : nodes) {
        if (n == kZero) continue;
        res.assignment[n] = PriorityValue::of(static_cast<std::uint64_t>(dist[n] - base));
    }
    // variables that only ever faced omega bounds still deserve a value
    for (auto& c : cs) {
        for (auto* t : {&c.lhs, &c.rhs})
            if (t->is_var() && !res.assignment.count(*t->var))
                res.assignment[*t->var] = PriorityValue::of(0);
    }
    for (auto& [v, _] : omega_set) res.assignment[v] = PriorityValue::make_omega();
    return res;
}

SolveResult solve_with(const ConstraintSet& cs, const Assignment& partial) {
    ConstraintSet sub;
    sub.reserve(cs.size());
    auto subst = [&](const PriorityTerm& t) -> PriorityTerm {
        if (!t.is_var()) return t;
        auto it = partial.find(*t.var);
        if (it == partial.end()) return t;
        if (it->second.omega) return PriorityTerm::make_omega();
        return PriorityTerm::lit(it->second.value + t.offset);
    };
    for (auto& c : cs) sub.push_back({c.kind, subst(c.lhs), subst(c.rhs), c.prov});
    return solve(sub);
}

PriorityValue eval_priority(const PriorityTerm& t, const Assignment& a) {
    if (t.is_omega()) return PriorityValue::make_omega();
    if (t.is_lit()) return PriorityValue::of(t.offset);
    auto it = a.find(*t.var);
    PriorityValue v = it == a.end() ? PriorityValue::of(0) : it->second;
    if (v.omega) return v;
    return PriorityValue::of(v.value + t.offset);
}

std::vector<Constraint> violations(const ConstraintSet& cs, const Assignment& a) {
    std::vector<Constraint> bad;
    for (auto& c : cs) {
        PriorityValue l = eval_priority(c.lhs, a), r = eval_priority(c.rhs, a);
        bool ok;
        if (c.kind == Constraint::Kind::Equal) {
            ok = l == r;
        } else {
            if (l.omega) ok = false;
            else if (r.omega) ok = true;
            else ok = l.value < r.value;
        }
        if (!ok) bad.push_back(c);
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Certification

CertifyResult certify_deadlock_free(const ProcPtr& p, const TypingOptions& opts) {
    Judgment j;
    try {
        j = infer(p, {}, opts);
    } catch (const TypeError& e) {
        return Diagnosis{"typing-error", e.what(), {}};
    }
    if (!j.gamma.empty()) {
        std::string eps;
        for (auto& [n, t] : j.gamma.entries) eps += (eps.empty() ? "" : ", ") + n.ident;
        return Diagnosis{"typing-error", "process is not closed; free endpoints: " + eps, {}};
    }
    SolveResult s = solve(j.constraints);
    if (!s.sat) return Diagnosis{"unsat", s.core.reason, s.core};
    Certificate c;
    c.gamma = j.gamma;
    c.assignment = std::move(s.assignment);
    c.constraints = std::move(j.constraints);
    c.proof_log = std::move(j.proof_log);
    if (!violations(c.constraints, c.assignment).empty())
        throw std::logic_error("solver returned an assignment violating its own constraints");
    return c;
}

bool is_certified(const CertifyResult& r) { return std::holds_alternative<Certificate>(r); }

bool audit_law1(const Certificate& c) {
    for (auto& k : c.constraints) {
        if (k.kind != Constraint::Kind::StrictLess) continue;
        if (k.prov.rule != "par" && k.prov.rule != "with" && k.prov.rule != "bot" &&
            k.prov.rule != "bang")
            continue;
        PriorityValue l = eval_priority(k.lhs, c.assignment), r = eval_priority(k.rhs, c.assignment);
        if (l.omega) return false;
        if (!r.omega && !(l.value < r.value)) return false;
    }
    return true;
}

bool audit_law2(const Certificate& c) {
    for (auto& k : c.constraints) {
        if (k.kind != Constraint::Kind::Equal) continue;
        if (k.prov.rule != "duality") continue;
        if (!(eval_priority(k.lhs, c.assignment) == eval_priority(k.rhs, c.assignment)))
            return false;
    }
    return true;
}

bool lift_admissible(const Certificate& c, std::uint64_t t) {
    Assignment shifted = c.assignment;
    for (auto& [v, val] : shifted)
        if (!val.omega) val.value += t;
    return violations(c.constraints, shifted).empty();
}

TypePtr concretize(const TypePtr& t, const Assignment& a) {
    auto conc = [&](const PriorityTerm& pt) -> PriorityTerm {
        PriorityValue v = eval_priority(pt, a);
        return v.omega ? PriorityTerm::make_omega() : PriorityTerm::lit(v.value);
    };
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor>)
                return t_tensor(conc(n.pr), concretize(n.payload, a), concretize(n.cont, a));
            else if constexpr (std::is_same_v<T, TPar>)
                return t_par(conc(n.pr), concretize(n.payload, a), concretize(n.cont, a));
            else if constexpr (std::is_same_v<T, TPlus>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, concretize(b, a));
                return t_plus(conc(n.pr), std::move(bs), n.row_open);
            } else if constexpr (std::is_same_v<T, TWith>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, concretize(b, a));
                return t_with(conc(n.pr), std::move(bs));
            } else if constexpr (std::is_same_v<T, TMu>)
                return t_mu(n.var, n.var_id, concretize(n.body, a));
            else if constexpr (std::is_same_v<T, TOne>) return t_one(conc(n.pr));
            else if constexpr (std::is_same_v<T, TBot>) return t_bot(conc(n.pr));
            else if constexpr (std::is_same_v<T, TQuery>) return t_query(conc(n.pr), concretize(n.payload, a));
            else if constexpr (std::is_same_v<T, TBang>) return t_bang(conc(n.pr), concretize(n.payload, a));
            else return t;
        },
        t->node);
}

namespace {

// Collect connective priorities in a fixed traversal order.
void priorities_of(const TypePtr& t, std::vector<PriorityTerm>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>) {
                out.push_back(n.pr);
                priorities_of(n.payload, out);
                priorities_of(n.cont, out);
            } else if constexpr (std::is_same_v<T, TPlus> || std::is_same_v<T, TWith>) {
                out.push_back(n.pr);
                for (auto& [l, b] : n.branches) priorities_of(b, out);
            } else if constexpr (std::is_same_v<T, TMu>) {
                priorities_of(n.body, out);
            } else if constexpr (std::is_same_v<T, TOne> || std::is_same_v<T, TBot>) {
                out.push_back(n.pr);
            } else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>) {
                out.push_back(n.pr);
                priorities_of(n.payload, out);
            }
        },
        t->node);
}

}  // namespace

std::optional<std::uint64_t> gamma_lift_distance(const TypingContext& before,
                                                 const TypingContext& after) {
    if (before.size() != after.size()) return std::nullopt;
    std::optional<std::uint64_t> t;
    for (auto& [n, tb] : before.entries) {
        const TypePtr* ta = after.lookup(n);
        if (!ta) return std::nullopt;
        if (!type_shape_equal(tb, *ta)) return std::nullopt;
        std::vector<PriorityTerm> pb, pa;
        priorities_of(tb, pb);
        priorities_of(*ta, pa);
        if (pb.size() != pa.size()) return std::nullopt;
        for (std::size_t i = 0; i < pb.size(); ++i) {
            if (pb[i].is_omega() != pa[i].is_omega()) return std::nullopt;
            if (pb[i].is_omega()) continue;
            if (!pb[i].is_lit() || !pa[i].is_lit()) return std::nullopt;
            if (pa[i].offset < pb[i].offset) return std::nullopt;
            std::uint64_t d = pa[i].offset - pb[i].offset;
            if (!t) t = d;
            if (*t != d) return std::nullopt;
        }
    }
    return t ? t : std::optional<std::uint64_t>(0);
}

}  // namespace apcp
