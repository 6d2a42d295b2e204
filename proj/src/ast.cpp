#include "apcp/ast.hpp"

#include <functional>

namespace apcp {

static std::atomic<std::uint64_t> g_ids{1};

std::uint64_t fresh_id() { return g_ids.fetch_add(1, std::memory_order_relaxed); }

Name fresh_name(const std::string& ident) { return Name{ident, fresh_id()}; }

PriorityTerm fresh_pvar() { return PriorityTerm::pvar(fresh_id()); }

PriorityTerm PriorityNames::named(const std::string& name) {
    auto it = by_name_.find(name);
    if (it != by_name_.end()) return PriorityTerm::pvar(it->second);
    std::uint64_t v = fresh_id();
    by_name_.emplace(name, v);
    by_var_.emplace(v, name);
    return PriorityTerm::pvar(v);
}

std::optional<std::string> PriorityNames::name_of(std::uint64_t var) const {
    auto it = by_var_.find(var);
    if (it == by_var_.end()) return std::nullopt;
    return it->second;
}

// -- type constructors -------------------------------------------------------

template <typename N>
static TypePtr mk_type(N&& n) {
    return std::make_shared<const SessionType>(SessionType{std::forward<N>(n)});
}

TypePtr t_tensor(PriorityTerm o, TypePtr a, TypePtr b) { return mk_type(TTensor{o, std::move(a), std::move(b)}); }
TypePtr t_par(PriorityTerm o, TypePtr a, TypePtr b) { return mk_type(TPar{o, std::move(a), std::move(b)}); }
TypePtr t_plus(PriorityTerm o, std::map<std::string, TypePtr> bs, bool row_open) {
    return mk_type(TPlus{o, std::move(bs), row_open});
}
TypePtr t_with(PriorityTerm o, std::map<std::string, TypePtr> bs) { return mk_type(TWith{o, std::move(bs)}); }
TypePtr t_bullet() {
    static const TypePtr b = mk_type(TBullet{});
    return b;
}
TypePtr t_mu(const std::string& var, std::uint64_t var_id, TypePtr body) {
    return mk_type(TMu{var, var_id, std::move(body)});
}
TypePtr t_tvar(const std::string& var, std::uint64_t var_id) { return mk_type(TVarRef{var, var_id}); }
TypePtr t_one(PriorityTerm o) { return mk_type(TOne{o}); }
TypePtr t_bot(PriorityTerm o) { return mk_type(TBot{o}); }
TypePtr t_query(PriorityTerm o, TypePtr a) { return mk_type(TQuery{o, std::move(a)}); }
TypePtr t_bang(PriorityTerm o, TypePtr a) { return mk_type(TBang{o, std::move(a)}); }
TypePtr t_meta() { return mk_type(TMeta{fresh_id()}); }

// -- process constructors ----------------------------------------------------

template <typename N>
static ProcPtr mk_proc(N&& n) {
    return std::make_shared<const Process>(Process{std::forward<N>(n)});
}

ProcPtr p_output(Name x, Name y, Name z) { return mk_proc(POutput{x, y, z}); }
ProcPtr p_input(Name x, Name y, Name z, ProcPtr body) { return mk_proc(PInput{x, y, z, std::move(body)}); }
ProcPtr p_select(Name x, Name z, const std::string& label) { return mk_proc(PSelect{x, z, label}); }
ProcPtr p_branch(Name x, Name z, std::map<std::string, ProcPtr> branches) {
    return mk_proc(PBranch{x, z, std::move(branches)});
}
ProcPtr p_restrict(Name a, Name b, ProcPtr body) { return mk_proc(PRestrict{a, b, std::move(body)}); }
ProcPtr p_par(ProcPtr l, ProcPtr r) { return mk_proc(PPar{std::move(l), std::move(r)}); }
ProcPtr p_inact() {
    static const ProcPtr z = mk_proc(PInact{});
    return z;
}
ProcPtr p_fwd(Name a, Name b) { return mk_proc(PFwd{a, b}); }
ProcPtr p_recdef(const std::string& var, std::uint64_t var_id, std::vector<Name> params, ProcPtr body) {
    return mk_proc(PRecDef{var, var_id, std::move(params), std::move(body)});
}
ProcPtr p_reccall(const std::string& var, std::uint64_t var_id, std::vector<Name> args) {
    return mk_proc(PRecCall{var, var_id, std::move(args)});
}
ProcPtr p_empty_out(Name x) { return mk_proc(PEmptyOut{x}); }
ProcPtr p_empty_in(Name x, ProcPtr body) { return mk_proc(PEmptyIn{x, std::move(body)}); }
ProcPtr p_client_req(Name x, Name y) { return mk_proc(PClientReq{x, y}); }
ProcPtr p_server(Name x, Name y, ProcPtr body) { return mk_proc(PServer{x, y, std::move(body)}); }

// -- free names ---------------------------------------------------------------

static void fn_into(const ProcPtr& p, std::set<Name>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, POutput>) {
                out.insert(n.subj); out.insert(n.payload); out.insert(n.cont);
            } else if constexpr (std::is_same_v<T, PInput>) {
                std::set<Name> body;
                fn_into(n.body, body);
                body.erase(n.payload);
                body.erase(n.cont);
                out.insert(n.subj);
                out.insert(body.begin(), body.end());
            } else if constexpr (std::is_same_v<T, PSelect>) {
                out.insert(n.subj); out.insert(n.cont);
            } else if constexpr (std::is_same_v<T, PBranch>) {
                out.insert(n.subj);
                for (auto& [l, b] : n.branches) {
                    std::set<Name> body;
                    fn_into(b, body);
                    body.erase(n.cont);
                    out.insert(body.begin(), body.end());
                }
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                std::set<Name> body;
                fn_into(n.body, body);
                body.erase(n.a);
                body.erase(n.b);
                out.insert(body.begin(), body.end());
            } else if constexpr (std::is_same_v<T, PPar>) {
                fn_into(n.left, out);
                fn_into(n.right, out);
            } else if constexpr (std::is_same_v<T, PInact>) {
            } else if constexpr (std::is_same_v<T, PFwd>) {
                out.insert(n.a); out.insert(n.b);
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                for (auto& x : n.params) out.insert(x);
                fn_into(n.body, out);
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                for (auto& x : n.args) out.insert(x);
            } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                out.insert(n.subj);
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                out.insert(n.subj);
                fn_into(n.body, out);
            } else if constexpr (std::is_same_v<T, PClientReq>) {
                out.insert(n.subj); out.insert(n.payload);
            } else if constexpr (std::is_same_v<T, PServer>) {
                std::set<Name> body;
                fn_into(n.body, body);
                body.erase(n.payload);
                out.insert(n.subj);
                out.insert(body.begin(), body.end());
            }
        },
        p->node);
}

std::set<Name> free_names(const ProcPtr& p) {
    std::set<Name> out;
    fn_into(p, out);
    return out;
}

std::set<std::uint64_t> free_rec_vars(const ProcPtr& p) {
    std::set<std::uint64_t> out;
    std::function<void(const ProcPtr&)> go = [&](const ProcPtr& q) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, PInput>) go(n.body);
                else if constexpr (std::is_same_v<T, PBranch>) {
                    for (auto& [l, b] : n.branches) go(b);
                } else if constexpr (std::is_same_v<T, PRestrict>) go(n.body);
                else if constexpr (std::is_same_v<T, PPar>) { go(n.left); go(n.right); }
                else if constexpr (std::is_same_v<T, PRecDef>) {
                    std::set<std::uint64_t> inner = free_rec_vars(n.body);
                    inner.erase(n.var_id);
                    out.insert(inner.begin(), inner.end());
                } else if constexpr (std::is_same_v<T, PRecCall>) out.insert(n.var_id);
                else if constexpr (std::is_same_v<T, PEmptyIn>) go(n.body);
                else if constexpr (std::is_same_v<T, PServer>) go(n.body);
            },
            q->node);
    };
    go(p);
    return out;
}

// -- substitution --------------------------------------------------------------

static Name apply_sub(const Name& n, const std::map<std::uint64_t, Name>& sub) {
    auto it = sub.find(n.id);
    return it == sub.end() ? n : it->second;
}

// Binders are refreshed when a replacement name would be captured.
static bool capture_risk(const Name& binder, const std::map<std::uint64_t, Name>& sub) {
    for (auto& [from, to] : sub)
        if (to.id == binder.id) return true;
    return false;
}

ProcPtr substitute(const ProcPtr& p, const std::map<std::uint64_t, Name>& sub) {
    if (sub.empty()) return p;
    auto rebind = [&](std::map<std::uint64_t, Name>& local, Name& binder) {
        local.erase(binder.id);  // the binder shadows any outer mapping
        if (capture_risk(binder, sub)) {
            Name fresh = fresh_name(binder.ident);
            local[binder.id] = fresh;
            binder = fresh;
        }
    };
    return std::visit(
        [&](const auto& n) -> ProcPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, POutput>) {
                return p_output(apply_sub(n.subj, sub), apply_sub(n.payload, sub), apply_sub(n.cont, sub));
            } else if constexpr (std::is_same_v<T, PInput>) {
                std::map<std::uint64_t, Name> local = sub;
                Name y = n.payload, z = n.cont;
                rebind(local, y);
                rebind(local, z);
                return p_input(apply_sub(n.subj, sub), y, z, substitute(n.body, local));
            } else if constexpr (std::is_same_v<T, PSelect>) {
                return p_select(apply_sub(n.subj, sub), apply_sub(n.cont, sub), n.label);
            } else if constexpr (std::is_same_v<T, PBranch>) {
                std::map<std::uint64_t, Name> local = sub;
                Name z = n.cont;
                rebind(local, z);
                std::map<std::string, ProcPtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, substitute(b, local));
                return p_branch(apply_sub(n.subj, sub), z, std::move(bs));
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                std::map<std::uint64_t, Name> local = sub;
                Name a = n.a, b = n.b;
                rebind(local, a);
                rebind(local, b);
                return p_restrict(a, b, substitute(n.body, local));
            } else if constexpr (std::is_same_v<T, PPar>) {
                return p_par(substitute(n.left, sub), substitute(n.right, sub));
            } else if constexpr (std::is_same_v<T, PInact>) {
                return p;
            } else if constexpr (std::is_same_v<T, PFwd>) {
                return p_fwd(apply_sub(n.a, sub), apply_sub(n.b, sub));
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                std::vector<Name> ps;
                ps.reserve(n.params.size());
                for (auto& x : n.params) ps.push_back(apply_sub(x, sub));
                return p_recdef(n.var, n.var_id, std::move(ps), substitute(n.body, sub));
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                std::vector<Name> as;
                as.reserve(n.args.size());
                for (auto& x : n.args) as.push_back(apply_sub(x, sub));
                return p_reccall(n.var, n.var_id, std::move(as));
            } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                return p_empty_out(apply_sub(n.subj, sub));
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                return p_empty_in(apply_sub(n.subj, sub), substitute(n.body, sub));
            } else if constexpr (std::is_same_v<T, PClientReq>) {
                return p_client_req(apply_sub(n.subj, sub), apply_sub(n.payload, sub));
            } else if constexpr (std::is_same_v<T, PServer>) {
                std::map<std::uint64_t, Name> local = sub;
                Name y = n.payload;
                rebind(local, y);
                return p_server(apply_sub(n.subj, sub), y, substitute(n.body, local));
            }
        },
        p->node);
}

ProcPtr refresh_binders(const ProcPtr& p) {
    // Mint fresh ids for every name binder and recursion binder, renaming
    // bound occurrences along the way.
    std::function<ProcPtr(const ProcPtr&, std::map<std::uint64_t, Name>&,
                          std::map<std::uint64_t, std::uint64_t>&)>
        go = [&](const ProcPtr& q, std::map<std::uint64_t, Name>& sub,
                 std::map<std::uint64_t, std::uint64_t>& rsub) -> ProcPtr {
        return std::visit(
            [&](const auto& n) -> ProcPtr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, POutput>) {
                    return p_output(apply_sub(n.subj, sub), apply_sub(n.payload, sub), apply_sub(n.cont, sub));
                } else if constexpr (std::is_same_v<T, PInput>) {
                    Name y = fresh_name(n.payload.ident), z = fresh_name(n.cont.ident);
                    sub[n.payload.id] = y;
                    sub[n.cont.id] = z;
                    ProcPtr b = go(n.body, sub, rsub);
                    sub.erase(n.payload.id);
                    sub.erase(n.cont.id);
                    return p_input(apply_sub(n.subj, sub), y, z, b);
                } else if constexpr (std::is_same_v<T, PSelect>) {
                    return p_select(apply_sub(n.subj, sub), apply_sub(n.cont, sub), n.label);
                } else if constexpr (std::is_same_v<T, PBranch>) {
                    Name z = fresh_name(n.cont.ident);
                    sub[n.cont.id] = z;
                    std::map<std::string, ProcPtr> bs;
                    for (auto& [l, b] : n.branches) bs.emplace(l, go(b, sub, rsub));
                    sub.erase(n.cont.id);
                    return p_branch(apply_sub(n.subj, sub), z, std::move(bs));
                } else if constexpr (std::is_same_v<T, PRestrict>) {
                    Name a = fresh_name(n.a.ident), b = fresh_name(n.b.ident);
                    sub[n.a.id] = a;
                    sub[n.b.id] = b;
                    ProcPtr body = go(n.body, sub, rsub);
                    sub.erase(n.a.id);
                    sub.erase(n.b.id);
                    return p_restrict(a, b, body);
                } else if constexpr (std::is_same_v<T, PPar>) {
                    return p_par(go(n.left, sub, rsub), go(n.right, sub, rsub));
                } else if constexpr (std::is_same_v<T, PInact>) {
                    return q;
                } else if constexpr (std::is_same_v<T, PFwd>) {
                    return p_fwd(apply_sub(n.a, sub), apply_sub(n.b, sub));
                } else if constexpr (std::is_same_v<T, PRecDef>) {
                    std::uint64_t v = fresh_id();
                    rsub[n.var_id] = v;
                    std::vector<Name> ps;
                    for (auto& x : n.params) ps.push_back(apply_sub(x, sub));
                    ProcPtr b = go(n.body, sub, rsub);
                    rsub.erase(n.var_id);
                    return p_recdef(n.var, v, std::move(ps), b);
                } else if constexpr (std::is_same_v<T, PRecCall>) {
                    std::vector<Name> as;
                    for (auto& x : n.args) as.push_back(apply_sub(x, sub));
                    auto it = rsub.find(n.var_id);
                    return p_reccall(n.var, it == rsub.end() ? n.var_id : it->second, std::move(as));
                } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                    return p_empty_out(apply_sub(n.subj, sub));
                } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                    return p_empty_in(apply_sub(n.subj, sub), go(n.body, sub, rsub));
                } else if constexpr (std::is_same_v<T, PClientReq>) {
                    return p_client_req(apply_sub(n.subj, sub), apply_sub(n.payload, sub));
                } else if constexpr (std::is_same_v<T, PServer>) {
                    Name y = fresh_name(n.payload.ident);
                    sub[n.payload.id] = y;
                    ProcPtr b = go(n.body, sub, rsub);
                    sub.erase(n.payload.id);
                    return p_server(apply_sub(n.subj, sub), y, b);
                }
            },
            q->node);
    };
    std::map<std::uint64_t, Name> sub;
    std::map<std::uint64_t, std::uint64_t> rsub;
    return go(p, sub, rsub);
}

// -- alpha equivalence ----------------------------------------------------------

namespace {

struct AlphaEnv {
    std::map<std::uint64_t, std::uint64_t> l2r;  // bound name ids, left -> right
    std::map<std::uint64_t, std::uint64_t> rec;  // rec var ids, left -> right

    bool names_match(const Name& a, const Name& b) const {
        auto it = l2r.find(a.id);
        if (it != l2r.end()) return it->second == b.id;
        // free on the left: must be free (unmapped target) and identical on the right
        for (auto& [l, r] : l2r)
            if (r == b.id) return false;
        return a.id == b.id;
    }
};

bool alpha_eq(const ProcPtr& a, const ProcPtr& b, AlphaEnv& env);

bool alpha_eq_bind(const ProcPtr& a, const ProcPtr& b, AlphaEnv& env,
                   std::initializer_list<std::pair<Name, Name>> binds) {
    std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> saved;
    for (auto& [l, r] : binds) {
        auto it = env.l2r.find(l.id);
        saved.emplace_back(l.id, it == env.l2r.end() ? std::nullopt : std::optional(it->second));
        env.l2r[l.id] = r.id;
    }
    bool ok = alpha_eq(a, b, env);
    for (auto& [id, old] : saved) {
        if (old) env.l2r[id] = *old;
        else env.l2r.erase(id);
    }
    return ok;
}

bool alpha_eq(const ProcPtr& a, const ProcPtr& b, AlphaEnv& env) {
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, POutput>) {
                return env.names_match(x.subj, y.subj) && env.names_match(x.payload, y.payload) &&
                       env.names_match(x.cont, y.cont);
            } else if constexpr (std::is_same_v<T, PInput>) {
                return env.names_match(x.subj, y.subj) &&
                       alpha_eq_bind(x.body, y.body, env, {{x.payload, y.payload}, {x.cont, y.cont}});
            } else if constexpr (std::is_same_v<T, PSelect>) {
                return x.label == y.label && env.names_match(x.subj, y.subj) &&
                       env.names_match(x.cont, y.cont);
            } else if constexpr (std::is_same_v<T, PBranch>) {
                if (!env.names_match(x.subj, y.subj)) return false;
                if (x.branches.size() != y.branches.size()) return false;
                for (auto& [l, pb] : x.branches) {
                    auto it = y.branches.find(l);
                    if (it == y.branches.end()) return false;
                    if (!alpha_eq_bind(pb, it->second, env, {{x.cont, y.cont}})) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                return alpha_eq_bind(x.body, y.body, env, {{x.a, y.a}, {x.b, y.b}});
            } else if constexpr (std::is_same_v<T, PPar>) {
                return alpha_eq(x.left, y.left, env) && alpha_eq(x.right, y.right, env);
            } else if constexpr (std::is_same_v<T, PInact>) {
                return true;
            } else if constexpr (std::is_same_v<T, PFwd>) {
                return env.names_match(x.a, y.a) && env.names_match(x.b, y.b);
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                if (x.params.size() != y.params.size()) return false;
                for (std::size_t i = 0; i < x.params.size(); ++i)
                    if (!env.names_match(x.params[i], y.params[i])) return false;
                env.rec[x.var_id] = y.var_id;
                bool ok = alpha_eq(x.body, y.body, env);
                env.rec.erase(x.var_id);
                return ok;
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                auto it = env.rec.find(x.var_id);
                std::uint64_t want = it == env.rec.end() ? x.var_id : it->second;
                if (want != y.var_id || x.args.size() != y.args.size()) return false;
                for (std::size_t i = 0; i < x.args.size(); ++i)
                    if (!env.names_match(x.args[i], y.args[i])) return false;
                return true;
            } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                return env.names_match(x.subj, y.subj);
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                return env.names_match(x.subj, y.subj) && alpha_eq(x.body, y.body, env);
            } else if constexpr (std::is_same_v<T, PClientReq>) {
                return env.names_match(x.subj, y.subj) && env.names_match(x.payload, y.payload);
            } else if constexpr (std::is_same_v<T, PServer>) {
                return env.names_match(x.subj, y.subj) &&
                       alpha_eq_bind(x.body, y.body, env, {{x.payload, y.payload}});
            }
        },
        a->node);
}

}  // namespace

bool alpha_equal(const ProcPtr& a, const ProcPtr& b) {
    AlphaEnv env;
    return alpha_eq(a, b, env);
}

std::optional<std::string> find_uncontractive(const ProcPtr& p) {
    // Reject mu X1(..); ...; mu Xn(..); call Xk(..) with Xk among the chain.
    std::function<std::optional<std::string>(const ProcPtr&, std::set<std::uint64_t>)> chain =
        [&](const ProcPtr& q, std::set<std::uint64_t> binders) -> std::optional<std::string> {
        if (auto* d = std::get_if<PRecDef>(&q->node)) {
            binders.insert(d->var_id);
            if (auto* c = std::get_if<PRecCall>(&d->body->node)) {
                if (binders.count(c->var_id)) return c->var;
            }
            return chain(d->body, std::move(binders));
        }
        return std::nullopt;
    };
    std::function<std::optional<std::string>(const ProcPtr&)> go =
        [&](const ProcPtr& q) -> std::optional<std::string> {
        if (std::holds_alternative<PRecDef>(q->node)) {
            if (auto bad = chain(q, {})) return bad;
        }
        return std::visit(
            [&](const auto& n) -> std::optional<std::string> {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, PInput>) return go(n.body);
                else if constexpr (std::is_same_v<T, PBranch>) {
                    for (auto& [l, b] : n.branches)
                        if (auto bad = go(b)) return bad;
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, PRestrict>) return go(n.body);
                else if constexpr (std::is_same_v<T, PPar>) {
                    if (auto bad = go(n.left)) return bad;
                    return go(n.right);
                } else if constexpr (std::is_same_v<T, PRecDef>) return go(n.body);
                else if constexpr (std::is_same_v<T, PEmptyIn>) return go(n.body);
                else if constexpr (std::is_same_v<T, PServer>) return go(n.body);
                else return std::nullopt;
            },
            q->node);
    };
    return go(p);
}

bool has_actions(const ProcPtr& p) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, POutput> || std::is_same_v<T, PSelect> ||
                          std::is_same_v<T, PFwd> || std::is_same_v<T, PEmptyOut> ||
                          std::is_same_v<T, PClientReq>)
                return true;
            else if constexpr (std::is_same_v<T, PInput> || std::is_same_v<T, PBranch> ||
                               std::is_same_v<T, PEmptyIn> || std::is_same_v<T, PServer>)
                return true;
            else if constexpr (std::is_same_v<T, PRestrict>) return has_actions(n.body);
            else if constexpr (std::is_same_v<T, PPar>) return has_actions(n.left) || has_actions(n.right);
            else if constexpr (std::is_same_v<T, PRecDef>) return has_actions(n.body);
            else return false;
        },
        p->node);
}

}  // namespace apcp
