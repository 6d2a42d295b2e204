#include "apcp/semantics.hpp"

#include "apcp/syntax.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace apcp {

namespace {

// A flattened restriction/parallel level.
struct Level {
    std::vector<std::pair<Name, Name>> pairs;
    std::vector<ProcPtr> comps;
};

bool is_inact(const ProcPtr& p) { return std::holds_alternative<PInact>(p->node); }

void peel_into(const ProcPtr& p, Level& lv) {
    if (auto* r = std::get_if<PRestrict>(&p->node)) {
        lv.pairs.emplace_back(r->a, r->b);
        peel_into(r->body, lv);
        return;
    }
    if (auto* par = std::get_if<PPar>(&p->node)) {
        peel_into(par->left, lv);
        peel_into(par->right, lv);
        return;
    }
    if (is_inact(p)) return;
    lv.comps.push_back(p);
}

ProcPtr rebuild(const Level& lv) {
    ProcPtr body;
    if (lv.comps.empty()) {
        body = p_inact();
    } else {
        body = lv.comps.back();
        for (std::size_t i = lv.comps.size() - 1; i-- > 0;) body = p_par(lv.comps[i], body);
    }
    for (std::size_t i = lv.pairs.size(); i-- > 0;)
        body = p_restrict(lv.pairs[i].first, lv.pairs[i].second, body);
    return body;
}

// ---------------------------------------------------------------------------
// Canonical serialization. Bound names are numbered at first use in traversal
// order; free names keep their ids. Used for component sort keys (with the
// level's own binders abstracted or numbered) and for whole-state keys.

struct SerializeEnv {
    std::map<std::uint64_t, std::string> tokens;  // name id -> token
    std::map<std::uint64_t, std::string> recs;    // rec var id -> token
    std::size_t next = 0, next_rec = 0;
    bool abstract_unknown = false;  // unknown names become "?" instead of f<id>

    std::string name_tok(const Name& n) {
        auto it = tokens.find(n.id);
        if (it != tokens.end()) return it->second;
        return abstract_unknown ? "?" : "f" + std::to_string(n.id);
    }
    void bind_name(const Name& n) {
        tokens[n.id] = "b" + std::to_string(next++);
    }
    void unbind_name(const Name& n) { tokens.erase(n.id); }
    std::string rec_tok(std::uint64_t id) {
        auto it = recs.find(id);
        if (it != recs.end()) return it->second;
        return "R" + std::to_string(id);
    }
    void bind_rec(std::uint64_t id) { recs[id] = "r" + std::to_string(next_rec++); }
    void unbind_rec(std::uint64_t id) { recs.erase(id); }
};

void serialize(const ProcPtr& p, SerializeEnv& env, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            auto nm = [&](const Name& x) { out += env.name_tok(x); out += ' '; };
            if constexpr (std::is_same_v<T, POutput>) {
                out += "out ";
                nm(n.subj); nm(n.payload); nm(n.cont);
            } else if constexpr (std::is_same_v<T, PInput>) {
                out += "in ";
                nm(n.subj);
                env.bind_name(n.payload);
                env.bind_name(n.cont);
                out += "(";
                serialize(n.body, env, out);
                out += ")";
                env.unbind_name(n.payload);
                env.unbind_name(n.cont);
            } else if constexpr (std::is_same_v<T, PSelect>) {
                out += "sel ";
                nm(n.subj); nm(n.cont);
                out += n.label;
                out += ' ';
            } else if constexpr (std::is_same_v<T, PBranch>) {
                out += "bra ";
                nm(n.subj);
                env.bind_name(n.cont);
                out += "{";
                for (auto& [l, b] : n.branches) {
                    out += l;
                    out += ":(";
                    serialize(b, env, out);
                    out += ")";
                }
                out += "}";
                env.unbind_name(n.cont);
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                out += "nu ";
                env.bind_name(n.a);
                env.bind_name(n.b);
                out += env.name_tok(n.a);
                out += ' ';
                out += env.name_tok(n.b);
                out += " (";
                serialize(n.body, env, out);
                out += ")";
                env.unbind_name(n.a);
                env.unbind_name(n.b);
            } else if constexpr (std::is_same_v<T, PPar>) {
                out += "(";
                serialize(n.left, env, out);
                out += "|";
                serialize(n.right, env, out);
                out += ")";
            } else if constexpr (std::is_same_v<T, PInact>) {
                out += "0";
            } else if constexpr (std::is_same_v<T, PFwd>) {
                out += "fwd ";
                nm(n.a); nm(n.b);
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                out += "mu ";
                env.bind_rec(n.var_id);
                out += env.rec_tok(n.var_id);
                out += ' ';
                for (auto& x : n.params) nm(x);
                out += "(";
                serialize(n.body, env, out);
                out += ")";
                env.unbind_rec(n.var_id);
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                out += "call " + env.rec_tok(n.var_id) + " ";
                for (auto& x : n.args) nm(x);
            } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                out += "eout ";
                nm(n.subj);
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                out += "ein ";
                nm(n.subj);
                out += "(";
                serialize(n.body, env, out);
                out += ")";
            } else if constexpr (std::is_same_v<T, PClientReq>) {
                out += "req ";
                nm(n.subj); nm(n.payload);
            } else if constexpr (std::is_same_v<T, PServer>) {
                out += "srv ";
                nm(n.subj);
                env.bind_name(n.payload);
                out += "(";
                serialize(n.body, env, out);
                out += ")";
                env.unbind_name(n.payload);
            }
        },
        p->node);
}

std::string serialize_component(const ProcPtr& c, const SerializeEnv& base) {
    SerializeEnv env = base;
    std::string out;
    serialize(c, env, out);
    return out;
}

bool name_in(const Name& n, const std::set<Name>& s) { return s.count(n) > 0; }

// Per-component free-name sets, computed once per simplification pass.
struct FreeNameIndex {
    std::map<const Process*, std::set<Name>> memo;

    const std::set<Name>& of(const ProcPtr& p) {
        auto it = memo.find(p.get());
        if (it == memo.end()) it = memo.emplace(p.get(), free_names(p)).first;
        return it->second;
    }
    bool in_others(const Name& n, const std::vector<ProcPtr>& comps, std::size_t skip) {
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (i == skip) continue;
            if (of(comps[i]).count(n)) return true;
        }
        return false;
    }
    bool in_any(const Name& n, const std::vector<ProcPtr>& comps) {
        return in_others(n, comps, SIZE_MAX);
    }
};

// Rewrites a level to fixpoint: drop units, actionless loops, identity
// forwarders, unused restrictions, and (with extensions) unused servers.
void simplify_level(Level& lv, const SemOptions& opts) {
    // fwd x y == fwd y x: canonical argument order
    for (auto& c : lv.comps) {
        if (auto* f = std::get_if<PFwd>(&c->node))
            if (f->b < f->a) c = p_fwd(f->b, f->a);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        FreeNameIndex fn;
        // drop 0 components and actionless recursion loops
        for (std::size_t i = 0; i < lv.comps.size();) {
            const ProcPtr& c = lv.comps[i];
            bool drop = is_inact(c);
            if (!drop) {
                if (auto* d = std::get_if<PRecDef>(&c->node))
                    drop = !has_actions(d->body);
            }
            if (drop) {
                lv.comps.erase(lv.comps.begin() + i);
                changed = true;
            } else {
                ++i;
            }
        }
        // nu(x,y)(fwd x y | R) == R when x,y not free in R
        for (std::size_t i = 0; i < lv.comps.size(); ++i) {
            auto* f = std::get_if<PFwd>(&lv.comps[i]->node);
            if (!f) continue;
            for (std::size_t k = 0; k < lv.pairs.size(); ++k) {
                auto& [a, b] = lv.pairs[k];
                bool match = (f->a == a && f->b == b) || (f->a == b && f->b == a);
                if (!match) continue;
                if (!fn.in_others(a, lv.comps, i) && !fn.in_others(b, lv.comps, i)) {
                    lv.comps.erase(lv.comps.begin() + i);
                    lv.pairs.erase(lv.pairs.begin() + k);
                    changed = true;
                }
                break;
            }
            if (changed) break;
        }
        if (changed) continue;
        // nu(x,z)(!x(y);P | R) == R when x,z not free in R (extension cleanup)
        if (opts.extensions) {
            for (std::size_t i = 0; i < lv.comps.size() && !changed; ++i) {
                auto* s = std::get_if<PServer>(&lv.comps[i]->node);
                if (!s) continue;
                for (std::size_t k = 0; k < lv.pairs.size(); ++k) {
                    auto& [a, b] = lv.pairs[k];
                    if (!(s->subj == a || s->subj == b)) continue;
                    const Name& other = s->subj == a ? b : a;
                    if (!fn.in_others(other, lv.comps, i) && !fn.in_others(s->subj, lv.comps, i)) {
                        lv.comps.erase(lv.comps.begin() + i);
                        lv.pairs.erase(lv.pairs.begin() + k);
                        changed = true;
                    }
                    break;
                }
            }
            if (changed) continue;
        }
        // drop restrictions binding nothing
        for (std::size_t k = 0; k < lv.pairs.size();) {
            if (!fn.in_any(lv.pairs[k].first, lv.comps) && !fn.in_any(lv.pairs[k].second, lv.comps)) {
                lv.pairs.erase(lv.pairs.begin() + k);
                changed = true;
            } else {
                ++k;
            }
        }
    }
}

// Deterministic canonical order for components and restriction pairs.
void order_level(Level& lv) {
    // round 0: keys with the level's bound names abstracted
    SerializeEnv abs;
    abs.abstract_unknown = false;
    for (auto& [a, b] : lv.pairs) {
        abs.tokens[a.id] = "?";
        abs.tokens[b.id] = "?";
    }
    auto sort_by = [&](const SerializeEnv& env) {
        std::stable_sort(lv.comps.begin(), lv.comps.end(),
                         [&](const ProcPtr& l, const ProcPtr& r) {
                             return serialize_component(l, env) < serialize_component(r, env);
                         });
    };
    sort_by(abs);
    // refinement: number level binders by first occurrence in current order
    for (int round = 0; round < 2; ++round) {
        SerializeEnv env;
        std::size_t next = 0;
        std::map<std::uint64_t, std::string> assigned;
        std::function<void(const ProcPtr&)> visit_names = [&](const ProcPtr& c) {
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    auto touch = [&](const Name& x) {
                        bool is_level = false;
                        for (auto& [a, b] : lv.pairs)
                            if (a == x || b == x) is_level = true;
                        if (is_level && !assigned.count(x.id))
                            assigned[x.id] = "v" + std::to_string(next++);
                    };
                    if constexpr (std::is_same_v<T, POutput>) {
                        touch(n.subj); touch(n.payload); touch(n.cont);
                    } else if constexpr (std::is_same_v<T, PInput>) {
                        touch(n.subj); visit_names(n.body);
                    } else if constexpr (std::is_same_v<T, PSelect>) {
                        touch(n.subj); touch(n.cont);
                    } else if constexpr (std::is_same_v<T, PBranch>) {
                        touch(n.subj);
                        for (auto& [l, b] : n.branches) visit_names(b);
                    } else if constexpr (std::is_same_v<T, PRestrict>) {
                        visit_names(n.body);
                    } else if constexpr (std::is_same_v<T, PPar>) {
                        visit_names(n.left); visit_names(n.right);
                    } else if constexpr (std::is_same_v<T, PFwd>) {
                        touch(n.a); touch(n.b);
                    } else if constexpr (std::is_same_v<T, PRecDef>) {
                        for (auto& x : n.params) touch(x);
                        visit_names(n.body);
                    } else if constexpr (std::is_same_v<T, PRecCall>) {
                        for (auto& x : n.args) touch(x);
                    } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                        touch(n.subj);
                    } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                        touch(n.subj); visit_names(n.body);
                    } else if constexpr (std::is_same_v<T, PClientReq>) {
                        touch(n.subj); touch(n.payload);
                    } else if constexpr (std::is_same_v<T, PServer>) {
                        touch(n.subj); visit_names(n.body);
                    }
                },
                c->node);
        };
        for (auto& c : lv.comps) visit_names(c);
        env.tokens = assigned;
        sort_by(env);
    }
    // order pairs by first occurrence of either endpoint across comps,
    // endpoint seen first goes first in the pair
    std::map<std::uint64_t, std::size_t> first_use;
    std::size_t counter = 0;
    for (auto& c : lv.comps) {
        // walk names in traversal order
        std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    auto touch = [&](const Name& x) {
                        if (!first_use.count(x.id)) first_use[x.id] = counter++;
                    };
                    if constexpr (std::is_same_v<T, POutput>) {
                        touch(n.subj); touch(n.payload); touch(n.cont);
                    } else if constexpr (std::is_same_v<T, PInput>) {
                        touch(n.subj); walk(n.body);
                    } else if constexpr (std::is_same_v<T, PSelect>) {
                        touch(n.subj); touch(n.cont);
                    } else if constexpr (std::is_same_v<T, PBranch>) {
                        touch(n.subj);
                        for (auto& [l, b] : n.branches) walk(b);
                    } else if constexpr (std::is_same_v<T, PRestrict>) {
                        walk(n.body);
                    } else if constexpr (std::is_same_v<T, PPar>) {
                        walk(n.left); walk(n.right);
                    } else if constexpr (std::is_same_v<T, PFwd>) {
                        touch(n.a); touch(n.b);
                    } else if constexpr (std::is_same_v<T, PRecDef>) {
                        for (auto& x : n.params) touch(x);
                        walk(n.body);
                    } else if constexpr (std::is_same_v<T, PRecCall>) {
                        for (auto& x : n.args) touch(x);
                    } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                        touch(n.subj);
                    } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                        touch(n.subj); walk(n.body);
                    } else if constexpr (std::is_same_v<T, PClientReq>) {
                        touch(n.subj); touch(n.payload);
                    } else if constexpr (std::is_same_v<T, PServer>) {
                        touch(n.subj); walk(n.body);
                    }
                },
                q->node);
        };
        walk(c);
    }
    auto use_of = [&](const Name& n) {
        auto it = first_use.find(n.id);
        return it == first_use.end() ? SIZE_MAX : it->second;
    };
    for (auto& pr : lv.pairs)
        if (use_of(pr.second) < use_of(pr.first)) std::swap(pr.first, pr.second);
    std::stable_sort(lv.pairs.begin(), lv.pairs.end(),
                     [&](const std::pair<Name, Name>& a, const std::pair<Name, Name>& b) {
                         return std::min(use_of(a.first), use_of(a.second)) <
                                std::min(use_of(b.first), use_of(b.second));
                     });
}

ProcPtr normalize_rec(const ProcPtr& p, const SemOptions& opts);

// Normalize the components of one level in place.
void normalize_level(Level& lv, const SemOptions& opts) {
    // components may re-expose restrictions/parallel after their own rewrite
    std::vector<ProcPtr> work = std::move(lv.comps);
    lv.comps.clear();
    while (!work.empty()) {
        ProcPtr c = normalize_rec(work.front(), opts);
        work.erase(work.begin());
        if (is_inact(c)) continue;
        if (std::holds_alternative<PPar>(c->node) || std::holds_alternative<PRestrict>(c->node)) {
            Level sub;
            peel_into(c, sub);
            for (auto& pr : sub.pairs) lv.pairs.push_back(pr);
            for (auto& sc : sub.comps) work.push_back(sc);
            continue;
        }
        lv.comps.push_back(c);
    }
}

ProcPtr normalize_rec(const ProcPtr& p, const SemOptions& opts) {
    return std::visit(
        [&](const auto& n) -> ProcPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PInput>) {
                return p_input(n.subj, n.payload, n.cont, normalize_rec(n.body, opts));
            } else if constexpr (std::is_same_v<T, PBranch>) {
                std::map<std::string, ProcPtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, normalize_rec(b, opts));
                return p_branch(n.subj, n.cont, std::move(bs));
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                return p_recdef(n.var, n.var_id, n.params, normalize_rec(n.body, opts));
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                return p_empty_in(n.subj, normalize_rec(n.body, opts));
            } else if constexpr (std::is_same_v<T, PServer>) {
                return p_server(n.subj, n.payload, normalize_rec(n.body, opts));
            } else if constexpr (std::is_same_v<T, PPar> || std::is_same_v<T, PRestrict>) {
                Level lv;
                peel_into(p, lv);
                normalize_level(lv, opts);
                simplify_level(lv, opts);
                order_level(lv);
                if (lv.pairs.empty() && lv.comps.size() == 1) return lv.comps[0];
                return rebuild(lv);
            } else {
                return p;
            }
        },
        p->node);
}

}  // namespace

ProcPtr normalize(const ProcPtr& p, const SemOptions& opts) {
    // top level is always treated as a level, even for single components
    Level lv;
    peel_into(p, lv);
    normalize_level(lv, opts);
    simplify_level(lv, opts);
    order_level(lv);
    if (lv.pairs.empty() && lv.comps.size() == 1) return lv.comps[0];
    return rebuild(lv);
}

std::string state_key(const ProcPtr& normalized) {
    SerializeEnv env;
    // bind free names stably by id
    std::string out;
    serialize(normalized, env, out);
    return out;
}

// ---------------------------------------------------------------------------
// Recursion unfolding

namespace {

ProcPtr rename_rec_var(const ProcPtr& p, std::uint64_t from, std::uint64_t to) {
    return std::visit(
        [&](const auto& n) -> ProcPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PInput>)
                return p_input(n.subj, n.payload, n.cont, rename_rec_var(n.body, from, to));
            else if constexpr (std::is_same_v<T, PBranch>) {
                std::map<std::string, ProcPtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, rename_rec_var(b, from, to));
                return p_branch(n.subj, n.cont, std::move(bs));
            } else if constexpr (std::is_same_v<T, PRestrict>)
                return p_restrict(n.a, n.b, rename_rec_var(n.body, from, to));
            else if constexpr (std::is_same_v<T, PPar>)
                return p_par(rename_rec_var(n.left, from, to), rename_rec_var(n.right, from, to));
            else if constexpr (std::is_same_v<T, PRecDef>) {
                if (n.var_id == from) return p;  // shadowed (cannot happen with unique ids)
                return p_recdef(n.var, n.var_id, n.params, rename_rec_var(n.body, from, to));
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                if (n.var_id == from) return p_reccall(n.var, to, n.args);
                return p;
            } else if constexpr (std::is_same_v<T, PEmptyIn>)
                return p_empty_in(n.subj, rename_rec_var(n.body, from, to));
            else if constexpr (std::is_same_v<T, PServer>)
                return p_server(n.subj, n.payload, rename_rec_var(n.body, from, to));
            else
                return p;
        },
        p->node);
}

ProcPtr replace_calls(const ProcPtr& p, std::uint64_t var_id,
                      const std::function<ProcPtr(const std::vector<Name>&)>& mk) {
    return std::visit(
        [&](const auto& n) -> ProcPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PInput>)
                return p_input(n.subj, n.payload, n.cont, replace_calls(n.body, var_id, mk));
            else if constexpr (std::is_same_v<T, PBranch>) {
                std::map<std::string, ProcPtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, replace_calls(b, var_id, mk));
                return p_branch(n.subj, n.cont, std::move(bs));
            } else if constexpr (std::is_same_v<T, PRestrict>)
                return p_restrict(n.a, n.b, replace_calls(n.body, var_id, mk));
            else if constexpr (std::is_same_v<T, PPar>)
                return p_par(replace_calls(n.left, var_id, mk), replace_calls(n.right, var_id, mk));
            else if constexpr (std::is_same_v<T, PRecDef>)
                return p_recdef(n.var, n.var_id, n.params, replace_calls(n.body, var_id, mk));
            else if constexpr (std::is_same_v<T, PRecCall>) {
                if (n.var_id == var_id) return mk(n.args);
                return p;
            } else if constexpr (std::is_same_v<T, PEmptyIn>)
                return p_empty_in(n.subj, replace_calls(n.body, var_id, mk));
            else if constexpr (std::is_same_v<T, PServer>)
                return p_server(n.subj, n.payload, replace_calls(n.body, var_id, mk));
            else
                return p;
        },
        p->node);
}

}  // namespace

ProcPtr unfold_rec(const ProcPtr& recdef) {
    auto* d = std::get_if<PRecDef>(&recdef->node);
    if (!d) throw std::invalid_argument("unfold_rec: not a recursive definition");
    auto mk_copy = [&](const std::vector<Name>& args) -> ProcPtr {
        if (args.size() != d->params.size())
            throw std::invalid_argument("recursion arity mismatch on " + d->var + ": definition has " +
                                        std::to_string(d->params.size()) + " endpoints, call has " +
                                        std::to_string(args.size()));
        ProcPtr body = refresh_binders(d->body);
        std::map<std::uint64_t, Name> sub;
        for (std::size_t i = 0; i < args.size(); ++i) sub[d->params[i].id] = args[i];
        body = substitute(body, sub);
        std::uint64_t vid = fresh_id();
        body = rename_rec_var(body, d->var_id, vid);
        return p_recdef(d->var, vid, args, body);
    };
    return replace_calls(d->body, d->var_id, mk_copy);
}

ProcPtr expose(const ProcPtr& p, const SemOptions& opts) {
    ProcPtr q = normalize(p, opts);
    for (int pass = 0; pass < 8; ++pass) {
        Level lv;
        peel_into(q, lv);
        bool any = false;
        for (auto& c : lv.comps) {
            if (std::holds_alternative<PRecDef>(c->node)) {
                c = unfold_rec(c);
                any = true;
            }
        }
        if (!any) break;
        q = normalize(rebuild(lv), opts);
    }
    return q;
}

Exposed expose_keyed(const ProcPtr& p, const SemOptions& opts) {
    ProcPtr e = expose(p, opts);
    std::string k = state_key(e);
    return {std::move(e), std::move(k)};
}

// ---------------------------------------------------------------------------
// Redexes and reduction

const char* rule_tag_name(RuleTag t) {
    switch (t) {
        case RuleTag::BetaId: return "beta_id";
        case RuleTag::BetaTensorPar: return "beta_tensor_par";
        case RuleTag::BetaPlusWith: return "beta_plus_with";
        case RuleTag::BetaOneBot: return "beta_one_bot";
        case RuleTag::BetaQueryBang: return "beta_query_bang";
        case RuleTag::KappaPar: return "kappa_par";
        case RuleTag::KappaWith: return "kappa_with";
        case RuleTag::KappaBot: return "kappa_bot";
        case RuleTag::KappaBang: return "kappa_bang";
    }
    return "?";
}

bool is_beta(RuleTag t) {
    switch (t) {
        case RuleTag::BetaId:
        case RuleTag::BetaTensorPar:
        case RuleTag::BetaPlusWith:
        case RuleTag::BetaOneBot:
        case RuleTag::BetaQueryBang: return true;
        default: return false;
    }
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::ReachedInaction: return "reached_inaction";
        case Outcome::Stuck: return "stuck";
        case Outcome::FuelExhausted: return "fuel_exhausted";
    }
    return "?";
}

namespace {

int rule_rank(RuleTag t) {
    switch (t) {
        case RuleTag::BetaId: return 0;
        case RuleTag::BetaTensorPar: return 1;
        case RuleTag::BetaPlusWith: return 2;
        case RuleTag::BetaOneBot: return 3;
        case RuleTag::BetaQueryBang: return 4;
        case RuleTag::KappaPar: return 10;
        case RuleTag::KappaWith: return 11;
        case RuleTag::KappaBot: return 12;
        case RuleTag::KappaBang: return 13;
    }
    return 99;
}

struct PairIndex {
    std::map<std::uint64_t, std::pair<std::size_t, Name>> partner;  // id -> (pair idx, other end)

    explicit PairIndex(const Level& lv) {
        for (std::size_t k = 0; k < lv.pairs.size(); ++k) {
            partner[lv.pairs[k].first.id] = {k, lv.pairs[k].second};
            partner[lv.pairs[k].second.id] = {k, lv.pairs[k].first};
        }
    }
    const Name* other(const Name& n) const {
        auto it = partner.find(n.id);
        return it == partner.end() ? nullptr : &it->second.second;
    }
};

}  // namespace

std::vector<Redex> find_redexes(const ProcPtr& p, bool include_kappa, const SemOptions& opts) {
    return find_redexes(expose_keyed(p, opts), include_kappa, opts);
}

std::vector<Redex> find_redexes(const Exposed& ex, bool include_kappa, const SemOptions& opts) {
    const ProcPtr& e = ex.proc;
    const std::string& key = ex.key;
    Level lv;
    peel_into(e, lv);
    PairIndex pairs(lv);
    std::vector<Redex> out;

    // index components by subject for the paired rules
    for (std::size_t i = 0; i < lv.comps.size(); ++i) {
        const ProcPtr& ci = lv.comps[i];
        if (auto* f = std::get_if<PFwd>(&ci->node)) {
            // nu(y,z)(fwd x y | P) -> P{x/z}, with z,y != x
            auto try_end = [&](const Name& y, const Name& x) {
                const Name* z = pairs.other(y);
                if (!z) return;
                if (x == y || x == *z) return;
                out.push_back({RuleTag::BetaId, x, y, i, i, "", key});
            };
            if (!(f->a == f->b)) {
                try_end(f->a, f->b);
                try_end(f->b, f->a);
            }
            continue;
        }
        auto* outp = std::get_if<POutput>(&ci->node);
        auto* sel = std::get_if<PSelect>(&ci->node);
        auto* eout = std::get_if<PEmptyOut>(&ci->node);
        auto* req = std::get_if<PClientReq>(&ci->node);
        if (!outp && !sel && !eout && !req) continue;
        Name subj = outp ? outp->subj : sel ? sel->subj : eout ? eout->subj : req->subj;
        const Name* dual_end = pairs.other(subj);
        if (!dual_end) continue;
        for (std::size_t j = 0; j < lv.comps.size(); ++j) {
            if (j == i) continue;
            const ProcPtr& cj = lv.comps[j];
            if (outp) {
                if (auto* in = std::get_if<PInput>(&cj->node); in && in->subj == *dual_end)
                    out.push_back({RuleTag::BetaTensorPar, subj, *dual_end, i, j, "", key});
            } else if (sel) {
                if (auto* br = std::get_if<PBranch>(&cj->node);
                    br && br->subj == *dual_end && br->branches.count(sel->label))
                    out.push_back({RuleTag::BetaPlusWith, subj, *dual_end, i, j, sel->label, key});
            } else if (eout && opts.extensions) {
                if (auto* ein = std::get_if<PEmptyIn>(&cj->node); ein && ein->subj == *dual_end)
                    out.push_back({RuleTag::BetaOneBot, subj, *dual_end, i, j, "", key});
            } else if (req && opts.extensions) {
                if (auto* srv = std::get_if<PServer>(&cj->node); srv && srv->subj == *dual_end)
                    out.push_back({RuleTag::BetaQueryBang, subj, *dual_end, i, j, "", key});
            }
        }
    }

    if (include_kappa && (lv.pairs.size() >= 1 || lv.comps.size() >= 2)) {
        std::set<Name> free = free_names(e);
        for (std::size_t i = 0; i < lv.comps.size(); ++i) {
            const ProcPtr& ci = lv.comps[i];
            RuleTag tag;
            Name subj;
            if (auto* in = std::get_if<PInput>(&ci->node)) {
                tag = RuleTag::KappaPar;
                subj = in->subj;
            } else if (auto* br = std::get_if<PBranch>(&ci->node)) {
                tag = RuleTag::KappaWith;
                subj = br->subj;
            } else if (auto* ein = std::get_if<PEmptyIn>(&ci->node)) {
                if (!opts.extensions) continue;
                tag = RuleTag::KappaBot;
                subj = ein->subj;
            } else if (auto* srv = std::get_if<PServer>(&ci->node)) {
                if (!opts.extensions) continue;
                tag = RuleTag::KappaBang;
                subj = srv->subj;
            } else {
                continue;
            }
            if (!free.count(subj)) continue;
            if (lv.pairs.empty() && lv.comps.size() < 2) continue;
            out.push_back({tag, subj, subj, i, i, "", key});
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const Redex& a, const Redex& b) {
        auto ka = std::tuple(rule_rank(a.rule), a.comp_a, a.comp_b, a.x.id);
        auto kb = std::tuple(rule_rank(b.rule), b.comp_a, b.comp_b, b.x.id);
        return ka < kb;
    });
    return out;
}

ProcPtr step(const ProcPtr& p, const Redex& r, const SemOptions& opts) {
    return step(expose_keyed(p, opts), r, opts);
}

ProcPtr step(const Exposed& ex, const Redex& r, const SemOptions& opts) {
    const ProcPtr& e = ex.proc;
    if (ex.key != r.key) throw StaleRedex();
    Level lv;
    peel_into(e, lv);

    auto take = [&](std::size_t idx) -> ProcPtr {
        if (idx >= lv.comps.size()) throw StaleRedex();
        return lv.comps[idx];
    };

    switch (r.rule) {
        case RuleTag::BetaId: {
            ProcPtr fc = take(r.comp_a);
            auto* f = std::get_if<PFwd>(&fc->node);
            if (!f) throw StaleRedex();
            // r.x is the surviving end, r.y the forwarder end bound by a pair
            PairIndex pairs(lv);
            const Name* z = pairs.other(r.y);
            if (!z) throw StaleRedex();
            Name zz = *z;
            lv.comps.erase(lv.comps.begin() + r.comp_a);
            for (auto& c : lv.comps) c = substitute(c, {{zz.id, r.x}});
            return normalize(rebuild(lv), opts);
        }
        case RuleTag::BetaTensorPar: {
            auto* o = std::get_if<POutput>(&take(r.comp_a)->node);
            auto* in = std::get_if<PInput>(&take(r.comp_b)->node);
            if (!o || !in) throw StaleRedex();
            ProcPtr cont = substitute(in->body, {{in->payload.id, o->payload}, {in->cont.id, o->cont}});
            std::vector<ProcPtr> comps;
            for (std::size_t k = 0; k < lv.comps.size(); ++k)
                if (k != r.comp_a && k != r.comp_b) comps.push_back(lv.comps[k]);
            comps.push_back(cont);
            lv.comps = std::move(comps);
            return normalize(rebuild(lv), opts);
        }
        case RuleTag::BetaPlusWith: {
            auto* s = std::get_if<PSelect>(&take(r.comp_a)->node);
            auto* br = std::get_if<PBranch>(&take(r.comp_b)->node);
            if (!s || !br) throw StaleRedex();
            auto it = br->branches.find(s->label);
            if (it == br->branches.end()) throw StaleRedex();
            ProcPtr cont = substitute(it->second, {{br->cont.id, s->cont}});
            std::vector<ProcPtr> comps;
            for (std::size_t k = 0; k < lv.comps.size(); ++k)
                if (k != r.comp_a && k != r.comp_b) comps.push_back(lv.comps[k]);
            comps.push_back(cont);
            lv.comps = std::move(comps);
            return normalize(rebuild(lv), opts);
        }
        case RuleTag::BetaOneBot: {
            auto* eo = std::get_if<PEmptyOut>(&take(r.comp_a)->node);
            auto* ei = std::get_if<PEmptyIn>(&take(r.comp_b)->node);
            if (!eo || !ei) throw StaleRedex();
            std::vector<ProcPtr> comps;
            for (std::size_t k = 0; k < lv.comps.size(); ++k)
                if (k != r.comp_a && k != r.comp_b) comps.push_back(lv.comps[k]);
            comps.push_back(ei->body);
            lv.comps = std::move(comps);
            return normalize(rebuild(lv), opts);
        }
        case RuleTag::BetaQueryBang: {
            auto* rq = std::get_if<PClientReq>(&take(r.comp_a)->node);
            auto* srv = std::get_if<PServer>(&take(r.comp_b)->node);
            if (!rq || !srv) throw StaleRedex();
            ProcPtr copy = substitute(refresh_binders(srv->body), {{srv->payload.id, rq->payload}});
            std::vector<ProcPtr> comps;
            for (std::size_t k = 0; k < lv.comps.size(); ++k)
                if (k != r.comp_a) comps.push_back(lv.comps[k]);  // server stays
            comps.push_back(copy);
            lv.comps = std::move(comps);
            return normalize(rebuild(lv), opts);
        }
        case RuleTag::KappaPar:
        case RuleTag::KappaWith:
        case RuleTag::KappaBot:
        case RuleTag::KappaBang: {
            ProcPtr prefix = take(r.comp_a);
            std::vector<ProcPtr> rest;
            for (std::size_t k = 0; k < lv.comps.size(); ++k)
                if (k != r.comp_a) rest.push_back(lv.comps[k]);
            auto wrap = [&](const ProcPtr& inner_body) {
                Level inner{lv.pairs, rest};
                inner.comps.push_back(inner_body);
                return rebuild(inner);
            };
            if (auto* in = std::get_if<PInput>(&prefix->node))
                return p_input(in->subj, in->payload, in->cont, normalize(wrap(in->body), opts));
            if (auto* br = std::get_if<PBranch>(&prefix->node)) {
                std::map<std::string, ProcPtr> bs;
                for (auto& [l, b] : br->branches) {
                    Level inner{lv.pairs, rest};
                    inner.comps.push_back(b);
                    // each branch duplicates the context; refresh its binders
                    ProcPtr dup = bs.empty() ? rebuild(inner) : refresh_binders(rebuild(inner));
                    bs.emplace(l, normalize(dup, opts));
                }
                return p_branch(br->subj, br->cont, std::move(bs));
            }
            if (auto* ei = std::get_if<PEmptyIn>(&prefix->node))
                return p_empty_in(ei->subj, normalize(wrap(ei->body), opts));
            if (auto* srv = std::get_if<PServer>(&prefix->node))
                return p_server(srv->subj, srv->payload, normalize(wrap(srv->body), opts));
            throw StaleRedex();
        }
    }
    throw StaleRedex();
}

Trace run(const ProcPtr& p, const RunPolicy& policy, std::size_t fuel, bool include_kappa,
          const SemOptions& opts) {
    Trace t;
    ProcPtr cur = normalize(p, opts);
    t.initial = cur;
    std::mt19937_64 rng(policy.seed);
    for (std::size_t i = 0; i < fuel; ++i) {
        Exposed ex = expose_keyed(cur, opts);
        auto rs = find_redexes(ex, include_kappa, opts);
        if (rs.empty()) {
            t.outcome = is_inact(cur) ? Outcome::ReachedInaction : Outcome::Stuck;
            return t;
        }
        const Redex& r = policy.deterministic
                             ? rs[0]
                             : rs[std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(rng)];
        cur = step(ex, r, opts);
        t.steps.push_back({r, cur});
    }
    // out of fuel; report inaction if we happen to be there
    t.outcome = is_inact(normalize(cur, opts)) ? Outcome::ReachedInaction : Outcome::FuelExhausted;
    return t;
}

std::vector<std::string> trace_records(const Trace& t) {
    std::vector<std::string> out;
    {
        nlohmann::json j;
        j["record"] = "initial";
        j["process"] = print_process(t.initial);
        out.push_back(j.dump());
    }
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const TraceStep& s = t.steps[i];
        nlohmann::json j;
        j["record"] = "step";
        j["step"] = i + 1;
        j["rule"] = rule_tag_name(s.redex.rule);
        j["endpoints"] = {s.redex.x.ident, s.redex.y.ident};
        if (!s.redex.label.empty()) j["label"] = s.redex.label;
        j["process"] = print_process(s.result);
        out.push_back(j.dump());
    }
    {
        nlohmann::json j;
        j["record"] = "summary";
        j["outcome"] = outcome_name(t.outcome);
        j["steps"] = t.steps.size();
        out.push_back(j.dump());
    }
    return out;
}

std::set<Name> active_names(const ProcPtr& p) {
    return std::visit(
        [&](const auto& n) -> std::set<Name> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, POutput> || std::is_same_v<T, PInput> ||
                          std::is_same_v<T, PSelect> || std::is_same_v<T, PBranch> ||
                          std::is_same_v<T, PEmptyOut> || std::is_same_v<T, PEmptyIn> ||
                          std::is_same_v<T, PClientReq> || std::is_same_v<T, PServer>) {
                return {n.subj};
            } else if constexpr (std::is_same_v<T, PFwd>) {
                return {n.a, n.b};
            } else if constexpr (std::is_same_v<T, PPar>) {
                auto l = active_names(n.left);
                auto r = active_names(n.right);
                l.insert(r.begin(), r.end());
                return l;
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                auto s = active_names(n.body);
                s.erase(n.a);
                s.erase(n.b);
                return s;
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                return active_names(n.body);
            } else {
                return {};
            }
        },
        p->node);
}

bool is_live(const ProcPtr& p) {
    ProcPtr e = normalize(p, {});
    Level lv;
    peel_into(e, lv);
    std::set<Name> an;
    for (auto& c : lv.comps) {
        auto s = active_names(c);
        an.insert(s.begin(), s.end());
    }
    for (auto& [a, b] : lv.pairs)
        if (an.count(a) && an.count(b)) return true;
    return false;
}

std::size_t component_count(const ProcPtr& p, const SemOptions& opts) {
    Level lv;
    peel_into(normalize(p, opts), lv);
    return lv.comps.size();
}

ExploreResult explore(const ProcPtr& p, std::size_t max_states, bool include_kappa,
                      const SemOptions& opts) {
    ExploreResult res;
    std::set<std::string> seen;
    std::deque<std::pair<ProcPtr, Exposed>> queue;
    ProcPtr init = normalize(p, opts);
    Exposed ie = expose_keyed(init, opts);
    seen.insert(ie.key);
    queue.emplace_back(init, std::move(ie));
    res.complete = true;
    while (!queue.empty()) {
        auto [cur, ex] = std::move(queue.front());
        queue.pop_front();
        ++res.states;
        auto rs = find_redexes(ex, include_kappa, opts);
        if (rs.empty() && !is_inact(cur)) res.stuck.push_back(cur);
        for (auto& r : rs) {
            ProcPtr next = step(ex, r, opts);
            ++res.transitions;
            Exposed ne = expose_keyed(next, opts);
            if (seen.count(ne.key)) continue;
            if (seen.size() >= max_states) {
                res.complete = false;
                continue;
            }
            seen.insert(ne.key);
            queue.emplace_back(next, std::move(ne));
        }
    }
    return res;
}

}  // namespace apcp
