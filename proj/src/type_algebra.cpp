#include "apcp/type_algebra.hpp"

#include <functional>

namespace apcp {

TypePtr dual(const TypePtr& a) {
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor>) return t_par(n.pr, dual(n.payload), dual(n.cont));
            else if constexpr (std::is_same_v<T, TPar>) return t_tensor(n.pr, dual(n.payload), dual(n.cont));
            else if constexpr (std::is_same_v<T, TPlus>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, dual(b));
                return t_with(n.pr, std::move(bs));
            } else if constexpr (std::is_same_v<T, TWith>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, dual(b));
                return t_plus(n.pr, std::move(bs));
            } else if constexpr (std::is_same_v<T, TBullet>) return a;
            else if constexpr (std::is_same_v<T, TMu>) return t_mu(n.var, n.var_id, dual(n.body));
            else if constexpr (std::is_same_v<T, TVarRef>) return a;
            else if constexpr (std::is_same_v<T, TOne>) return t_bot(n.pr);
            else if constexpr (std::is_same_v<T, TBot>) return t_one(n.pr);
            else if constexpr (std::is_same_v<T, TQuery>) return t_bang(n.pr, dual(n.payload));
            else if constexpr (std::is_same_v<T, TBang>) return t_query(n.pr, dual(n.payload));
            else
                throw std::invalid_argument("dual: metavariable outside inference engine");
        },
        a->node);
}

PriorityTerm priority(const TypePtr& a) {
    return std::visit(
        [&](const auto& n) -> PriorityTerm {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar> ||
                          std::is_same_v<T, TPlus> || std::is_same_v<T, TWith> ||
                          std::is_same_v<T, TOne> || std::is_same_v<T, TBot> ||
                          std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>)
                return n.pr;
            else if constexpr (std::is_same_v<T, TMu>) return priority(n.body);
            else if constexpr (std::is_same_v<T, TBullet> || std::is_same_v<T, TVarRef>)
                return PriorityTerm::make_omega();
            else
                throw std::invalid_argument("priority: metavariable outside inference engine");
        },
        a->node);
}

TypePtr lift(std::uint64_t t, const TypePtr& a) {
    if (t == 0) return a;
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor>)
                return t_tensor(n.pr.shifted(t), lift(t, n.payload), lift(t, n.cont));
            else if constexpr (std::is_same_v<T, TPar>)
                return t_par(n.pr.shifted(t), lift(t, n.payload), lift(t, n.cont));
            else if constexpr (std::is_same_v<T, TPlus>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, lift(t, b));
                return t_plus(n.pr.shifted(t), std::move(bs), n.row_open);
            } else if constexpr (std::is_same_v<T, TWith>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, lift(t, b));
                return t_with(n.pr.shifted(t), std::move(bs));
            } else if constexpr (std::is_same_v<T, TBullet> || std::is_same_v<T, TVarRef>)
                return a;
            else if constexpr (std::is_same_v<T, TMu>)
                return t_mu(n.var, n.var_id, lift(t, n.body));
            else if constexpr (std::is_same_v<T, TOne>) return t_one(n.pr.shifted(t));
            else if constexpr (std::is_same_v<T, TBot>) return t_bot(n.pr.shifted(t));
            else if constexpr (std::is_same_v<T, TQuery>) return t_query(n.pr.shifted(t), lift(t, n.payload));
            else if constexpr (std::is_same_v<T, TBang>) return t_bang(n.pr.shifted(t), lift(t, n.payload));
            else
                throw std::invalid_argument("lift: metavariable outside inference engine");
        },
        a->node);
}

TypePtr subst_tvar(const TypePtr& a, std::uint64_t var_id, const TypePtr& replacement) {
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TTensor>)
                return t_tensor(n.pr, subst_tvar(n.payload, var_id, replacement),
                                subst_tvar(n.cont, var_id, replacement));
            else if constexpr (std::is_same_v<T, TPar>)
                return t_par(n.pr, subst_tvar(n.payload, var_id, replacement),
                             subst_tvar(n.cont, var_id, replacement));
            else if constexpr (std::is_same_v<T, TPlus>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, subst_tvar(b, var_id, replacement));
                return t_plus(n.pr, std::move(bs), n.row_open);
            } else if constexpr (std::is_same_v<T, TWith>) {
                std::map<std::string, TypePtr> bs;
                for (auto& [l, b] : n.branches) bs.emplace(l, subst_tvar(b, var_id, replacement));
                return t_with(n.pr, std::move(bs));
            } else if constexpr (std::is_same_v<T, TMu>) {
                if (n.var_id == var_id) return a;  // shadowed
                return t_mu(n.var, n.var_id, subst_tvar(n.body, var_id, replacement));
            } else if constexpr (std::is_same_v<T, TVarRef>) {
                return n.var_id == var_id ? replacement : a;
            } else if constexpr (std::is_same_v<T, TQuery>)
                return t_query(n.pr, subst_tvar(n.payload, var_id, replacement));
            else if constexpr (std::is_same_v<T, TBang>)
                return t_bang(n.pr, subst_tvar(n.payload, var_id, replacement));
            else
                return a;
        },
        a->node);
}

TypePtr unfold_type(const TypePtr& m, std::uint64_t t) {
    auto* mu = std::get_if<TMu>(&m->node);
    if (!mu) throw std::invalid_argument("unfold_type: not a recursive type");
    return subst_tvar(mu->body, mu->var_id, lift(t, m));
}

namespace {

bool teq(const TypePtr& a, const TypePtr& b, std::map<std::uint64_t, std::uint64_t>& mu_env,
         bool with_priorities) {
    if (a->node.index() != b->node.index()) return false;
    auto pr_eq = [&](const PriorityTerm& x, const PriorityTerm& y) {
        return !with_priorities || x == y;
    };
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>) {
                return pr_eq(x.pr, y.pr) && teq(x.payload, y.payload, mu_env, with_priorities) &&
                       teq(x.cont, y.cont, mu_env, with_priorities);
            } else if constexpr (std::is_same_v<T, TPlus>) {
                if (!pr_eq(x.pr, y.pr) || x.row_open != y.row_open ||
                    x.branches.size() != y.branches.size())
                    return false;
                for (auto& [l, tb] : x.branches) {
                    auto it = y.branches.find(l);
                    if (it == y.branches.end() || !teq(tb, it->second, mu_env, with_priorities))
                        return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, TWith>) {
                if (!pr_eq(x.pr, y.pr) || x.branches.size() != y.branches.size()) return false;
                for (auto& [l, tb] : x.branches) {
                    auto it = y.branches.find(l);
                    if (it == y.branches.end() || !teq(tb, it->second, mu_env, with_priorities))
                        return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, TBullet>) {
                return true;
            } else if constexpr (std::is_same_v<T, TMu>) {
                mu_env[x.var_id] = y.var_id;
                bool ok = teq(x.body, y.body, mu_env, with_priorities);
                mu_env.erase(x.var_id);
                return ok;
            } else if constexpr (std::is_same_v<T, TVarRef>) {
                auto it = mu_env.find(x.var_id);
                return (it == mu_env.end() ? x.var_id : it->second) == y.var_id;
            } else if constexpr (std::is_same_v<T, TOne> || std::is_same_v<T, TBot>) {
                return pr_eq(x.pr, y.pr);
            } else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>) {
                return pr_eq(x.pr, y.pr) && teq(x.payload, y.payload, mu_env, with_priorities);
            } else if constexpr (std::is_same_v<T, TMeta>) {
                return x.id == y.id;
            }
        },
        a->node);
}

}  // namespace

bool type_equal(const TypePtr& a, const TypePtr& b) {
    std::map<std::uint64_t, std::uint64_t> env;
    return teq(a, b, env, true);
}

bool type_shape_equal(const TypePtr& a, const TypePtr& b) {
    std::map<std::uint64_t, std::uint64_t> env;
    return teq(a, b, env, false);
}

bool type_contractive(const TypePtr& a) {
    std::function<bool(const TypePtr&, std::set<std::uint64_t>)> chain_ok =
        [&](const TypePtr& t, std::set<std::uint64_t> binders) -> bool {
        if (auto* mu = std::get_if<TMu>(&t->node)) {
            binders.insert(mu->var_id);
            if (auto* v = std::get_if<TVarRef>(&mu->body->node))
                if (binders.count(v->var_id)) return false;
            return chain_ok(mu->body, std::move(binders));
        }
        return true;
    };
    std::function<bool(const TypePtr&)> go = [&](const TypePtr& t) -> bool {
        if (std::holds_alternative<TMu>(t->node) && !chain_ok(t, {})) return false;
        return std::visit(
            [&](const auto& n) -> bool {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>)
                    return go(n.payload) && go(n.cont);
                else if constexpr (std::is_same_v<T, TPlus> || std::is_same_v<T, TWith>) {
                    for (auto& [l, b] : n.branches)
                        if (!go(b)) return false;
                    return true;
                } else if constexpr (std::is_same_v<T, TMu>) return go(n.body);
                else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>)
                    return go(n.payload);
                else return true;
            },
            t->node);
    };
    return go(a);
}

bool type_has_unresolved(const TypePtr& a) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, TMeta>) return true;
            else if constexpr (std::is_same_v<T, TTensor> || std::is_same_v<T, TPar>)
                return type_has_unresolved(n.payload) || type_has_unresolved(n.cont);
            else if constexpr (std::is_same_v<T, TPlus>) {
                if (n.row_open) return true;
                for (auto& [l, b] : n.branches)
                    if (type_has_unresolved(b)) return true;
                return false;
            } else if constexpr (std::is_same_v<T, TWith>) {
                for (auto& [l, b] : n.branches)
                    if (type_has_unresolved(b)) return true;
                return false;
            } else if constexpr (std::is_same_v<T, TMu>) return type_has_unresolved(n.body);
            else if constexpr (std::is_same_v<T, TQuery> || std::is_same_v<T, TBang>)
                return type_has_unresolved(n.payload);
            else return false;
        },
        a->node);
}

}  // namespace apcp
