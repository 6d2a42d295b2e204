#include "apcp/ast.hpp"
#include "apcp/type_algebra.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace apcp;
using namespace apcp::testing;

TEST_CASE("free names of the basic constructors") {
    Name x = fresh_name("x"), y = fresh_name("y"), z = fresh_name("z");
    CHECK(free_names(p_output(x, y, z)) == std::set<Name>{x, y, z});
    CHECK(free_names(p_inact()).empty());
    CHECK(free_names(p_restrict(x, y, p_fwd(x, y))).empty());
    CHECK(free_names(p_fwd(x, y)) == std::set<Name>{x, y});
    // input binds payload and continuation
    ProcPtr in = p_input(x, y, z, p_output(y, z, z));
    CHECK(free_names(in) == std::set<Name>{x});
    // recursion parameters are free occurrences
    std::uint64_t v = fresh_id();
    ProcPtr def = p_recdef("X", v, {x}, p_reccall("X", v, {x}));
    CHECK(free_names(def) == std::set<Name>{x});
}

TEST_CASE("free names agree with the two-pass oracle on random terms") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        ProcGen g(seed);
        ProcPtr p = g.proc(4);
        CHECK(ids_of(free_names(p)) == free_names_oracle(p));
    }
}

TEST_CASE("substitution rewrites free occurrences only") {
    Name x = fresh_name("x"), y = fresh_name("y"), w = fresh_name("w");
    ProcPtr f = p_fwd(x, y);
    ProcPtr r = substitute(f, {{y.id, w}});
    CHECK(alpha_equal(r, p_fwd(x, w)));

    // bound names shadow: substituting for a bound id does nothing visible
    Name a = fresh_name("a"), b = fresh_name("b"), yb = fresh_name("y");
    ProcPtr in = p_input(x, yb, b, p_output(yb, a, a));
    ProcPtr s = substitute(in, {{a.id, yb}});
    // the free a becomes the (distinct) name y; the binder stays intact
    auto fns = free_names(s);
    CHECK(fns.count(yb));
    CHECK(!fns.count(a));
}

TEST_CASE("substitution matches the alpha-refresh oracle on random terms") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        ProcGen g(seed);
        ProcPtr p = g.proc(4);
        Name from = g.scope[seed % g.scope.size()];
        Name to = g.scope[(seed + 1) % g.scope.size()];
        std::map<std::uint64_t, Name> sub{{from.id, to}};
        CHECK(alpha_equal(substitute(p, sub), substitute_oracle(p, sub)));
    }
}

TEST_CASE("substitution with the identity map is alpha-identity") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ProcGen g(seed);
        ProcPtr p = g.proc(4);
        std::map<std::uint64_t, Name> id_map;
        for (auto& n : free_names(p)) id_map[n.id] = n;
        CHECK(alpha_equal(substitute(p, id_map), p));
    }
}

TEST_CASE("simultaneous substitution is not sequential") {
    // p{a/v, b/z} must substitute both at once
    Name v = fresh_name("v"), z = fresh_name("z"), a = fresh_name("a"), b = fresh_name("b");
    ProcPtr p = p_output(v, z, z);
    ProcPtr r = substitute(p, {{v.id, z}, {z.id, a}});
    CHECK(alpha_equal(r, p_output(z, a, a)));
}

TEST_CASE("duality on each connective") {
    TypePtr A = t_bullet(), B = t_with(PriorityTerm::lit(3), {{"l", t_bullet()}});
    auto o = PriorityTerm::lit(5);
    CHECK(type_equal(dual(t_tensor(o, A, B)), t_par(o, dual(A), dual(B))));
    CHECK(type_equal(dual(t_bullet()), t_bullet()));
    CHECK(type_equal(dual(t_plus(o, {{"a", A}})), t_with(o, {{"a", A}})));
    std::uint64_t v = fresh_id();
    CHECK(type_equal(dual(t_mu("X", v, t_tvar("X", v))), t_mu("X", v, t_tvar("X", v))));
}

TEST_CASE("dual is an involution on random types") {
    TypeGen g(7);
    for (int i = 0; i < 10000; ++i) {
        TypePtr a = g.type(4);
        CHECK(type_equal(dual(dual(a)), a));
    }
}

TEST_CASE("priority of each connective") {
    TypePtr A = t_bullet(), B = t_bullet();
    CHECK(priority(t_bullet()).is_omega());
    std::uint64_t v = fresh_id();
    CHECK(priority(t_tvar("X", v)).is_omega());
    CHECK(priority(t_tensor(PriorityTerm::lit(5), A, B)) == PriorityTerm::lit(5));
    CHECK(priority(t_mu("X", v, t_par(PriorityTerm::lit(2), A, B))) == PriorityTerm::lit(2));
}

TEST_CASE("priority and duality agree") {
    TypeGen g(17);
    for (int i = 0; i < 10000; ++i) {
        TypePtr a = g.type(4);
        CHECK(priority(dual(a)) == priority(a));
    }
}

TEST_CASE("lift basics") {
    TypePtr A = t_bullet(), B = t_bullet();
    CHECK(type_equal(lift(2, t_bullet()), t_bullet()));
    TypePtr t = lift(2, t_tensor(PriorityTerm::lit(3), A, B));
    CHECK(priority(t) == PriorityTerm::lit(5));
    TypeGen g(23);
    for (int i = 0; i < 200; ++i) {
        TypePtr a = g.type(4);
        CHECK(type_equal(lift(0, a), a));
    }
}

TEST_CASE("lift composes and commutes with dual") {
    TypeGen g(29);
    for (int i = 0; i < 10000; ++i) {
        TypePtr a = g.type(3);
        std::uint64_t s = i % 4, t = (i / 4) % 5;
        CHECK(type_equal(lift(s, lift(t, a)), lift(s + t, a)));
        CHECK(type_equal(dual(lift(t, a)), lift(t, dual(a))));
        PriorityTerm pa = priority(a), pl = priority(lift(t, a));
        if (pa.is_omega()) CHECK(pl.is_omega());
        else CHECK(pl == pa.shifted(t));
    }
}

TEST_CASE("unfolding a recursive type") {
    // mu X. &{start: X}@1 unfolded at lift 2, expanded by hand:
    // &{start: mu X. &{start: X}@3}@1
    std::uint64_t v = fresh_id();
    TypePtr m = t_mu("X", v, t_with(PriorityTerm::lit(1), {{"start", t_tvar("X", v)}}));
    TypePtr u = unfold_type(m, 2);
    TypePtr expect = t_with(
        PriorityTerm::lit(1),
        {{"start", t_mu("X", v, t_with(PriorityTerm::lit(3), {{"start", t_tvar("X", v)}}))}});
    CHECK(type_equal(u, expect));

    // no occurrences of the variable: unfolding is the body
    std::uint64_t w = fresh_id();
    CHECK(type_equal(unfold_type(t_mu("X", w, t_bullet()), 9), t_bullet()));

    CHECK_THROWS_AS(unfold_type(t_bullet(), 1), std::invalid_argument);
}

TEST_CASE("unfolding preserves the outer priority when finite") {
    TypeGen g(31);
    int checked = 0;
    for (int i = 0; i < 2000 && checked < 300; ++i) {
        TypePtr body = g.type(3);
        if (std::holds_alternative<TVarRef>(body->node)) continue;
        std::uint64_t v = fresh_id();
        TypePtr m = t_mu("X", v, body);
        if (!type_contractive(m)) continue;
        PriorityTerm before = priority(m);
        if (before.is_omega()) continue;
        CHECK(priority(unfold_type(m, (i % 4) + 1)) == before);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("type equality is alpha for mu binders and symbolic for priorities") {
    std::uint64_t v1 = fresh_id(), v2 = fresh_id();
    PriorityTerm o = fresh_pvar();
    TypePtr a = t_mu("X", v1, t_par(o, t_bullet(), t_tvar("X", v1)));
    TypePtr b = t_mu("Y", v2, t_par(o, t_bullet(), t_tvar("Y", v2)));
    CHECK(type_equal(a, b));
    CHECK(!type_equal(t_tensor(PriorityTerm::lit(1), t_bullet(), t_bullet()),
                      t_tensor(PriorityTerm::lit(2), t_bullet(), t_bullet())));
    // equality is syntactic: a recursive type differs from its unfolding
    TypePtr m = t_mu("X", v1, t_with(PriorityTerm::lit(1), {{"l", t_tvar("X", v1)}}));
    CHECK(!type_equal(m, unfold_type(m, 1)));
}

TEST_CASE("contractiveness checks") {
    std::uint64_t v = fresh_id(), w = fresh_id();
    CHECK(!type_contractive(t_mu("X", v, t_tvar("X", v))));
    CHECK(!type_contractive(t_mu("X", v, t_mu("Y", w, t_tvar("X", v)))));
    CHECK(type_contractive(t_mu("X", v, t_with(PriorityTerm::lit(0), {{"l", t_tvar("X", v)}}))));

    Name x = fresh_name("x");
    std::uint64_t pv = fresh_id(), pw = fresh_id();
    ProcPtr bad = p_recdef("X", pv, {x}, p_reccall("X", pv, {x}));
    CHECK(find_uncontractive(bad).has_value());
    ProcPtr bad2 = p_recdef("X", pv, {x}, p_recdef("Y", pw, {x}, p_reccall("X", pv, {x})));
    CHECK(find_uncontractive(bad2).has_value());
    ProcPtr ok = p_recdef("X", pv, {x},
                          p_branch(x, fresh_name("z"), {{"l", p_reccall("X", pv, {x})}}));
    CHECK(!find_uncontractive(ok).has_value());
}

TEST_CASE("omega absorbs shifts") {
    CHECK(PriorityTerm::make_omega().shifted(4).is_omega());
    CHECK(PriorityTerm::lit(3).shifted(4) == PriorityTerm::lit(7));
}
