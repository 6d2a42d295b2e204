// Property suites: generated well-typed processes stay certifiable along
// reductions, the admissible bound-output/bound-selection rules agree with
// inference on the desugared forms, and generated processes never strand a
// certified run.

#include "apcp/semantics.hpp"
#include "apcp/syntax.hpp"
#include "apcp/typing.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace apcp;
using namespace apcp::testing;

TEST_CASE("generated processes are well typed by construction") {
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        TypedGen g(seed);
        ProcPtr p = g.closed(1 + seed % 3, 3);
        INFO("seed " << seed << ": " << print_process(p));
        CHECK(is_certified(certify_deadlock_free(p)));
    }
}

TEST_CASE("reduction preserves certifiability on generated processes") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        TypedGen g(seed * 31 + 5);
        ProcPtr cur = g.closed(1 + seed % 2, 3);
        REQUIRE(is_certified(certify_deadlock_free(cur)));
        for (int i = 0; i < 6; ++i) {
            auto rs = find_redexes(cur, false);
            if (rs.empty()) break;
            cur = step(cur, rs[seed % rs.size()]);
            INFO("seed " << seed << " step " << i);
            CHECK(is_certified(certify_deadlock_free(cur)));
        }
    }
}

TEST_CASE("certified generated processes never get stuck") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        TypedGen g(seed * 101 + 3);
        ProcPtr p = g.closed(2, 3);
        Trace t = run(p, {}, 120);
        INFO("seed " << seed);
        CHECK(t.outcome != Outcome::Stuck);
    }
}

TEST_CASE("bound output infers the admissible-rule conclusion") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        TypedGen g(seed * 7 + 1);
        // premise P |- y:A, x:B built from two self-contained halves
        Name y = fresh_name("y"), y2 = fresh_name("y'");
        Name x = fresh_name("x"), x2 = fresh_name("x'");
        auto [ly, ry] = g.dual_pair(y, y2, 2);
        auto [lx, rx] = g.dual_pair(x, x2, 2);
        ProcPtr premise = p_par(ly, lx);
        Judgment jp = infer(premise);
        const TypePtr* A = jp.gamma.lookup(y);
        const TypePtr* B = jp.gamma.lookup(x);
        // unused halves type as closed endpoints and do not appear
        TypePtr a = A ? *A : t_bullet();
        TypePtr b = B ? *B : t_bullet();
        if (type_has_unresolved(a) || type_has_unresolved(b)) continue;

        ProcPtr sugar = sugar_bound_output(x, y, premise);
        Judgment js = infer(sugar);
        REQUIRE(js.gamma.size() == 1);
        const TypePtr* got = js.gamma.lookup(x);
        REQUIRE(got);
        auto* tens = std::get_if<TTensor>(&(*got)->node);
        REQUIRE(tens);
        INFO("seed " << seed << " want payload " << print_type(a) << " got "
                     << print_type(tens->payload));
        CHECK(type_shape_equal(tens->payload, a));
        CHECK(type_shape_equal(tens->cont, b));
    }
}

TEST_CASE("bound selection infers a row containing its label") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        TypedGen g(seed * 13 + 2);
        Name x = fresh_name("x"), x2 = fresh_name("x'");
        auto [lx, rx] = g.dual_pair(x, x2, 2);
        Judgment jp = infer(lx);
        const TypePtr* Aj = jp.gamma.lookup(x);
        TypePtr aj = Aj ? *Aj : t_bullet();
        if (type_has_unresolved(aj)) continue;

        ProcPtr sugar = sugar_bound_select(x, "sel", lx);
        Judgment js = infer(sugar);
        REQUIRE(js.gamma.size() == 1);
        const TypePtr* got = js.gamma.lookup(x);
        REQUIRE(got);
        // reported as an open selection row containing exactly the used label
        auto* plus = std::get_if<TPlus>(&(*got)->node);
        REQUIRE(plus);
        CHECK(plus->row_open);
        REQUIRE(plus->branches.count("sel"));
        CHECK(type_shape_equal(plus->branches.at("sel"), aj));
    }
}

TEST_CASE("desugared sugar composes under restriction like the primitive rules") {
    // nu(xy)(x![u].P | y(v,w);Q) both typechecks and synchronizes
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        TypedGen g(seed + 400);
        ProcPtr p = g.closed(1, 2);
        CHECK(is_certified(certify_deadlock_free(p)));
        Trace t = run(p, {}, 60);
        CHECK(t.outcome != Outcome::Stuck);
    }
}
