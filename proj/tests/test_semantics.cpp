#include "apcp/corpus.hpp"
#include "apcp/semantics.hpp"
#include "apcp/syntax.hpp"
#include "apcp/typing.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace apcp;
using namespace apcp::testing;

namespace {

ProcPtr parse1(const std::string& s, bool ext = false) {
    ParseOptions o;
    o.extensions = ext;
    return parse_process(s, o).main;
}

bool is_inaction(const ProcPtr& p) { return std::holds_alternative<PInact>(p->node); }

}  // namespace

TEST_CASE("normalize drops units and identity forwarders") {
    Name x = fresh_name("x"), y = fresh_name("y");
    ProcPtr p = p_par(p_inact(), p_fwd(x, y));
    CHECK(alpha_equal(normalize(p), p_fwd(x, y)));
    CHECK(is_inaction(normalize(p_restrict(x, y, p_fwd(x, y)))));
    CHECK(is_inaction(normalize(p_restrict(x, y, p_inact()))));
}

TEST_CASE("normalize floats restrictions and flattens parallel") {
    ProcPtr p = parse1("fwd a b | new (x,y) { x[u,v] | y(s,t); 0 }");
    ProcPtr n = normalize(p);
    auto* r = std::get_if<PRestrict>(&n->node);
    REQUIRE(r);
    CHECK(free_names(n) == free_names(p));
}

TEST_CASE("forwarder argument order is canonical") {
    Name x = fresh_name("x"), y = fresh_name("y");
    CHECK(state_key(normalize(p_fwd(x, y))) == state_key(normalize(p_fwd(y, x))));
}

TEST_CASE("restriction pair and order are canonical") {
    // same free names, pairs swapped and reordered
    Name x = fresh_name("x"), y = fresh_name("y"), u = fresh_name("u"), v = fresh_name("v");
    Name m = fresh_name("m"), n = fresh_name("n"), s = fresh_name("s"), t = fresh_name("t");
    Name c = fresh_name("c"), d = fresh_name("d");
    ProcPtr comps_a = p_par(p_output(x, m, n), p_par(p_input(y, s, t, p_output(u, s, t)),
                                                     p_input(v, c, d, p_inact())));
    ProcPtr comps_b = p_par(p_input(v, c, d, p_inact()),
                            p_par(p_input(y, s, t, p_output(u, s, t)), p_output(x, m, n)));
    ProcPtr a = p_restrict(x, y, p_restrict(u, v, comps_a));
    ProcPtr b = p_restrict(v, u, p_restrict(y, x, comps_b));
    CHECK(state_key(normalize(a)) == state_key(normalize(b)));
}

TEST_CASE("normalize is idempotent on random terms") {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
        ProcGen g(seed);
        ProcPtr p = g.proc(4);
        ProcPtr n = normalize(p);
        CHECK(alpha_equal(normalize(n), n));
        CHECK(state_key(normalize(n)) == state_key(n));
    }
}

TEST_CASE("normalize preserves free names on random terms") {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
        ProcGen g(seed ^ 0x9e3779b9);
        ProcPtr p = g.proc(4);
        // dropped restrictions/forwarders only ever remove bound names
        CHECK(ids_of(free_names(normalize(p))) == ids_of(free_names(p)));
    }
}

TEST_CASE("actionless recursive loops are inaction") {
    ProcPtr p = parse1("mu X(); new (a,b) { call X() | 0 }");
    CHECK(is_inaction(normalize(p)));
}

TEST_CASE("unfolding a recursion once") {
    Name x = fresh_name("x");
    std::uint64_t v = fresh_id();
    ProcPtr def = p_recdef("X", v, {x},
                           p_branch(x, fresh_name("z"), {{"go", p_reccall("X", v, {x})}}));
    ProcPtr u = unfold_rec(def);
    CHECK(std::holds_alternative<PBranch>(u->node));
    CHECK(ids_of(free_names(u)) == ids_of(free_names(def)));

    // arity mismatch surfaces
    ProcPtr bad = p_recdef("X", v, {x}, p_branch(x, fresh_name("z"), {{"go", p_reccall("X", v, {})}}));
    CHECK_THROWS_AS(unfold_rec(bad), std::invalid_argument);
}

TEST_CASE("unfolding the ring gives the two-copies shape") {
    auto e = ring();
    Trace t = run(e.process, {}, 2);
    REQUIRE(t.steps.size() == 2);
    CHECK(component_count(t.steps[1].result) == 2);
    // after three more rounds the component count doubles twice more
    Trace t2 = run(e.process, {}, 14);
    std::vector<std::size_t> counts;
    for (auto& s : t2.steps) counts.push_back(component_count(s.result));
    CHECK(std::count(counts.begin(), counts.end(), 4) > 0);
    CHECK(std::count(counts.begin(), counts.end(), 8) > 0);
}

TEST_CASE("beta synchronization of output and input") {
    ProcPtr p = parse1("new (x,y) { x[a,b] | y(v,z); fwd v z }");
    auto rs = find_redexes(p, false);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].rule == RuleTag::BetaTensorPar);
    ProcPtr q = step(p, rs[0]);
    CHECK(print_process(q) == "fwd a b");
}

TEST_CASE("beta selection picks the labelled branch") {
    ProcPtr p = parse1("new (x,y) { x[b] < go | y(z) > { go: fwd z w, stop: 0 } }");
    auto rs = find_redexes(p, false);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].rule == RuleTag::BetaPlusWith);
    CHECK(rs[0].label == "go");
    ProcPtr q = step(p, rs[0]);
    CHECK(print_process(q) == "fwd b w");
}

TEST_CASE("beta forwarder substitutes the far end") {
    ProcPtr p = parse1("new (y,z) { fwd x y | z(u,v); 0 }");
    auto rs = find_redexes(p, false);
    REQUIRE(!rs.empty());
    CHECK(rs[0].rule == RuleTag::BetaId);
    ProcPtr q = step(p, rs[0]);
    auto* in = std::get_if<PInput>(&q->node);
    REQUIRE(in);
    CHECK(in->subj.ident == "x");
}

TEST_CASE("the forwarder side condition blocks self-capture") {
    // nu(y,z)(x<->y | P) needs x distinct from both ends
    ProcPtr p = parse1("new (y,z) { fwd z y | y(u,v); 0 }");
    for (auto& r : find_redexes(p, false)) CHECK(r.rule != RuleTag::BetaId);
}

TEST_CASE("empty close synchronizes under the extension") {
    SemOptions ext{true};
    ProcPtr p = parse1("new (x,y) { x[] | y(); fwd a b }", true);
    auto rs = find_redexes(p, false, ext);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].rule == RuleTag::BetaOneBot);
    CHECK(print_process(step(p, rs[0], ext)) == "fwd a b");
}

TEST_CASE("server spawns a copy and stays") {
    SemOptions ext{true};
    ProcPtr p = parse1("new (x,y) { ?x[a] | !y(v); v(s,t); 0 | ?x[b] }", true);
    auto rs = find_redexes(p, false, ext);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].rule == RuleTag::BetaQueryBang);
    ProcPtr q = step(p, rs[0], ext);
    // one request consumed, server still present, one copy spawned
    auto rs2 = find_redexes(q, false, ext);
    REQUIRE(rs2.size() == 1);
    ProcPtr q2 = step(q, rs2[0], ext);
    // both copies wait on their payloads now; the server is unreferenced and
    // cleaned up by the congruence
    CHECK(component_count(q2, ext) == 2);
}

TEST_CASE("stale redexes are rejected") {
    ProcPtr p = parse1("new (x,y) { x[a,b] | y(v,z); new (u,w) { u[m,n] | w(s,t); 0 } }");
    auto rs = find_redexes(p, false);
    REQUIRE(!rs.empty());
    ProcPtr q = step(p, rs[0]);
    CHECK_THROWS_AS(step(q, rs[0]), StaleRedex);
}

TEST_CASE("kappa pulls a free-subject prefix out of restrictions") {
    SemOptions opts;
    ProcPtr p = parse1("new (a,b) { x(y,z); { a[u,v] } | b(s,t); 0 }");
    CHECK(find_redexes(p, false, opts).empty());
    auto rs = find_redexes(p, true, opts);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].rule == RuleTag::KappaPar);
    ProcPtr q = step(p, rs[0], opts);
    auto* in = std::get_if<PInput>(&q->node);
    REQUIRE(in);
    CHECK(in->subj.ident == "x");
    // the inner synchronization is now guarded by the pulled prefix
    CHECK(find_redexes(q, true, opts).empty());
}

TEST_CASE("kappa is off for closed runs and never needed") {
    auto e = milner_scheduler(2);
    Trace t = run(e.process, {}, 60, false);
    CHECK(t.outcome == Outcome::FuelExhausted);
    for (auto& s : t.steps) CHECK(is_beta(s.redex.rule));
}

TEST_CASE("deterministic runs are reproducible") {
    auto e = milner_scheduler(2);
    Trace a = run(e.process, {}, 25);
    Trace b = run(e.process, {}, 25);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].redex.rule == b.steps[i].redex.rule);
        CHECK(state_key(normalize(a.steps[i].result)) == state_key(normalize(b.steps[i].result)));
    }
}

TEST_CASE("seeded random runs are reproducible per seed") {
    auto e = milner_scheduler(2);
    RunPolicy p1{false, 42}, p2{false, 42};
    Trace a = run(e.process, p1, 30), b = run(e.process, p2, 30);
    REQUIRE(a.steps.size() == b.steps.size());
    bool same = true;
    for (std::size_t i = 0; i < a.steps.size(); ++i)
        same = same && a.steps[i].redex.rule == b.steps[i].redex.rule &&
               state_key(normalize(a.steps[i].result)) == state_key(normalize(b.steps[i].result));
    CHECK(same);
}

TEST_CASE("run classifies terminal states") {
    CHECK(run(parse1("0"), {}, 5).outcome == Outcome::ReachedInaction);
    CHECK(run(parse1("0"), {}, 5).steps.empty());
    CHECK(run(parse1("x(y,z); 0"), {}, 5).outcome == Outcome::Stuck);
}

TEST_CASE("active names follow the definition") {
    Name x = fresh_name("x"), y = fresh_name("y"), z = fresh_name("z");
    CHECK(active_names(p_output(x, y, z)) == std::set<Name>{x});
    CHECK(active_names(p_fwd(x, y)) == std::set<Name>{x, y});
    CHECK(active_names(p_reccall("X", fresh_id(), {x, y})).empty());
    std::uint64_t v = fresh_id();
    CHECK(active_names(p_recdef("X", v, {x}, p_output(x, y, z))) == std::set<Name>{x});
    CHECK(active_names(p_restrict(x, y, p_output(x, y, z))).empty());
    CHECK(active_names(p_input(x, y, z, p_output(y, z, z))) == std::set<Name>{x});
}

TEST_CASE("liveness needs a restricted pair of active names") {
    ProcPtr live = parse1("new (x,y) { x[a,b] | y(v,z); 0 }");
    CHECK(is_live(live));
    CHECK(!is_live(parse1("0")));
    // only one side active: not live
    ProcPtr half = parse1("new (x,y) { x[a,b] | c(v,z); y[m,n] }");
    CHECK(!is_live(half));
}

TEST_CASE("the stuck two-node state is not live, has prefixes, is untypable") {
    auto e = node_l2(NodeKind::B, NodeKind::B);
    SemOptions ext{true};
    Trace t = run(e.process, {}, 100, false, ext);
    REQUIRE(t.outcome == Outcome::Stuck);
    ProcPtr stuck = t.steps.empty() ? t.initial : t.steps.back().result;
    CHECK(!is_live(stuck));
    CHECK(has_actions(stuck));
    CHECK(!is_certified(certify_deadlock_free(stuck, {true})));
}

TEST_CASE("trace records carry the documented fields") {
    ProcPtr p = parse1("new (x,y) { x[a,b] | y(v,z); 0 }");
    Trace t = run(p, {}, 10);
    auto lines = trace_records(t);
    REQUIRE(lines.size() >= 2);
    CHECK(lines.front().find("\"record\":\"initial\"") != std::string::npos);
    CHECK(lines.back().find("\"record\":\"summary\"") != std::string::npos);
    CHECK(lines.back().find("\"outcome\"") != std::string::npos);
    bool has_step = false;
    for (auto& l : lines)
        if (l.find("\"record\":\"step\"") != std::string::npos &&
            l.find("\"rule\"") != std::string::npos && l.find("\"endpoints\"") != std::string::npos &&
            l.find("\"process\"") != std::string::npos)
            has_step = true;
    CHECK(has_step);
}

TEST_CASE("exploration finds the only stuck state of a mismatch") {
    // selection against a branch lacking the label cannot fire
    ProcPtr p = parse1("new (x,y) { x[b] < oops | y(z) > { go: 0 } }");
    ExploreResult r = explore(p, 100);
    CHECK(r.complete);
    CHECK(r.states == 1);
    CHECK(r.stuck.size() == 1);
}

TEST_CASE("exploration of certified corpus entries finds no stuck states") {
    for (auto& e : corpus_all()) {
        if (!e.expect_certificate || e.experimental) continue;
        if (e.name == "milner") continue;  // covered by the acceptance suite at scale
        SemOptions opts{e.extensions};
        std::size_t cap = e.name == "ring" ? 40 : 400;
        ExploreResult r = explore(e.process, cap, false, opts);
        INFO(e.name << " states=" << r.states);
        CHECK(r.stuck.empty());
    }
}

TEST_CASE("non-live states of certified processes carry no actions") {
    // along certified runs, a state that stops being live is inaction
    for (auto& e : corpus_all()) {
        if (!e.expect_certificate) continue;
        SemOptions sopt{e.extensions};
        Trace t = run(e.process, {}, e.name == "ring" ? 20 : 120, false, sopt);
        auto check_state = [&](const ProcPtr& s) {
            if (!is_live(s)) CHECK(!has_actions(normalize(s, sopt)));
        };
        check_state(t.initial);
        for (auto& s : t.steps) check_state(s.result);
    }
}
