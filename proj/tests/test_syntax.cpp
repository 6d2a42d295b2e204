#include "apcp/corpus.hpp"
#include "apcp/semantics.hpp"
#include "apcp/syntax.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <functional>

using namespace apcp;
using namespace apcp::testing;

namespace {

ProcPtr reparse(const ProcPtr& p, bool ext = false) {
    ParseOptions o;
    o.extensions = ext;
    return parse_process(print_process(p), o).main;
}

}  // namespace

TEST_CASE("core productions parse") {
    auto u = parse_process("new (x,y) { fwd x y }");
    auto* r = std::get_if<PRestrict>(&u.main->node);
    REQUIRE(r);
    CHECK(std::holds_alternative<PFwd>(r->body->node));

    auto out = parse_process("x[y,z]");
    CHECK(std::holds_alternative<POutput>(out.main->node));

    auto sel = parse_process("x[z] < go");
    auto* s = std::get_if<PSelect>(&sel.main->node);
    REQUIRE(s);
    CHECK(s->label == "go");

    auto br = parse_process("x(z) > { a: 0, b: fwd z z }");
    auto* b = std::get_if<PBranch>(&br.main->node);
    REQUIRE(b);
    CHECK(b->branches.size() == 2);

    CHECK(std::holds_alternative<PInact>(parse_process("0").main->node));
}

TEST_CASE("the scheduler leader shape parses") {
    auto u = parse_process(
        "mu X(a,c,d); d < start . a < start . a > { ack: d < next . "
        "c > { start: c > { next: call X(a,c,d) } } }");
    auto* def = std::get_if<PRecDef>(&u.main->node);
    REQUIRE(def);
    CHECK(def->params.size() == 3);
    // same shape the corpus builder produces
    Name a = fresh_name("a"), c = fresh_name("c"), d = fresh_name("d");
    CHECK(print_process(u.main) == print_process(milner_leader(a, c, d)));
}

TEST_CASE("bound output desugars to the defined form") {
    auto u = parse_process("x![y] . fwd y w");
    // new (y,a) new (x',b) ( x[a,b] | fwd y w )
    auto* r1 = std::get_if<PRestrict>(&u.main->node);
    REQUIRE(r1);
    auto* r2 = std::get_if<PRestrict>(&r1->body->node);
    REQUIRE(r2);
    auto* par = std::get_if<PPar>(&r2->body->node);
    REQUIRE(par);
    auto* out = std::get_if<POutput>(&par->left->node);
    REQUIRE(out);
    CHECK(out->subj.ident == "x");
    // the output sends the fresh duals, not the sugar binder
    CHECK(out->payload == r1->b);
    CHECK(out->cont == r2->b);
    // continuation keeps the forwarder with y rebound to the sugar binder
    auto* f = std::get_if<PFwd>(&par->right->node);
    REQUIRE(f);
    CHECK(f->a == r1->a);
}

TEST_CASE("desugaring preserves free names") {
    Name x = fresh_name("x"), y = fresh_name("y"), w = fresh_name("w");
    ProcPtr body = p_fwd(y, w);
    ProcPtr s = sugar_bound_output(x, y, body);
    CHECK(free_names(s) == std::set<Name>{x, w});

    ProcPtr s2 = sugar_bound_select(x, "l", p_fwd(x, w));
    CHECK(free_names(s2) == std::set<Name>{x, w});

    ProcPtr s3 = sugar_input(x, y, p_fwd(y, x));
    CHECK(free_names(s3) == std::set<Name>{x});

    ProcPtr s4 = sugar_branch(x, {{"l", p_fwd(x, w)}});
    CHECK(free_names(s4) == std::set<Name>{x, w});
}

TEST_CASE("desugared outputs are non-blocking") {
    // the continuation of a sugared output sits in parallel with the send,
    // never under an input introduced by the sugar
    Name x = fresh_name("x"), y = fresh_name("y");
    ProcPtr s = sugar_bound_output(x, y, p_inact());
    ProcPtr n = normalize(s);
    // normalization keeps only the output and its live restrictions
    CHECK(free_names(n) == std::set<Name>{x});
    std::function<bool(const ProcPtr&)> has_input = [&](const ProcPtr& p) {
        if (std::holds_alternative<PInput>(p->node)) return true;
        if (auto* pr = std::get_if<PRestrict>(&p->node)) return has_input(pr->body);
        if (auto* pp = std::get_if<PPar>(&p->node))
            return has_input(pp->left) || has_input(pp->right);
        return false;
    };
    CHECK(!has_input(s));
}

TEST_CASE("sugared forms parse to their desugarings") {
    // x?(y); P and x? > {...} and x! < l . P and bare x < l . P
    auto a = parse_process("x?(y); fwd y y");
    auto* in = std::get_if<PInput>(&a.main->node);
    REQUIRE(in);

    auto b = parse_process("x? > { l: 0 }");
    CHECK(std::holds_alternative<PBranch>(b.main->node));
    auto b2 = parse_process("x > { l: 0 }");
    CHECK(std::holds_alternative<PBranch>(b2.main->node));

    auto c = parse_process("x! < go . 0");
    auto c2 = parse_process("x < go . 0");
    CHECK(print_process(c.main) == print_process(c2.main));
}

TEST_CASE("extension lexemes require the flag") {
    CHECK_THROWS_AS(parse_process("x[]"), ParseError);
    CHECK_THROWS_AS(parse_process("x(); 0"), ParseError);
    CHECK_THROWS_AS(parse_process("?x[y]"), ParseError);
    CHECK_THROWS_AS(parse_process("!x(y); 0"), ParseError);
    ParseOptions ext;
    ext.extensions = true;
    CHECK(std::holds_alternative<PEmptyOut>(parse_process("x[]", ext).main->node));
    CHECK(std::holds_alternative<PEmptyIn>(parse_process("x(); 0", ext).main->node));
    CHECK(std::holds_alternative<PClientReq>(parse_process("?x[y]", ext).main->node));
    CHECK(std::holds_alternative<PServer>(parse_process("!x(y); 0", ext).main->node));
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_process("new (x) 0");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.col > 1);
    }
}

TEST_CASE("definitions expand at reference") {
    auto u = parse_process("def Pair(x,y) = fwd x y\nmain = new (a,b) Pair(a,b)");
    auto* r = std::get_if<PRestrict>(&u.main->node);
    REQUIRE(r);
    CHECK(std::holds_alternative<PFwd>(r->body->node));
    CHECK(free_names(u.main).empty());
}

TEST_CASE("type annotations parse and share priority names") {
    auto u = parse_process("type x : bullet * bullet @ o\ntype y : bullet % bullet @ o\nfwd x y");
    CHECK(u.annotations.size() == 2);
    const TypePtr* tx = nullptr;
    for (auto& [n, t] : u.annotations.entries)
        if (n.ident == "x") tx = &t;
    REQUIRE(tx);
    auto* tt = std::get_if<TTensor>(&(*tx)->node);
    REQUIRE(tt);
    CHECK(tt->pr.is_var());
}

TEST_CASE("type syntax round-trips") {
    PriorityNames names;
    const char* samples[] = {
        "bullet",
        "bullet * bullet @ 3",
        "mu X. +{ start: &{ ack: X } @ k } @ o",
        "+{ a: bullet, b: bullet % bullet @ 1 } @ w",
        "(bullet * bullet @ 1) % bullet @ 2",
    };
    for (auto* s : samples) {
        TypePtr t = parse_type(s, names);
        PriorityNames names2 = names;
        TypePtr t2 = parse_type(print_type(t, &names), names2);
        CHECK(type_equal(t, t2));
    }
}

TEST_CASE("process round-trip on random terms") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        ProcGen g(seed);
        ProcPtr p = g.proc(4);
        std::string once = print_process(p);
        ProcPtr q = parse_process(once).main;
        CHECK(print_process(q) == once);
    }
}

TEST_CASE("round-trip on every corpus process") {
    for (auto& e : corpus_all()) {
        std::string once = print_process(e.process);
        ParseOptions o;
        o.extensions = e.extensions;
        ProcPtr q = parse_process(once, o).main;
        CHECK(print_process(q) == once);
        // and a second parse is a fixpoint
        CHECK(print_process(parse_process(print_process(q), o).main) == once);
    }
}

TEST_CASE("printer disambiguates name collisions") {
    Name x1 = fresh_name("x"), x2 = fresh_name("x"), y = fresh_name("y");
    ProcPtr p = p_par(p_fwd(x1, y), p_fwd(x2, y));
    std::string s = print_process(p);
    CHECK(s.find("x_1") != std::string::npos);
    ProcPtr q = parse_process(s).main;
    // both forwarders still target distinct first arguments
    auto* par = std::get_if<PPar>(&q->node);
    REQUIRE(par);
    auto* f1 = std::get_if<PFwd>(&par->left->node);
    auto* f2 = std::get_if<PFwd>(&par->right->node);
    REQUIRE(f1);
    REQUIRE(f2);
    CHECK(!(f1->a == f2->a));
    CHECK(f1->b == f2->b);
}

TEST_CASE("bound client requests desugar to a restricted request") {
    ParseOptions ext;
    ext.extensions = true;
    auto u = parse_process("?x![y] . fwd y w", ext);
    // new (y,a) ( ?x[a] | fwd y w )
    auto* r = std::get_if<PRestrict>(&u.main->node);
    REQUIRE(r);
    auto* par = std::get_if<PPar>(&r->body->node);
    REQUIRE(par);
    auto* req = std::get_if<PClientReq>(&par->left->node);
    REQUIRE(req);
    CHECK(req->subj.ident == "x");
    CHECK(req->payload == r->b);
    auto fns = free_names(u.main);
    std::set<std::string> idents;
    for (auto& n : fns) idents.insert(n.ident);
    CHECK(idents == std::set<std::string>{"x", "w"});
}
