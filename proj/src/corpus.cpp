#include "apcp/corpus.hpp"

#include "apcp/syntax.hpp"

#include <sstream>

namespace apcp {

const char* node_kind_name(NodeKind k) { return k == NodeKind::A ? "A" : "B"; }

ProcPtr milner_leader(const Name& a1, const Name& cn, const Name& d1) {
    std::uint64_t x = fresh_id();
    ProcPtr p = p_reccall("X", x, {a1, cn, d1});
    p = sugar_branch(cn, {{"next", p}});
    p = sugar_branch(cn, {{"start", p}});
    p = sugar_bound_select(d1, "next", p);
    p = sugar_branch(a1, {{"ack", p}});
    p = sugar_bound_select(a1, "start", p);
    p = sugar_bound_select(d1, "start", p);
    return p_recdef("X", x, {a1, cn, d1}, p);
}

ProcPtr milner_follower(const Name& a, const Name& c, const Name& d) {
    std::uint64_t x = fresh_id();
    ProcPtr p = p_reccall("X", x, {a, c, d});
    p = sugar_bound_select(d, "next", p);
    p = sugar_branch(c, {{"next", p}});
    p = sugar_branch(a, {{"ack", p}});
    p = sugar_bound_select(d, "start", p);
    p = sugar_bound_select(a, "start", p);
    p = sugar_branch(c, {{"start", p}});
    return p_recdef("X", x, {a, c, d}, p);
}

ProcPtr milner_worker(const Name& b) {
    std::uint64_t x = fresh_id();
    ProcPtr p = p_reccall("X", x, {b});
    p = sugar_bound_select(b, "ack", p);
    p = sugar_branch(b, {{"start", p}});
    return p_recdef("X", x, {b}, p);
}

ProcPtr ring_def(const Name& x, const Name& y) {
    std::uint64_t v = fresh_id();
    Name a = fresh_name("a"), a2 = fresh_name("a'");
    Name b = fresh_name("b"), b2 = fresh_name("b'");
    Name z = fresh_name("z"), c = fresh_name("c");
    ProcPtr calls = p_restrict(b, b2, p_par(p_reccall("X", v, {z, b}), p_reccall("X", v, {b2, a})));
    ProcPtr recv = sugar_input(x, z, calls);
    ProcPtr send = sugar_bound_output(y, c, p_fwd(a2, c));
    ProcPtr body = p_restrict(a, a2, p_par(recv, send));
    return p_recdef("X", v, {x, y}, body);
}

ProcPtr node_server(NodeKind k, const Name& c_srv) {
    Name c = fresh_name("c"), x = fresh_name("x"), y = fresh_name("y");
    Name a = fresh_name("a"), z = fresh_name("z");
    ProcPtr body;
    if (k == NodeKind::A) {
        body = sugar_input(y, z, p_inact());
        body = sugar_bound_output(x, a, body);
    } else {
        body = sugar_bound_output(x, a, p_inact());
        body = sugar_input(y, z, body);
    }
    body = sugar_input(c, y, body);
    body = sugar_input(c, x, body);
    return p_server(c_srv, c, body);
}

// ---------------------------------------------------------------------------
// Scheduler

namespace {

struct SchedulerNames {
    std::vector<Name> a, b, c, d;
};

SchedulerNames scheduler_names(std::size_t n) {
    SchedulerNames nm;
    for (std::size_t i = 1; i <= n; ++i) {
        nm.a.push_back(fresh_name("a" + std::to_string(i)));
        nm.b.push_back(fresh_name("b" + std::to_string(i)));
        nm.c.push_back(fresh_name("c" + std::to_string(i)));
        nm.d.push_back(fresh_name("d" + std::to_string(i)));
    }
    return nm;
}

ProcPtr scheduler_body(std::size_t n, const SchedulerNames& nm, bool wrap_workers) {
    // A_1 uses (a1, c_n, d1); A_{i+1} uses (a_{i+1}, c_i, d_{i+1})
    std::vector<ProcPtr> cells;
    for (std::size_t i = 1; i <= n; ++i) {
        ProcPtr sched = i == 1 ? milner_leader(nm.a[0], nm.c[n - 1], nm.d[0])
                               : milner_follower(nm.a[i - 1], nm.c[i - 2], nm.d[i - 1]);
        ProcPtr worker = milner_worker(nm.b[i - 1]);
        ProcPtr cell = p_par(sched, worker);
        if (wrap_workers) cell = p_restrict(nm.a[i - 1], nm.b[i - 1], cell);
        cells.push_back(cell);
    }
    ProcPtr body = cells.back();
    for (std::size_t i = cells.size() - 1; i-- > 0;) body = p_par(cells[i], body);
    return body;
}

}  // namespace

CorpusEntry milner_scheduler(std::size_t n) {
    if (n == 0) throw std::invalid_argument("scheduler needs at least one worker");
    SchedulerNames nm = scheduler_names(n);
    ProcPtr body = scheduler_body(n, nm, true);
    for (std::size_t i = 0; i < n; ++i) body = p_restrict(nm.c[i], nm.d[i], body);
    CorpusEntry e;
    e.name = "milner";
    e.params["n"] = std::to_string(n);
    e.process = body;
    e.expect_certificate = true;
    e.expected_outcome = Outcome::FuelExhausted;  // rounds repeat forever
    e.experimental = n == 1;
    if (n == 1) e.notes = "leader wired to itself; generated for completeness";
    return e;
}

OpenChecked milner_open(std::size_t n) {
    if (n == 0) throw std::invalid_argument("scheduler needs at least one worker");
    SchedulerNames nm = scheduler_names(n);
    OpenChecked oc;
    oc.process = scheduler_body(n, nm, false);
    ParseOptions popts;
    auto ty = [&](const std::string& s) { return parse_type(s, oc.names, popts); };
    for (std::size_t i = 1; i <= n; ++i) {
        std::string o = "o" + std::to_string(i), k = "k" + std::to_string(i);
        std::string p = "p" + std::to_string(i), r = "r" + std::to_string(i);
        oc.declared.bind(nm.a[i - 1], ty("mu X. +{ start: &{ ack: X } @" + k + " } @" + o));
        oc.declared.bind(nm.b[i - 1], ty("mu X. &{ start: +{ ack: X } @" + k + " } @" + o));
        oc.declared.bind(nm.c[i - 1], ty("mu X. &{ start: &{ next: X } @" + r + " } @" + p));
        oc.declared.bind(nm.d[i - 1], ty("mu X. +{ start: +{ next: X } @" + r + " } @" + p));
    }
    for (std::size_t i = 1; i <= n; ++i) {
        auto& tab = oc.names.table();
        auto var_of = [&](const std::string& s) { return tab.at(s); };
        oc.paper_assignment[var_of("o" + std::to_string(i))] = PriorityValue::of(i);
        oc.paper_assignment[var_of("k" + std::to_string(i))] = PriorityValue::of(i);
        oc.paper_assignment[var_of("p" + std::to_string(i))] = PriorityValue::of(i);
        oc.paper_assignment[var_of("r" + std::to_string(i))] = PriorityValue::of(i + 2);
    }
    return oc;
}

OpenChecked leader_open(std::size_t n) {
    Name a1 = fresh_name("a1"), cn = fresh_name("cn"), d1 = fresh_name("d1");
    OpenChecked oc;
    oc.process = milner_leader(a1, cn, d1);
    ParseOptions popts;
    auto ty = [&](const std::string& s) { return parse_type(s, oc.names, popts); };
    oc.declared.bind(a1, ty("mu X. +{ start: &{ ack: X } @k1 } @o1"));
    oc.declared.bind(cn, ty("mu X. &{ start: &{ next: X } @rn } @pn"));
    oc.declared.bind(d1, ty("mu X. +{ start: +{ next: X } @r1 } @p1"));
    auto& tab = oc.names.table();
    oc.paper_assignment[tab.at("o1")] = PriorityValue::of(1);
    oc.paper_assignment[tab.at("k1")] = PriorityValue::of(1);
    oc.paper_assignment[tab.at("p1")] = PriorityValue::of(1);
    oc.paper_assignment[tab.at("r1")] = PriorityValue::of(3);
    oc.paper_assignment[tab.at("pn")] = PriorityValue::of(n);
    oc.paper_assignment[tab.at("rn")] = PriorityValue::of(n + 2);
    return oc;
}

// ---------------------------------------------------------------------------
// Ring

CorpusEntry ring() {
    Name x = fresh_name("x"), y = fresh_name("y");
    CorpusEntry e;
    e.name = "ring";
    e.process = p_restrict(x, y, ring_def(x, y));
    e.expect_certificate = true;
    e.expected_outcome = Outcome::FuelExhausted;  // doubles in size forever
    e.notes = "parallel components double every iteration";
    return e;
}

OpenChecked ring_open() {
    Name x = fresh_name("x"), y = fresh_name("y");
    OpenChecked oc;
    oc.process = ring_def(x, y);
    ParseOptions popts;
    auto ty = [&](const std::string& s) { return parse_type(s, oc.names, popts); };
    // one priority class: the same variable annotates both connectives
    oc.declared.bind(x, ty("mu X. (X % bullet @ o)"));
    oc.declared.bind(y, ty("mu X. (X * bullet @ o)"));
    return oc;
}

// ---------------------------------------------------------------------------
// Node configurations

namespace {

struct NodeWiring {
    Name cA, cA2, cB, cB2;

    Name server_port(NodeKind k) const { return k == NodeKind::A ? cA2 : cB2; }
};

ProcPtr client(const Name& port, const Name& first, const Name& second) {
    Name c = fresh_name("c");
    ProcPtr body = sugar_send_name(c, second, p_inact());
    body = sugar_send_name(c, first, body);
    return sugar_bound_request(port, c, body);
}

CorpusEntry wrap_config(const std::string& name, ProcPtr inner, const NodeWiring& w) {
    CorpusEntry e;
    e.name = name;
    e.extensions = true;
    ProcPtr all = p_par(node_server(NodeKind::A, w.cA), p_par(node_server(NodeKind::B, w.cB), inner));
    e.process = p_restrict(w.cA, w.cA2, p_restrict(w.cB, w.cB2, all));
    return e;
}

NodeWiring wiring() {
    return {fresh_name("cA"), fresh_name("cA'"), fresh_name("cB"), fresh_name("cB'")};
}

std::size_t count_b(std::initializer_list<NodeKind> ks) {
    std::size_t n = 0;
    for (auto k : ks)
        if (k == NodeKind::B) ++n;
    return n;
}

}  // namespace

CorpusEntry node_l1(NodeKind x) {
    NodeWiring w = wiring();
    Name e1 = fresh_name("e"), e2 = fresh_name("e'");
    Name c = fresh_name("c");
    ProcPtr body = sugar_send_name(c, e2, p_inact());
    body = sugar_send_name(c, e1, body);
    ProcPtr cl = sugar_bound_request(w.server_port(x), c, p_restrict(e1, e2, body));
    CorpusEntry e = wrap_config("L1", cl, w);
    e.params["X"] = node_kind_name(x);
    e.expect_certificate = x == NodeKind::A;
    e.expected_outcome = x == NodeKind::A ? Outcome::ReachedInaction : Outcome::Stuck;
    return e;
}

CorpusEntry node_l2(NodeKind x, NodeKind y) {
    NodeWiring w = wiring();
    Name e1 = fresh_name("e"), e2 = fresh_name("e'");
    Name f1 = fresh_name("f"), f2 = fresh_name("f'");
    ProcPtr cls = p_par(client(w.server_port(x), e1, f1), client(w.server_port(y), f2, e2));
    ProcPtr inner = p_restrict(e1, e2, p_restrict(f1, f2, cls));
    CorpusEntry e = wrap_config("L2", inner, w);
    e.params["X"] = node_kind_name(x);
    e.params["Y"] = node_kind_name(y);
    std::size_t nb = count_b({x, y});
    e.expect_certificate = nb <= 1;
    e.expected_outcome = nb == 2 ? Outcome::Stuck : Outcome::ReachedInaction;
    return e;
}

CorpusEntry node_l3(NodeKind x, NodeKind y, NodeKind z) {
    NodeWiring w = wiring();
    Name e1 = fresh_name("e"), e2 = fresh_name("e'");
    Name f1 = fresh_name("f"), f2 = fresh_name("f'");
    Name g1 = fresh_name("g"), g2 = fresh_name("g'");
    ProcPtr cls = p_par(client(w.server_port(x), e1, f1),
                        p_par(client(w.server_port(y), g1, e2), client(w.server_port(z), f2, g2)));
    ProcPtr inner = p_restrict(e1, e2, p_restrict(f1, f2, p_restrict(g1, g2, cls)));
    CorpusEntry e = wrap_config("L3", inner, w);
    e.params["X"] = node_kind_name(x);
    e.params["Y"] = node_kind_name(y);
    e.params["Z"] = node_kind_name(z);
    std::size_t nb = count_b({x, y, z});
    e.expect_certificate = nb <= 1;  // at least one A, at most one B
    e.expected_outcome = nb == 3 ? Outcome::Stuck : Outcome::ReachedInaction;
    if (nb == 2) e.notes = "runs to inaction but is untypable (priority cycle)";
    return e;
}

// ---------------------------------------------------------------------------
// Lookup

namespace {

NodeKind parse_kind(const std::string& s) {
    if (s == "A" || s == "a") return NodeKind::A;
    if (s == "B" || s == "b") return NodeKind::B;
    throw std::invalid_argument("node kind must be A or B, got " + s);
}

}  // namespace

std::optional<CorpusEntry> corpus_get(const std::string& name,
                                      const std::map<std::string, std::string>& params) {
    auto get = [&](const char* key, const char* fallback) -> std::string {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "milner") return milner_scheduler(std::stoul(get("n", "2")));
    if (name == "ring") return ring();
    if (name == "L1" || name == "l1") return node_l1(parse_kind(get("X", "A")));
    if (name == "L2" || name == "l2")
        return node_l2(parse_kind(get("X", "A")), parse_kind(get("Y", "A")));
    if (name == "L3" || name == "l3")
        return node_l3(parse_kind(get("X", "A")), parse_kind(get("Y", "A")),
                       parse_kind(get("Z", "A")));
    return std::nullopt;
}

std::vector<CorpusEntry> corpus_all() {
    std::vector<CorpusEntry> out;
    for (std::size_t n = 1; n <= 3; ++n) out.push_back(milner_scheduler(n));
    out.push_back(ring());
    for (NodeKind x : {NodeKind::A, NodeKind::B}) out.push_back(node_l1(x));
    for (NodeKind x : {NodeKind::A, NodeKind::B})
        for (NodeKind y : {NodeKind::A, NodeKind::B}) out.push_back(node_l2(x, y));
    for (NodeKind x : {NodeKind::A, NodeKind::B})
        for (NodeKind y : {NodeKind::A, NodeKind::B})
            for (NodeKind z : {NodeKind::A, NodeKind::B}) out.push_back(node_l3(x, y, z));
    return out;
}

}  // namespace apcp
