#include "apcp/syntax.hpp"

#include "apcp/type_algebra.hpp"

#include <cctype>
#include <functional>
#include <sstream>

namespace apcp {

// ---------------------------------------------------------------------------
// Sugar lowering

ProcPtr sugar_bound_output(const Name& x, const Name& y, const ProcPtr& p) {
    // x![y] . P  :=  new (y,a) new (z,b) ( x[a,b] | P{z/x} )
    Name a = fresh_name("a"), z = fresh_name(x.ident), b = fresh_name("b");
    ProcPtr cont = substitute(p, {{x.id, z}});
    return p_restrict(y, a, p_restrict(z, b, p_par(p_output(x, a, b), cont)));
}

ProcPtr sugar_bound_select(const Name& x, const std::string& label, const ProcPtr& p) {
    // x < l . P  :=  new (z,b) ( x[b] < l | P{z/x} )
    Name z = fresh_name(x.ident), b = fresh_name("b");
    ProcPtr cont = substitute(p, {{x.id, z}});
    return p_restrict(z, b, p_par(p_select(x, b, label), cont));
}

ProcPtr sugar_input(const Name& x, const Name& y, const ProcPtr& p) {
    // x?(y); P  :=  x(y,z); P{z/x}
    Name z = fresh_name(x.ident);
    return p_input(x, y, z, substitute(p, {{x.id, z}}));
}

ProcPtr sugar_branch(const Name& x, std::map<std::string, ProcPtr> branches) {
    // x > {l: P}  :=  x(z) > {l: P{z/x}}
    Name z = fresh_name(x.ident);
    std::map<std::string, ProcPtr> bs;
    for (auto& [l, b] : branches) bs.emplace(l, substitute(b, {{x.id, z}}));
    return p_branch(x, z, std::move(bs));
}

ProcPtr sugar_bound_request(const Name& x, const Name& y, const ProcPtr& p) {
    // ?x![y] . P  :=  new (y,a) ( ?x[a] | P )
    Name a = fresh_name("a");
    return p_restrict(y, a, p_par(p_client_req(x, a), p));
}

ProcPtr sugar_send_name(const Name& x, const Name& y, const ProcPtr& p) {
    // x<y> . P  :=  x![y'] . ( fwd y y' | P )
    Name y2 = fresh_name(y.ident + "'");
    return sugar_bound_output(x, y2, p_par(p_fwd(y, y2), p));
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    Ident, Nat, LParen, RParen, LBrack, RBrack, LBrace, RBrace,
    Comma, Semi, Colon, Dot, Bar, Bang, Query, Eq, Lt, Gt,
    Star, Percent, At, Plus, Amp, End
};

struct Token {
    Tok kind;
    std::string text;
    std::uint64_t nat = 0;
    int line = 1, col = 1;
};

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;
    int line = 1, col = 1;
    Token cur;

    explicit Lexer(const std::string& s) : src(s) { advance(); }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur.line, cur.col); }

    void advance() {
        skip_ws();
        cur.line = line;
        cur.col = col;
        if (pos >= src.size()) {
            cur = {Tok::End, "", 0, line, col};
            return;
        }
        char c = src[pos];
        auto one = [&](Tok k) {
            cur = {k, std::string(1, c), 0, line, col};
            bump();
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
                    src[pos] == '\'')) {
                id += src[pos];
                bump();
            }
            cur = {Tok::Ident, id, 0, line, col};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::uint64_t v = 0;
            std::string t;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                v = v * 10 + (src[pos] - '0');
                t += src[pos];
                bump();
            }
            cur = {Tok::Nat, t, v, line, col};
            return;
        }
        switch (c) {
            case '(': one(Tok::LParen); return;
            case ')': one(Tok::RParen); return;
            case '[': one(Tok::LBrack); return;
            case ']': one(Tok::RBrack); return;
            case '{': one(Tok::LBrace); return;
            case '}': one(Tok::RBrace); return;
            case ',': one(Tok::Comma); return;
            case ';': one(Tok::Semi); return;
            case ':': one(Tok::Colon); return;
            case '.': one(Tok::Dot); return;
            case '|': one(Tok::Bar); return;
            case '!': one(Tok::Bang); return;
            case '?': one(Tok::Query); return;
            case '=': one(Tok::Eq); return;
            case '<': one(Tok::Lt); return;
            case '>': one(Tok::Gt); return;
            case '*': one(Tok::Star); return;
            case '%': one(Tok::Percent); return;
            case '@': one(Tok::At); return;
            case '+': one(Tok::Plus); return;
            case '&': one(Tok::Amp); return;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
    }

    void bump() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Parser

struct RecScope {
    std::string name;
    std::uint64_t var_id;
    std::size_t arity;
};

struct Definition {
    std::vector<Name> params;
    ProcPtr body;
};

struct Parser {
    Lexer lx;
    ParseOptions opts;
    // Scoped name resolution: innermost first.
    std::vector<std::map<std::string, Name>> scopes;
    std::map<std::string, Name> unit_free;
    std::vector<RecScope> rec_scopes;
    std::map<std::string, Definition> defs;
    std::vector<std::map<std::string, std::uint64_t>> mu_scopes;  // type recursion vars
    PriorityNames pnames;

    Parser(const std::string& src, const ParseOptions& o) : lx(src), opts(o) {}

    bool at(Tok k) const { return lx.cur.kind == k; }
    bool at_kw(const char* kw) const { return at(Tok::Ident) && lx.cur.text == kw; }
    Token eat() {
        Token t = lx.cur;
        lx.advance();
        return t;
    }
    Token expect(Tok k, const char* what) {
        if (!at(k)) lx.fail(std::string("expected ") + what);
        return eat();
    }
    std::string expect_ident(const char* what) {
        if (!at(Tok::Ident)) lx.fail(std::string("expected ") + what);
        return eat().text;
    }
    void need_ext(const char* what) {
        if (!opts.extensions)
            lx.fail(std::string(what) + " requires the extension flag");
    }

    Name resolve(const std::string& id) {
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
            auto f = it->find(id);
            if (f != it->end()) return f->second;
        }
        auto f = unit_free.find(id);
        if (f != unit_free.end()) return f->second;
        Name n = fresh_name(id);
        unit_free.emplace(id, n);
        return n;
    }

    Name bind(const std::string& id) {
        Name n = fresh_name(id);
        scopes.back().emplace(id, n);
        return n;
    }

    // ---- processes ----

    ProcPtr parse_par() {
        ProcPtr p = parse_prefix();
        while (at(Tok::Bar)) {
            eat();
            p = p_par(p, parse_prefix());
        }
        return p;
    }

    ProcPtr parse_prefix() {
        if (at(Tok::Nat) && lx.cur.nat == 0) {
            eat();
            return p_inact();
        }
        if (at(Tok::LBrace)) {
            eat();
            ProcPtr p = parse_par();
            expect(Tok::RBrace, "'}'");
            return p;
        }
        if (at(Tok::LParen)) {
            eat();
            ProcPtr p = parse_par();
            expect(Tok::RParen, "')'");
            return p;
        }
        if (at_kw("fwd")) {
            eat();
            Name a = resolve(expect_ident("endpoint"));
            Name b = resolve(expect_ident("endpoint"));
            return p_fwd(a, b);
        }
        if (at_kw("new")) {
            eat();
            expect(Tok::LParen, "'('");
            std::string ia = expect_ident("endpoint");
            expect(Tok::Comma, "','");
            std::string ib = expect_ident("endpoint");
            expect(Tok::RParen, "')'");
            scopes.push_back({});
            Name a = bind(ia), b = bind(ib);
            ProcPtr body = parse_prefix();
            scopes.pop_back();
            return p_restrict(a, b, body);
        }
        if (at_kw("mu")) {
            eat();
            std::string var = expect_ident("recursion variable");
            expect(Tok::LParen, "'('");
            std::vector<Name> params;
            if (!at(Tok::RParen)) {
                params.push_back(resolve(expect_ident("endpoint")));
                while (at(Tok::Comma)) {
                    eat();
                    params.push_back(resolve(expect_ident("endpoint")));
                }
            }
            expect(Tok::RParen, "')'");
            expect(Tok::Semi, "';'");
            std::uint64_t vid = fresh_id();
            rec_scopes.push_back({var, vid, params.size()});
            ProcPtr body = parse_prefix();
            rec_scopes.pop_back();
            ProcPtr def = p_recdef(var, vid, std::move(params), body);
            if (auto bad = find_uncontractive(def))
                lx.fail("non-contractive recursion on " + *bad);
            return def;
        }
        if (at_kw("call")) {
            eat();
            std::string var = expect_ident("recursion variable");
            const RecScope* rs = nullptr;
            for (auto it = rec_scopes.rbegin(); it != rec_scopes.rend(); ++it)
                if (it->name == var) { rs = &*it; break; }
            if (!rs) lx.fail("unbound recursion variable " + var);
            expect(Tok::LParen, "'('");
            std::vector<Name> args;
            if (!at(Tok::RParen)) {
                args.push_back(resolve(expect_ident("endpoint")));
                while (at(Tok::Comma)) {
                    eat();
                    args.push_back(resolve(expect_ident("endpoint")));
                }
            }
            expect(Tok::RParen, "')'");
            return p_reccall(var, rs->var_id, std::move(args));
        }
        if (at(Tok::Query)) {  // ?x[y]  or  ?x![y] . P
            eat();
            need_ext("client request syntax");
            Name x = resolve(expect_ident("endpoint"));
            if (at(Tok::Bang)) {
                eat();
                expect(Tok::LBrack, "'['");
                std::string iy = expect_ident("endpoint");
                expect(Tok::RBrack, "']'");
                expect(Tok::Dot, "'.'");
                scopes.push_back({});
                Name y = bind(iy);
                ProcPtr p = parse_prefix();
                scopes.pop_back();
                return sugar_bound_request(x, y, p);
            }
            expect(Tok::LBrack, "'['");
            Name y = resolve(expect_ident("endpoint"));
            expect(Tok::RBrack, "']'");
            return p_client_req(x, y);
        }
        if (at(Tok::Bang)) {  // !x(y); P
            eat();
            need_ext("server syntax");
            Name x = resolve(expect_ident("endpoint"));
            expect(Tok::LParen, "'('");
            std::string iy = expect_ident("endpoint");
            expect(Tok::RParen, "')'");
            expect(Tok::Semi, "';'");
            scopes.push_back({});
            Name y = bind(iy);
            ProcPtr body = parse_prefix();
            scopes.pop_back();
            return p_server(x, y, body);
        }
        if (!at(Tok::Ident)) lx.fail("expected a process");
        std::string id = eat().text;
        auto d = defs.find(id);
        if (d != defs.end() && at(Tok::LParen)) return parse_def_ref(id, d->second);
        Name x = resolve(id);
        return parse_postfix(x);
    }

    ProcPtr parse_def_ref(const std::string& id, const Definition& def) {
        expect(Tok::LParen, "'('");
        std::vector<Name> args;
        if (!at(Tok::RParen)) {
            args.push_back(resolve(expect_ident("endpoint")));
            while (at(Tok::Comma)) {
                eat();
                args.push_back(resolve(expect_ident("endpoint")));
            }
        }
        expect(Tok::RParen, "')'");
        if (args.size() != def.params.size())
            lx.fail("definition " + id + " expects " + std::to_string(def.params.size()) +
                    " endpoints, got " + std::to_string(args.size()));
        std::map<std::uint64_t, Name> sub;
        for (std::size_t i = 0; i < args.size(); ++i) sub[def.params[i].id] = args[i];
        return substitute(refresh_binders(def.body), sub);
    }

    ProcPtr parse_postfix(const Name& x) {
        if (at(Tok::LBrack)) {  // x[...]
            eat();
            if (at(Tok::RBrack)) {  // x[]
                eat();
                need_ext("empty output");
                return p_empty_out(x);
            }
            Name y = resolve(expect_ident("endpoint"));
            if (at(Tok::Comma)) {  // x[y,z]
                eat();
                Name z = resolve(expect_ident("endpoint"));
                expect(Tok::RBrack, "']'");
                return p_output(x, y, z);
            }
            expect(Tok::RBrack, "']'");
            expect(Tok::Lt, "'<'");  // x[z] < l
            std::string l = expect_ident("label");
            return p_select(x, y, l);
        }
        if (at(Tok::LParen)) {  // x(...) forms
            eat();
            if (at(Tok::RParen)) {  // x(); P
                eat();
                need_ext("empty input");
                expect(Tok::Semi, "';'");
                return p_empty_in(x, parse_prefix());
            }
            std::string iy = expect_ident("endpoint");
            if (at(Tok::Comma)) {  // x(y,z); P
                eat();
                std::string iz = expect_ident("endpoint");
                expect(Tok::RParen, "')'");
                expect(Tok::Semi, "';'");
                scopes.push_back({});
                Name y = bind(iy), z = bind(iz);
                ProcPtr body = parse_prefix();
                scopes.pop_back();
                return p_input(x, y, z, body);
            }
            expect(Tok::RParen, "')'");
            if (at(Tok::Gt)) {  // x(z) > { ... }
                eat();
                scopes.push_back({});
                Name z = bind(iy);
                auto branches = parse_branches();
                scopes.pop_back();
                return p_branch(x, z, std::move(branches));
            }
            lx.fail("expected ';' (input needs two names: x(y,z); P) or '>' after x(z)");
        }
        if (at(Tok::Bang)) {  // x![y] . P  or  x! < l . P
            eat();
            if (at(Tok::LBrack)) {
                eat();
                std::string iy = expect_ident("endpoint");
                expect(Tok::RBrack, "']'");
                expect(Tok::Dot, "'.'");
                scopes.push_back({});
                Name y = bind(iy);
                ProcPtr p = parse_prefix();
                scopes.pop_back();
                return sugar_bound_output(x, y, p);
            }
            expect(Tok::Lt, "'<' or '['");
            std::string l = expect_ident("label");
            expect(Tok::Dot, "'.'");
            return sugar_bound_select(x, l, parse_prefix());
        }
        if (at(Tok::Query)) {  // x?(y); P  or  x? > { ... }
            eat();
            if (at(Tok::LParen)) {
                eat();
                std::string iy = expect_ident("endpoint");
                expect(Tok::RParen, "')'");
                expect(Tok::Semi, "';'");
                scopes.push_back({});
                Name y = bind(iy);
                ProcPtr p = parse_prefix();
                scopes.pop_back();
                return sugar_input(x, y, p);
            }
            expect(Tok::Gt, "'>' or '('");
            return sugar_branch(x, parse_branches());
        }
        if (at(Tok::Lt)) {  // x < l . P
            eat();
            std::string l = expect_ident("label");
            expect(Tok::Dot, "'.'");
            return sugar_bound_select(x, l, parse_prefix());
        }
        if (at(Tok::Gt)) {  // x > { ... }
            eat();
            return sugar_branch(x, parse_branches());
        }
        lx.fail("expected an action after endpoint " + x.ident);
    }

    std::map<std::string, ProcPtr> parse_branches() {
        expect(Tok::LBrace, "'{'");
        std::map<std::string, ProcPtr> bs;
        if (!at(Tok::RBrace)) {
            for (;;) {
                std::string l = expect_ident("label");
                expect(Tok::Colon, "':'");
                if (bs.count(l)) lx.fail("duplicate branch label " + l);
                bs.emplace(l, parse_par());
                if (!at(Tok::Comma)) break;
                eat();
            }
        }
        expect(Tok::RBrace, "'}'");
        return bs;
    }

    // ---- types ----

    PriorityTerm parse_priority_opt() {
        if (!at(Tok::At)) return fresh_pvar();
        eat();
        if (at(Tok::Nat)) return PriorityTerm::lit(eat().nat);
        std::string id = expect_ident("priority");
        if (id == "w") return PriorityTerm::make_omega();
        return pnames.named(id);
    }

    TypePtr parse_type_expr() {
        TypePtr a = parse_type_atom();
        if (at(Tok::Star) || at(Tok::Percent)) {
            bool tensor = at(Tok::Star);
            eat();
            TypePtr b = parse_type_atom();
            PriorityTerm o = parse_priority_opt();
            return tensor ? t_tensor(o, a, b) : t_par(o, a, b);
        }
        return a;
    }

    TypePtr parse_type_atom() {
        if (at_kw("bullet")) {
            eat();
            return t_bullet();
        }
        if (at_kw("mu")) {
            eat();
            std::string v = expect_ident("type variable");
            expect(Tok::Dot, "'.'");
            std::uint64_t vid = fresh_id();
            mu_scopes.push_back({{v, vid}});
            TypePtr body = parse_type_expr();
            mu_scopes.pop_back();
            TypePtr m = t_mu(v, vid, body);
            if (!type_contractive(m)) lx.fail("non-contractive type mu " + v);
            return m;
        }
        if (at(Tok::Nat) && lx.cur.nat == 1) {
            eat();
            need_ext("type 1");
            return t_one(parse_priority_opt());
        }
        if (at_kw("bot")) {
            eat();
            need_ext("type bot");
            return t_bot(parse_priority_opt());
        }
        if (at(Tok::Query)) {
            eat();
            need_ext("type ?");
            TypePtr a = parse_type_atom();
            return t_query(parse_priority_opt(), a);
        }
        if (at(Tok::Bang)) {
            eat();
            need_ext("type !");
            TypePtr a = parse_type_atom();
            return t_bang(parse_priority_opt(), a);
        }
        if (at(Tok::Plus) || at(Tok::Amp)) {
            bool plus = at(Tok::Plus);
            eat();
            expect(Tok::LBrace, "'{'");
            std::map<std::string, TypePtr> rows;
            if (!at(Tok::RBrace)) {
                for (;;) {
                    std::string l = expect_ident("label");
                    expect(Tok::Colon, "':'");
                    rows.emplace(l, parse_type_expr());
                    if (!at(Tok::Comma)) break;
                    eat();
                }
            }
            expect(Tok::RBrace, "'}'");
            PriorityTerm o = parse_priority_opt();
            return plus ? t_plus(o, std::move(rows)) : t_with(o, std::move(rows));
        }
        if (at(Tok::LParen)) {
            eat();
            TypePtr a = parse_type_expr();
            expect(Tok::RParen, "')'");
            return a;
        }
        if (at(Tok::Ident)) {
            std::string v = eat().text;
            for (auto it = mu_scopes.rbegin(); it != mu_scopes.rend(); ++it) {
                auto f = it->find(v);
                if (f != it->end()) return t_tvar(v, f->second);
            }
            lx.fail("unbound type variable " + v);
        }
        lx.fail("expected a type");
    }

    // ---- source unit ----

    SourceUnit parse_unit() {
        SourceUnit unit;
        for (;;) {
            if (at_kw("def")) {
                eat();
                std::string name = expect_ident("definition name");
                if (defs.count(name)) lx.fail("duplicate definition " + name);
                expect(Tok::LParen, "'('");
                std::vector<Name> params;
                scopes.push_back({});
                if (!at(Tok::RParen)) {
                    params.push_back(bind(expect_ident("endpoint")));
                    while (at(Tok::Comma)) {
                        eat();
                        params.push_back(bind(expect_ident("endpoint")));
                    }
                }
                expect(Tok::RParen, "')'");
                expect(Tok::Eq, "'='");
                ProcPtr body = parse_par();
                scopes.pop_back();
                defs.emplace(name, Definition{std::move(params), body});
                continue;
            }
            if (at_kw("type")) {
                eat();
                Name x = resolve(expect_ident("endpoint"));
                expect(Tok::Colon, "':'");
                TypePtr t = parse_type_expr();
                unit.annotations.bind(x, t);
                continue;
            }
            break;
        }
        if (at_kw("main")) {
            eat();
            expect(Tok::Eq, "'='");
        }
        unit.main = parse_par();
        if (!at(Tok::End)) lx.fail("trailing input after process");
        unit.priority_names = pnames;
        return unit;
    }
};

}  // namespace

SourceUnit parse_process(const std::string& text, const ParseOptions& opts) {
    Parser p(text, opts);
    return p.parse_unit();
}

TypePtr parse_type(const std::string& text, PriorityNames& names, const ParseOptions& opts) {
    Parser p(text, opts);
    p.pnames = names;  // share named priority variables across annotations
    TypePtr t = p.parse_type_expr();
    if (!p.at(Tok::End)) p.lx.fail("trailing input after type");
    names = p.pnames;
    return t;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

const std::set<std::string> kKeywords = {"new", "fwd", "mu", "call", "def", "main", "type"};

struct NameTable {
    std::map<std::uint64_t, std::string> printed;
    std::map<std::string, std::uint64_t> taken;  // printed string -> id

    std::string assign(const Name& n) {
        auto it = printed.find(n.id);
        if (it != printed.end()) return it->second;
        std::string base = n.ident.empty() ? "x" : n.ident;
        if (kKeywords.count(base)) base += "_";
        std::string cand = base;
        for (int k = 1; taken.count(cand); ++k) cand = base + "_" + std::to_string(k);
        taken.emplace(cand, n.id);
        printed.emplace(n.id, cand);
        return cand;
    }
};

void collect_names(const ProcPtr& p, NameTable& tab) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, POutput>) {
                tab.assign(n.subj); tab.assign(n.payload); tab.assign(n.cont);
            } else if constexpr (std::is_same_v<T, PInput>) {
                tab.assign(n.subj); tab.assign(n.payload); tab.assign(n.cont);
                collect_names(n.body, tab);
            } else if constexpr (std::is_same_v<T, PSelect>) {
                tab.assign(n.subj); tab.assign(n.cont);
            } else if constexpr (std::is_same_v<T, PBranch>) {
                tab.assign(n.subj); tab.assign(n.cont);
                for (auto& [l, b] : n.branches) collect_names(b, tab);
            } else if constexpr (std::is_same_v<T, PRestrict>) {
                tab.assign(n.a); tab.assign(n.b);
                collect_names(n.body, tab);
            } else if constexpr (std::is_same_v<T, PPar>) {
                collect_names(n.left, tab);
                collect_names(n.right, tab);
            } else if constexpr (std::is_same_v<T, PFwd>) {
                tab.assign(n.a); tab.assign(n.b);
            } else if constexpr (std::is_same_v<T, PRecDef>) {
                for (auto& x : n.params) tab.assign(x);
                collect_names(n.body, tab);
            } else if constexpr (std::is_same_v<T, PRecCall>) {
                for (auto& x : n.args) tab.assign(x);
            } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                tab.assign(n.subj);
            } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                tab.assign(n.subj);
                collect_names(n.body, tab);
            } else if constexpr (std::is_same_v<T, PClientReq>) {
                tab.assign(n.subj); tab.assign(n.payload);
            } else if constexpr (std::is_same_v<T, PServer>) {
                tab.assign(n.subj); tab.assign(n.payload);
                collect_names(n.body, tab);
            }
        },
        p->node);
}

struct RecTable {
    std::map<std::uint64_t, std::string> printed;
    std::set<std::string> taken;
    std::string assign(const std::string& base0, std::uint64_t id) {
        auto it = printed.find(id);
        if (it != printed.end()) return it->second;
        std::string base = base0.empty() ? "X" : base0;
        std::string cand = base;
        for (int k = 1; taken.count(cand); ++k) cand = base + "_" + std::to_string(k);
        taken.insert(cand);
        printed.emplace(id, cand);
        return cand;
    }
};

struct ProcPrinter {
    NameTable names;
    RecTable recs;

    std::string nm(const Name& n) { return names.assign(n); }

    // A body position: brace if the body is a parallel composition.
    std::string body(const ProcPtr& p) {
        if (std::holds_alternative<PPar>(p->node)) return "{ " + print(p) + " }";
        return print(p);
    }

    std::string print(const ProcPtr& p) {
        return std::visit(
            [&](const auto& n) -> std::string {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, POutput>) {
                    return nm(n.subj) + "[" + nm(n.payload) + "," + nm(n.cont) + "]";
                } else if constexpr (std::is_same_v<T, PInput>) {
                    return nm(n.subj) + "(" + nm(n.payload) + "," + nm(n.cont) + "); " + body(n.body);
                } else if constexpr (std::is_same_v<T, PSelect>) {
                    return nm(n.subj) + "[" + nm(n.cont) + "] < " + n.label;
                } else if constexpr (std::is_same_v<T, PBranch>) {
                    std::string s = nm(n.subj) + "(" + nm(n.cont) + ") > { ";
                    bool first = true;
                    for (auto& [l, b] : n.branches) {
                        if (!first) s += ", ";
                        first = false;
                        s += l + ": " + print(b);
                    }
                    return s + " }";
                } else if constexpr (std::is_same_v<T, PRestrict>) {
                    return "new (" + nm(n.a) + "," + nm(n.b) + ") " + body(n.body);
                } else if constexpr (std::is_same_v<T, PPar>) {
                    return print(n.left) + " | " + print(n.right);
                } else if constexpr (std::is_same_v<T, PInact>) {
                    return "0";
                } else if constexpr (std::is_same_v<T, PFwd>) {
                    return "fwd " + nm(n.a) + " " + nm(n.b);
                } else if constexpr (std::is_same_v<T, PRecDef>) {
                    std::string s = "mu " + recs.assign(n.var, n.var_id) + "(";
                    for (std::size_t i = 0; i < n.params.size(); ++i)
                        s += (i ? "," : "") + nm(n.params[i]);
                    return s + "); " + body(n.body);
                } else if constexpr (std::is_same_v<T, PRecCall>) {
                    std::string s = "call " + recs.assign(n.var, n.var_id) + "(";
                    for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? "," : "") + nm(n.args[i]);
                    return s + ")";
                } else if constexpr (std::is_same_v<T, PEmptyOut>) {
                    return nm(n.subj) + "[]";
                } else if constexpr (std::is_same_v<T, PEmptyIn>) {
                    return nm(n.subj) + "(); " + body(n.body);
                } else if constexpr (std::is_same_v<T, PClientReq>) {
                    return "?" + nm(n.subj) + "[" + nm(n.payload) + "]";
                } else if constexpr (std::is_same_v<T, PServer>) {
                    return "!" + nm(n.subj) + "(" + nm(n.payload) + "); " + body(n.body);
                }
            },
            p->node);
    }
};

}  // namespace

std::string print_process(const ProcPtr& p) {
    ProcPrinter pr;
    collect_names(p, pr.names);
    return pr.print(p);
}

std::string print_priority(const PriorityTerm& t, const PriorityNames* names) {
    if (t.is_omega()) return "w";
    if (t.is_lit()) return std::to_string(t.offset);
    std::string base = "p" + std::to_string(*t.var);
    if (names) {
        if (auto n = names->name_of(*t.var)) base = *n;
    }
    if (t.offset) base += "+" + std::to_string(t.offset);
    return base;
}

namespace {

struct TypePrinter {
    const PriorityNames* names;
    RecTable recs;

    std::string pr(const PriorityTerm& t) { return print_priority(t, names); }

    std::string atom(const TypePtr& t) {
        if (std::holds_alternative<TTensor>(t->node) || std::holds_alternative<TPar>(t->node) ||
            std::holds_alternative<TMu>(t->node))
            return "(" + print(t) + ")";
        return print(t);
    }

    std::string rows(const std::map<std::string, TypePtr>& bs, bool open) {
        std::string s = "{";
        bool first = true;
        for (auto& [l, b] : bs) {
            s += (first ? " " : ", ") + l + ": " + print(b);
            first = false;
        }
        if (open) s += first ? " .." : ", ..";
        return s + " }";
    }

    std::string print(const TypePtr& t) {
        return std::visit(
            [&](const auto& n) -> std::string {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, TTensor>)
                    return atom(n.payload) + " * " + atom(n.cont) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TPar>)
                    return atom(n.payload) + " % " + atom(n.cont) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TPlus>)
                    return "+" + rows(n.branches, n.row_open) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TWith>)
                    return "&" + rows(n.branches, false) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TBullet>)
                    return "bullet";
                else if constexpr (std::is_same_v<T, TMu>)
                    return "mu " + recs.assign(n.var, n.var_id) + ". " + print(n.body);
                else if constexpr (std::is_same_v<T, TVarRef>)
                    return recs.assign(n.var, n.var_id);
                else if constexpr (std::is_same_v<T, TOne>)
                    return "1 @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TBot>)
                    return "bot @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TQuery>)
                    return "? " + atom(n.payload) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TBang>)
                    return "! " + atom(n.payload) + " @ " + pr(n.pr);
                else if constexpr (std::is_same_v<T, TMeta>)
                    return "?T" + std::to_string(n.id);
            },
            t->node);
    }
};

}  // namespace

std::string print_type(const TypePtr& t, const PriorityNames* names) {
    TypePrinter tp{names, {}};
    return tp.print(t);
}

std::string print_name(const Name& n) { return n.ident; }

}  // namespace apcp
