// Command-line driver: check (deadlock-freedom certification), run (trace a
// reduction), gen (emit corpus processes as .apcp files), explore (exhaustive
// state-space audit).

#include "apcp/corpus.hpp"
#include "apcp/semantics.hpp"
#include "apcp/syntax.hpp"
#include "apcp/typing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _WIN32
#include <io.h>
#define APCP_ISATTY _isatty(_fileno(stdout))
#else
#include <unistd.h>
#define APCP_ISATTY isatty(fileno(stdout))
#endif

namespace {

using namespace apcp;
using nlohmann::json;

struct Input {
    ProcPtr process;
    TypingContext annotations;
    PriorityNames names;
    bool is_corpus = false;
    bool needs_ext = false;
    std::string label;
};

std::map<std::string, std::string> parse_uri_params(const std::string& q) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < q.size()) {
        std::size_t amp = q.find('&', pos);
        std::string kv = q.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            out[kv] = "";
        else
            out[kv.substr(0, eq)] = kv.substr(eq + 1);
        if (amp == std::string::npos) break;
        pos = amp + 1;
    }
    return out;
}

Input load(const std::string& spec, bool ext) {
    Input in;
    if (spec.rfind("corpus:", 0) == 0) {
        std::string rest = spec.substr(7);
        std::size_t q = rest.find('?');
        std::string name = rest.substr(0, q == std::string::npos ? rest.size() : q);
        auto params = q == std::string::npos ? std::map<std::string, std::string>{}
                                             : parse_uri_params(rest.substr(q + 1));
        auto entry = corpus_get(name, params);
        if (!entry) throw std::runtime_error("unknown corpus entry: " + name);
        if (entry->extensions && !ext)
            throw std::runtime_error("corpus entry " + name + " requires --ext");
        in.process = entry->process;
        in.is_corpus = true;
        in.needs_ext = entry->extensions;
        in.label = spec;
        if (entry->experimental)
            std::cerr << "warning: " << spec << " is experimental (" << entry->notes << ")\n";
        return in;
    }
    std::ifstream f(spec);
    if (!f) throw std::runtime_error("cannot open " + spec);
    std::stringstream ss;
    ss << f.rdbuf();
    ParseOptions popts;
    popts.extensions = ext;
    SourceUnit unit = parse_process(ss.str(), popts);
    in.process = unit.main;
    in.annotations = unit.annotations;
    in.names = unit.priority_names;
    in.label = spec;
    return in;
}

json constraint_json(const Constraint& c, const PriorityNames* names) {
    return json{{"kind", c.kind == Constraint::Kind::Equal ? "equal" : "strict_less"},
                {"lhs", print_priority(c.lhs, names)},
                {"rhs", print_priority(c.rhs, names)},
                {"rule", c.prov.rule},
                {"path", c.prov.path},
                {"endpoint", c.prov.endpoint}};
}

int cmd_check(const Input& in, bool ext, bool human) {
    TypingOptions topts{ext};
    // Annotated open source units go through declared-type checking; closed
    // inputs are certified directly.
    if (!in.annotations.empty()) {
        try {
            Judgment j = check(in.process, in.annotations, topts, &in.names);
            SolveResult s = solve(j.constraints);
            if (s.sat) {
                if (human) {
                    std::cout << "checked: satisfiable priority assignment\n";
                    for (auto& [n, t] : j.gamma.entries)
                        std::cout << "  " << n.ident << " : "
                                  << print_type(concretize(t, s.assignment), &in.names) << "\n";
                } else {
                    json a = json::object();
                    for (auto& [v, val] : s.assignment)
                        a[print_priority(PriorityTerm::pvar(v), &in.names)] =
                            val.omega ? json("w") : json(val.value);
                    std::cout << json{{"record", "certificate"}, {"input", in.label},
                                      {"assignment", a}}
                                     .dump()
                              << "\n";
                }
                return 0;
            }
            if (human) {
                std::cout << "not certified: " << s.core.reason << "\n";
                for (auto& c : s.core.constraints)
                    std::cout << "  " << constraint_json(c, &in.names).dump() << "\n";
            } else {
                json core = json::array();
                for (auto& c : s.core.constraints) core.push_back(constraint_json(c, &in.names));
                std::cout << json{{"record", "diagnosis"}, {"input", in.label}, {"kind", "unsat"},
                                  {"reason", s.core.reason}, {"core", core}}
                                 .dump()
                          << "\n";
            }
            return 1;
        } catch (const TypeError& e) {
            if (human)
                std::cout << "not certified: " << e.what() << "\n";
            else
                std::cout << json{{"record", "diagnosis"}, {"input", in.label},
                                  {"kind", "typing-error"}, {"reason", e.what()}}
                                 .dump()
                          << "\n";
            return 1;
        }
    }
    CertifyResult r = certify_deadlock_free(in.process, topts);
    if (auto* cert = std::get_if<Certificate>(&r)) {
        if (human) {
            std::cout << "certified deadlock free (" << cert->constraints.size()
                      << " constraints)\n";
            for (auto& [v, val] : cert->assignment)
                std::cout << "  p" << v << " = " << (val.omega ? "w" : std::to_string(val.value))
                          << "\n";
        } else {
            json a = json::object();
            for (auto& [v, val] : cert->assignment)
                a["p" + std::to_string(v)] = val.omega ? json("w") : json(val.value);
            std::cout << json{{"record", "certificate"}, {"input", in.label}, {"assignment", a},
                              {"constraints", cert->constraints.size()}}
                             .dump()
                      << "\n";
        }
        return 0;
    }
    const Diagnosis& d = std::get<Diagnosis>(r);
    if (human) {
        std::cout << "not certified (" << d.kind << "): " << d.message << "\n";
        for (auto& c : d.core.constraints)
            std::cout << "  " << constraint_json(c, nullptr).dump() << "\n";
    } else {
        json core = json::array();
        for (auto& c : d.core.constraints) core.push_back(constraint_json(c, nullptr));
        std::cout << json{{"record", "diagnosis"}, {"input", in.label}, {"kind", d.kind},
                          {"reason", d.message}, {"core", core}}
                         .dump()
                  << "\n";
    }
    return 1;
}

int cmd_run(const Input& in, bool ext, bool kappa, const std::string& policy, std::uint64_t seed,
            std::size_t fuel, bool human) {
    SemOptions sopts{ext};
    RunPolicy rp;
    rp.deterministic = policy != "seeded-random";
    rp.seed = seed;
    Trace t = run(in.process, rp, fuel, kappa, sopts);
    if (human) {
        std::cout << "initial: " << print_process(t.initial) << "\n";
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            auto& s = t.steps[i];
            std::cout << (i + 1) << ". " << rule_tag_name(s.redex.rule) << " on ("
                      << s.redex.x.ident << "," << s.redex.y.ident << ")";
            if (!s.redex.label.empty()) std::cout << " label " << s.redex.label;
            std::cout << "\n   " << print_process(s.result) << "\n";
        }
        std::cout << "outcome: " << outcome_name(t.outcome) << " after " << t.steps.size()
                  << " steps\n";
    } else {
        for (auto& line : trace_records(t)) std::cout << line << "\n";
    }
    switch (t.outcome) {
        case Outcome::ReachedInaction: return 0;
        case Outcome::Stuck: return 2;
        case Outcome::FuelExhausted: return 3;
    }
    return 3;
}

void write_entry(const CorpusEntry& e, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "# corpus: " << e.name;
    for (auto& [k, v] : e.params) f << " " << k << "=" << v;
    f << "\n";
    if (e.extensions) f << "# parse with --ext\n";
    if (!e.notes.empty()) f << "# " << e.notes << "\n";
    f << print_process(e.process) << "\n";
}

int cmd_gen(const std::string& spec, const std::string& out) {
    if (spec.rfind("corpus:", 0) != 0) throw std::runtime_error("gen expects a corpus: URI");
    std::string rest = spec.substr(7);
    std::size_t q = rest.find('?');
    std::string name = rest.substr(0, q == std::string::npos ? rest.size() : q);
    auto params = q == std::string::npos ? std::map<std::string, std::string>{}
                                         : parse_uri_params(rest.substr(q + 1));
    // L3 without a full kind triple enumerates all eight configurations
    if ((name == "L3" || name == "l3") && params.size() < 3) {
        std::filesystem::path dir(out.empty() ? "." : out);
        std::filesystem::create_directories(dir);
        for (NodeKind x : {NodeKind::A, NodeKind::B})
            for (NodeKind y : {NodeKind::A, NodeKind::B})
                for (NodeKind z : {NodeKind::A, NodeKind::B}) {
                    CorpusEntry e = node_l3(x, y, z);
                    std::string kinds = std::string(node_kind_name(x)) + node_kind_name(y) +
                                        node_kind_name(z);
                    write_entry(e, dir / ("L3_" + kinds + ".apcp"));
                    std::cout << (dir / ("L3_" + kinds + ".apcp")).string() << "\n";
                }
        return 0;
    }
    auto entry = corpus_get(name, params);
    if (!entry) throw std::runtime_error("unknown corpus entry: " + name);
    if (entry->experimental)
        std::cerr << "warning: " << spec << " is experimental (" << entry->notes << ")\n";
    std::string path = out.empty() ? entry->name + ".apcp" : out;
    write_entry(*entry, path);
    std::cout << path << "\n";
    return 0;
}

int cmd_explore(const Input& in, bool ext, bool kappa, std::size_t max_states, bool human) {
    SemOptions sopts{ext};
    ExploreResult r = explore(in.process, max_states, kappa, sopts);
    if (human) {
        std::cout << "states: " << r.states << ", transitions: " << r.transitions
                  << ", complete: " << (r.complete ? "yes" : "no") << ", stuck: " << r.stuck.size()
                  << "\n";
        for (auto& s : r.stuck) std::cout << "  stuck: " << print_process(s) << "\n";
    } else {
        json j{{"record", "explore"}, {"input", in.label}, {"states", r.states},
               {"transitions", r.transitions}, {"complete", r.complete},
               {"stuck", r.stuck.size()}};
        std::cout << j.dump() << "\n";
        for (auto& s : r.stuck)
            std::cout << json{{"record", "stuck_state"}, {"process", print_process(s)}}.dump()
                      << "\n";
    }
    return r.stuck.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"apcp: priority-typed asynchronous session processes"};
    app.require_subcommand(1);

    std::string input, format = "auto", policy = "deterministic", out;
    bool ext = false, kappa = false;
    std::uint64_t seed = 0;
    std::size_t fuel = 1000, max_states = 10000;

    auto add_common = [&](CLI::App* c, bool with_input = true) {
        if (with_input) c->add_option("input", input, "file path or corpus:<name>?k=v&...")->required();
        c->add_flag("--ext", ext, "enable explicit closing and replicated servers");
        c->add_option("--format", format, "human | records (default: records when piped)");
    };

    auto* chk = app.add_subcommand("check", "certify deadlock freedom or explain failure");
    add_common(chk);

    auto* rn = app.add_subcommand("run", "reduce under a scheduling policy, emit a trace");
    add_common(rn);
    rn->add_flag("--kappa", kappa, "enable commuting conversions (open processes)");
    rn->add_option("--policy", policy, "deterministic | seeded-random");
    rn->add_option("--seed", seed, "seed for seeded-random policy");
    rn->add_option("--fuel", fuel, "maximum number of reduction steps");

    auto* gn = app.add_subcommand("gen", "write a corpus process to an .apcp file");
    gn->add_option("input", input, "corpus:<name>?k=v&...")->required();
    gn->add_option("-o,--out", out, "output file (or directory for L3 enumeration)");

    auto* ex = app.add_subcommand("explore", "exhaustive state-space audit");
    add_common(ex);
    ex->add_flag("--kappa", kappa, "enable commuting conversions");
    ex->add_option("--max-states", max_states, "state cap for exploration");

    CLI11_PARSE(app, argc, argv);

    bool human = format == "human" || (format == "auto" && APCP_ISATTY);
    if (format != "auto" && format != "human" && format != "records") {
        std::cerr << "unknown format: " << format << "\n";
        return 64;
    }
    if (policy == "seeded-random" && !rn->count("--seed") && rn->parsed()) {
        std::cerr << "seeded-random policy requires --seed\n";
        return 64;
    }

    try {
        if (gn->parsed()) return cmd_gen(input, out);
        Input in = load(input, ext);
        if (chk->parsed()) return cmd_check(in, ext || in.needs_ext, human);
        if (rn->parsed()) return cmd_run(in, ext || in.needs_ext, kappa, policy, seed, fuel, human);
        if (ex->parsed()) return cmd_explore(in, ext || in.needs_ext, kappa, max_states, human);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 64;
    }
    return 64;
}
