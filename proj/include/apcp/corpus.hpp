#pragma once

// Programmatic generators for the worked examples: Milner's cyclic scheduler,
// the ever-growing ring, and the node configurations L1/L2/L3. Used by the
// CLI (corpus: URIs) and by the test suites.

#include "apcp/ast.hpp"
#include "apcp/semantics.hpp"
#include "apcp/typing.hpp"

namespace apcp {

struct CorpusEntry {
    std::string name;
    std::map<std::string, std::string> params;
    ProcPtr process;  // closed form
    bool expect_certificate = false;
    Outcome expected_outcome = Outcome::FuelExhausted;
    std::string notes;
    bool extensions = false;    // needs the extension flag
    bool experimental = false;  // excluded from acceptance (scheduler n=1)
};

// ---- building blocks --------------------------------------------------------

/// Leader A1: signals start to its successor and its worker, awaits the
/// worker's ack, signals next, then awaits start/next from its predecessor.
ProcPtr milner_leader(const Name& a1, const Name& cn, const Name& d1);
/// Follower A_{i+1}: awaits start, relays it, awaits ack and next, relays next.
ProcPtr milner_follower(const Name& a, const Name& c, const Name& d);
/// Minimal worker: awaits start, acknowledges, repeats.
ProcPtr milner_worker(const Name& b);
/// One ring node: receives an endpoint on x, spawns two connected copies,
/// sends a fresh endpoint on y.
ProcPtr ring_def(const Name& x, const Name& y);

enum class NodeKind { A, B };
/// Replicated node server: receives a session c, receives endpoints x and y
/// on it; kind A outputs on x before inputting on y, kind B inputs first.
ProcPtr node_server(NodeKind k, const Name& c_srv);

// ---- closed corpus entries --------------------------------------------------

CorpusEntry milner_scheduler(std::size_t n);  // throws std::invalid_argument on n == 0
CorpusEntry ring();
CorpusEntry node_l1(NodeKind x);
CorpusEntry node_l2(NodeKind x, NodeKind y);
CorpusEntry node_l3(NodeKind x, NodeKind y, NodeKind z);

/// Lookup by CLI URI name + params (milner, ring, L1, L2, L3).
std::optional<CorpusEntry> corpus_get(const std::string& name,
                                      const std::map<std::string, std::string>& params);

/// Every entry at small parameters (milner n=1..3, ring, all L1/L2/L3).
std::vector<CorpusEntry> corpus_all();

// ---- open variants for declared-type checking --------------------------------

struct OpenChecked {
    ProcPtr process;         // free endpoints
    TypingContext declared;  // named priority variables shared across entries
    PriorityNames names;
    Assignment paper_assignment;  // for scheduler: o_i = k_i = p_i = i, r_i = i+2
};

/// The scheduler's parallel body with every a/b/c/d endpoint left free and
/// declared with the published recursive types.
OpenChecked milner_open(std::size_t n);
/// Leader alone with its three endpoints declared.
OpenChecked leader_open(std::size_t n);
/// One ring node with both endpoints declared at a single priority class.
OpenChecked ring_open();

const char* node_kind_name(NodeKind k);

}  // namespace apcp
