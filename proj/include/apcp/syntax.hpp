#pragma once

// Concrete syntax: lexer/parser for .apcp files, syntactic-sugar lowering,
// and round-tripping printers. The grammar is documented in README.md.

#include "apcp/ast.hpp"

namespace apcp {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

/// A parsed source unit: named definitions are expanded at resolution time,
/// so only the annotations and the main (desugared, core) process remain.
struct SourceUnit {
    ProcPtr main;
    TypingContext annotations;      // `type x : A` declarations for free endpoints
    PriorityNames priority_names;   // named priority variables used in annotations
};

struct ParseOptions {
    bool extensions = false;  // allow x[], x(); P, ?x[y], !x(y); P and 1/bot/?/! types
};

SourceUnit parse_process(const std::string& text, const ParseOptions& opts = {});

/// Parse a type expression alone (annotation syntax).
TypePtr parse_type(const std::string& text, PriorityNames& names, const ParseOptions& opts = {});

// -- sugar lowering -----------------------------------------------------------
// These builders implement the derivable actions and prefixes; the parser
// lowers surface sugar through them, and the corpus uses them directly.
// Each introduces the fresh restrictions of the definition.

/// bound output: x![y] . P
ProcPtr sugar_bound_output(const Name& x, const Name& y, const ProcPtr& p);
/// bound selection: x < l . P
ProcPtr sugar_bound_select(const Name& x, const std::string& label, const ProcPtr& p);
/// input rebinding the subject: x?(y); P
ProcPtr sugar_input(const Name& x, const Name& y, const ProcPtr& p);
/// branch rebinding the subject: x > { l: P }
ProcPtr sugar_branch(const Name& x, std::map<std::string, ProcPtr> branches);
/// bound client request: ?x![y] . P   (extension)
ProcPtr sugar_bound_request(const Name& x, const Name& y, const ProcPtr& p);
/// send an existing endpoint through a forwarder: x<y> . P
ProcPtr sugar_send_name(const Name& x, const Name& y, const ProcPtr& p);

// -- printing ------------------------------------------------------------------

std::string print_process(const ProcPtr& p);
std::string print_type(const TypePtr& t, const PriorityNames* names = nullptr);
std::string print_priority(const PriorityTerm& t, const PriorityNames* names = nullptr);
std::string print_name(const Name& n);

}  // namespace apcp
