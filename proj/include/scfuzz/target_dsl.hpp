#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scfuzz/trace.hpp"
#include "scfuzz/value_model.hpp"

namespace scfuzz {

/// Syntax or static-validation error in a target source file.
struct DslError : std::runtime_error {
    int line = 0;
    int column = 0;
    DslError(int l, int c, const std::string& msg)
        : std::runtime_error("line " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
          line(l), column(c) {}
};

struct Expr {
    enum class Kind { Var, Literal };
    Kind kind = Kind::Var;
    std::string var;
    Scalar literal;
};

struct Cond {
    enum class Kind { TypeCheck, HasAttr, Eq };
    Kind kind = Cond::Kind::TypeCheck;
    Expr target;
    std::string type_name;  // TypeCheck
    bool exact = false;     // TypeCheck
    std::string key;        // HasAttr
    Scalar literal;         // Eq
};

struct Stmt {
    enum class Kind { If, Assign, Incref, Decref, Return, Crash, Abort };
    enum class AccessKind { Get, GetIncref, InvokeIncref };

    Kind kind = Kind::Crash;
    int line = 0;

    // If
    Cond cond;
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;

    // Assign
    std::string var;
    AccessKind access = AccessKind::Get;
    Expr target;
    std::string key;

    // Incref / Decref / Return
    Expr expr;
    bool has_expr = false;

    // Abort
    std::string message;
};

/// A parsed simulated native method: straight-line branch trees over type
/// checks, attribute extraction and payload-equality conditions.
struct TargetProgram {
    std::string name;
    std::vector<std::string> params;
    std::vector<Stmt> body;
    std::vector<Scalar> literals;  // source order; duplicates kept

    /// Number of root-to-leaf paths through the branch tree.
    int static_path_count() const;

    /// Every type name referenced by a typecheck condition.
    std::set<std::string> referenced_types() const;
};

/// Parses source text. Grammar (see docs/formats.md):
///   method NAME(p1, ...) { stmt* }
/// Statements: if cond { ... } [else { ... }], x = getattr(expr, "key"),
/// x = getattr_incref(expr, "key"), x = invoke_incref(expr, "key"),
/// incref expr, decref expr, return expr, crash, abort "msg".
/// Conditions: typecheck(expr, type[, exact]), hasattr(expr, "key"),
/// eq(expr, literal). '#' starts a comment.
/// Throws DslError on syntax errors, use-before-assign and unknown names.
TargetProgram parse_program(const std::string& text);

/// All scalar literals harvestable from the source as generation seeds:
/// attribute keys, eq comparands and returned literals. Abort diagnostics
/// are not inputs and are skipped.
std::set<Scalar> collect_literals(const TargetProgram& program);

enum class OutcomeKind { Returned, Crashed, Aborted };

struct ExecutionResult {
    std::vector<ApiCallRecord> trace;
    OutcomeKind outcome = OutcomeKind::Returned;
    std::string message;                       // Aborted only
    std::optional<std::int64_t> returned_id;   // Returned with a value
    std::map<std::int64_t, std::int64_t> ledger;  // net refcount deltas
    std::map<std::int64_t, std::int64_t> leaks;   // positive deltas at normal
                                                  // return, returned id excluded
};

/// Deterministic evaluation. Each typecheck emits one TC record; each
/// hasattr/getattr/invoke emits one AG record; eq conditions emit nothing.
/// Failed extraction used as a value aborts (a raised exception), never a
/// host fault. Inputs must already carry their identity ids; the universe
/// is non-const only because literal operands materialize fresh ids.
ExecutionResult execute(const TargetProgram& program, const std::vector<ValuePtr>& inputs,
                        Universe& universe);

}  // namespace scfuzz
