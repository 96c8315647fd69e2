#include "scfuzz/target_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

namespace scfuzz {

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
    enum class Kind { Ident, Int, Float, Str, Bytes, Punct, End };
    Kind kind = Kind::End;
    std::string text;       // identifier, punct, or decoded string body
    std::int64_t int_val = 0;
    double float_val = 0;
    int line = 1, column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw DslError(line_, col_, msg); }

    char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void bump() {
        if (pos_ >= text_.size()) return;
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        for (;;) {
            while (std::isspace(static_cast<unsigned char>(cur()))) bump();
            if (cur() == '#') {
                while (cur() && cur() != '\n') bump();
                continue;
            }
            break;
        }
    }

    std::string lex_string_body() {
        char quote = cur();
        bump();
        std::string out;
        while (cur() && cur() != quote) {
            char c = cur();
            if (c == '\n') fail("unterminated string");
            if (c == '\\') {
                bump();
                switch (cur()) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '\\': out += '\\'; break;
                    case '"': out += '"'; break;
                    case '\'': out += '\''; break;
                    case '0': out += '\0'; break;
                    default: fail("unknown escape");
                }
                bump();
            } else {
                out += c;
                bump();
            }
        }
        if (!cur()) fail("unterminated string");
        bump();
        return out;
    }

    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.line = line_;
        tok_.column = col_;
        char c = cur();
        if (!c) {
            tok_.kind = Token::Kind::End;
            return;
        }
        if (c == '"' || c == '\'') {
            tok_.kind = Token::Kind::Str;
            tok_.text = lex_string_body();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') {
                ident += cur();
                bump();
            }
            if (ident == "b" && (cur() == '"' || cur() == '\'')) {
                tok_.kind = Token::Kind::Bytes;
                tok_.text = lex_string_body();
                return;
            }
            tok_.kind = Token::Kind::Ident;
            tok_.text = ident;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            std::string num;
            if (c == '-') {
                num += c;
                bump();
            }
            bool is_float = false;
            while (std::isdigit(static_cast<unsigned char>(cur()))) {
                num += cur();
                bump();
            }
            if (cur() == '.') {
                is_float = true;
                num += cur();
                bump();
                while (std::isdigit(static_cast<unsigned char>(cur()))) {
                    num += cur();
                    bump();
                }
            }
            if (cur() == 'e' || cur() == 'E') {
                is_float = true;
                num += cur();
                bump();
                if (cur() == '+' || cur() == '-') {
                    num += cur();
                    bump();
                }
                while (std::isdigit(static_cast<unsigned char>(cur()))) {
                    num += cur();
                    bump();
                }
            }
            if (is_float) {
                tok_.kind = Token::Kind::Float;
                tok_.float_val = std::stod(num);
            } else {
                tok_.kind = Token::Kind::Int;
                auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), tok_.int_val);
                if (ec != std::errc{}) fail("integer literal out of range");
            }
            return;
        }
        static const std::string punct = "(){},=";
        if (punct.find(c) != std::string::npos) {
            tok_.kind = Token::Kind::Punct;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    TargetProgram parse() {
        expect_ident("method");
        prog_.name = expect(Token::Kind::Ident, "method name").text;
        expect_punct("(");
        if (!at_punct(")")) {
            for (;;) {
                prog_.params.push_back(expect(Token::Kind::Ident, "parameter name").text);
                if (at_punct(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        for (const auto& p : prog_.params) {
            if (std::count(prog_.params.begin(), prog_.params.end(), p) > 1) {
                throw DslError(1, 1, "duplicate parameter '" + p + "'");
            }
        }
        prog_.body = parse_block();
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::End) {
            throw DslError(t.line, t.column, "trailing input after method body");
        }
        std::set<std::string> defined(prog_.params.begin(), prog_.params.end());
        check_defined(prog_.body, defined);
        return std::move(prog_);
    }

private:
    Token expect(Token::Kind kind, const char* what) {
        Token t = lex_.take();
        if (t.kind != kind) throw DslError(t.line, t.column, std::string("expected ") + what);
        return t;
    }

    void expect_punct(const std::string& p) {
        Token t = lex_.take();
        if (t.kind != Token::Kind::Punct || t.text != p) {
            throw DslError(t.line, t.column, "expected '" + p + "'");
        }
    }

    void expect_ident(const std::string& word) {
        Token t = lex_.take();
        if (t.kind != Token::Kind::Ident || t.text != word) {
            throw DslError(t.line, t.column, "expected '" + word + "'");
        }
    }

    bool at_punct(const std::string& p) const {
        return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
    }

    bool at_ident(const std::string& w) const {
        return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == w;
    }

    Scalar parse_literal() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Kind::Int: return Scalar{t.int_val};
            case Token::Kind::Float: return Scalar{t.float_val};
            case Token::Kind::Str: return Scalar{t.text};
            case Token::Kind::Bytes: return Scalar{BytesLit{t.text}};
            case Token::Kind::Ident:
                if (t.text == "true") return Scalar{true};
                if (t.text == "false") return Scalar{false};
                [[fallthrough]];
            default:
                throw DslError(t.line, t.column, "expected a literal");
        }
    }

    Expr parse_expr() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Ident && t.text != "true" && t.text != "false") {
            Expr e;
            e.kind = Expr::Kind::Var;
            e.var = lex_.take().text;
            return e;
        }
        Expr e;
        e.kind = Expr::Kind::Literal;
        e.literal = parse_literal();
        prog_.literals.push_back(e.literal);
        return e;
    }

    std::string parse_key() {
        Token t = expect(Token::Kind::Str, "quoted key");
        if (t.text.empty()) throw DslError(t.line, t.column, "empty attribute key");
        if (t.text.find(' ') != std::string::npos) {
            throw DslError(t.line, t.column, "attribute keys cannot contain spaces");
        }
        prog_.literals.push_back(Scalar{t.text});
        return t.text;
    }

    Cond parse_cond() {
        Token t = expect(Token::Kind::Ident, "condition");
        Cond c;
        if (t.text == "typecheck") {
            c.kind = Cond::Kind::TypeCheck;
            expect_punct("(");
            c.target = parse_expr();
            expect_punct(",");
            c.type_name = expect(Token::Kind::Ident, "type name").text;
            if (at_punct(",")) {
                lex_.take();
                expect_ident("exact");
                c.exact = true;
            }
            expect_punct(")");
        } else if (t.text == "hasattr") {
            c.kind = Cond::Kind::HasAttr;
            expect_punct("(");
            c.target = parse_expr();
            expect_punct(",");
            c.key = parse_key();
            expect_punct(")");
        } else if (t.text == "eq") {
            c.kind = Cond::Kind::Eq;
            expect_punct("(");
            c.target = parse_expr();
            expect_punct(",");
            c.literal = parse_literal();
            prog_.literals.push_back(c.literal);
            expect_punct(")");
        } else {
            throw DslError(t.line, t.column, "unknown condition '" + t.text + "'");
        }
        return c;
    }

    std::vector<Stmt> parse_block() {
        expect_punct("{");
        std::vector<Stmt> body;
        while (!at_punct("}")) {
            body.push_back(parse_stmt());
        }
        lex_.take();
        return body;
    }

    Stmt parse_stmt() {
        Token t = lex_.take();
        if (t.kind != Token::Kind::Ident) {
            throw DslError(t.line, t.column, "expected a statement");
        }
        Stmt s;
        s.line = t.line;
        if (t.text == "if") {
            s.kind = Stmt::Kind::If;
            s.cond = parse_cond();
            s.then_body = parse_block();
            if (at_ident("else")) {
                lex_.take();
                s.else_body = parse_block();
            }
            return s;
        }
        if (t.text == "incref" || t.text == "decref") {
            s.kind = t.text == "incref" ? Stmt::Kind::Incref : Stmt::Kind::Decref;
            s.expr = parse_expr();
            s.has_expr = true;
            return s;
        }
        if (t.text == "return") {
            s.kind = Stmt::Kind::Return;
            s.expr = parse_expr();
            s.has_expr = true;
            return s;
        }
        if (t.text == "crash") {
            s.kind = Stmt::Kind::Crash;
            return s;
        }
        if (t.text == "abort") {
            s.kind = Stmt::Kind::Abort;
            Token m = expect(Token::Kind::Str, "abort message");
            s.message = m.text;  // diagnostics, not harvested as a literal
            return s;
        }
        // NAME = getattr|getattr_incref|invoke_incref ( expr , "key" )
        s.kind = Stmt::Kind::Assign;
        s.var = t.text;
        expect_punct("=");
        Token fn = expect(Token::Kind::Ident, "getattr, getattr_incref or invoke_incref");
        if (fn.text == "getattr") {
            s.access = Stmt::AccessKind::Get;
        } else if (fn.text == "getattr_incref") {
            s.access = Stmt::AccessKind::GetIncref;
        } else if (fn.text == "invoke_incref") {
            s.access = Stmt::AccessKind::InvokeIncref;
        } else {
            throw DslError(fn.line, fn.column, "unknown accessor '" + fn.text + "'");
        }
        expect_punct("(");
        s.target = parse_expr();
        expect_punct(",");
        s.key = parse_key();
        expect_punct(")");
        return s;
    }

    void check_expr(const Expr& e, const std::set<std::string>& defined, int line) {
        if (e.kind == Expr::Kind::Var && !defined.count(e.var)) {
            throw DslError(line, 1, "variable '" + e.var + "' used before assignment");
        }
    }

    void check_defined(const std::vector<Stmt>& body, std::set<std::string>& defined) {
        for (const auto& s : body) {
            switch (s.kind) {
                case Stmt::Kind::If: {
                    check_expr(s.cond.target, defined, s.line);
                    std::set<std::string> then_defs = defined;
                    std::set<std::string> else_defs = defined;
                    check_defined(s.then_body, then_defs);
                    check_defined(s.else_body, else_defs);
                    for (const auto& name : then_defs) {
                        if (else_defs.count(name)) defined.insert(name);
                    }
                    break;
                }
                case Stmt::Kind::Assign:
                    check_expr(s.target, defined, s.line);
                    defined.insert(s.var);
                    break;
                case Stmt::Kind::Incref:
                case Stmt::Kind::Decref:
                case Stmt::Kind::Return:
                    check_expr(s.expr, defined, s.line);
                    break;
                default:
                    break;
            }
        }
    }

    Lexer lex_;
    TargetProgram prog_;
};

}  // namespace

TargetProgram parse_program(const std::string& text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Program queries

static int count_paths(const std::vector<Stmt>& stmts, size_t i,
                       const std::function<int()>& cont) {
    if (i == stmts.size()) return cont();
    const Stmt& s = stmts[i];
    switch (s.kind) {
        case Stmt::Kind::Return:
        case Stmt::Kind::Crash:
        case Stmt::Kind::Abort:
            return 1;
        case Stmt::Kind::If: {
            auto after = [&stmts, i, &cont] { return count_paths(stmts, i + 1, cont); };
            return count_paths(s.then_body, 0, after) + count_paths(s.else_body, 0, after);
        }
        default:
            return count_paths(stmts, i + 1, cont);
    }
}

int TargetProgram::static_path_count() const {
    return count_paths(body, 0, [] { return 1; });
}

static void walk_types(const std::vector<Stmt>& body, std::set<std::string>& out) {
    for (const auto& s : body) {
        if (s.kind == Stmt::Kind::If) {
            if (s.cond.kind == Cond::Kind::TypeCheck) out.insert(s.cond.type_name);
            walk_types(s.then_body, out);
            walk_types(s.else_body, out);
        }
    }
}

std::set<std::string> TargetProgram::referenced_types() const {
    std::set<std::string> out;
    walk_types(body, out);
    return out;
}

std::set<Scalar> collect_literals(const TargetProgram& program) {
    return {program.literals.begin(), program.literals.end()};
}

// ---------------------------------------------------------------------------
// Interpreter

namespace {

enum class Flow { Continue, Stopped };

struct Runner {
    const TargetProgram& prog;
    Universe& universe;
    ExecutionResult result{};
    std::map<std::string, ValuePtr> env{};
    std::optional<std::int64_t> returned_id{};

    ValuePtr eval(const Expr& e) {
        if (e.kind == Expr::Kind::Var) return env.at(e.var);
        return universe.make_scalar(scalar_type_name(e.literal), e.literal);
    }

    void stop_aborted(std::string msg) {
        result.outcome = OutcomeKind::Aborted;
        result.message = std::move(msg);
    }

    bool eval_cond(const Cond& c, Flow& flow) {
        ValuePtr v = eval(c.target);
        switch (c.kind) {
            case Cond::Kind::TypeCheck: {
                const std::string canonical = universe.lattice().at(c.type_name).name;
                bool res = c.exact ? v->type == canonical
                                   : universe.lattice().is_subtype(v->type, canonical);
                result.trace.push_back(
                    ApiCallRecord::type_check(v->id, canonical, c.exact, res));
                return res;
            }
            case Cond::Kind::HasAttr: {
                auto found = resolve_attr(v, c.key, universe);
                result.trace.push_back(ApiCallRecord::attr_get(
                    v->id, c.key, found ? std::optional((*found)->id) : std::nullopt, false));
                return found.has_value();
            }
            case Cond::Kind::Eq:
                // Value comparisons go through no instrumented API and
                // leave no record.
                return v->payload && *v->payload == c.literal;
        }
        flow = Flow::Stopped;
        return false;
    }

    Flow run_assign(const Stmt& s) {
        ValuePtr v = eval(s.target);
        bool incref = s.access != Stmt::AccessKind::Get;
        std::optional<ValuePtr> found;
        if (s.access == Stmt::AccessKind::InvokeIncref) {
            auto attr = lookup_attr(v, s.key, universe);
            if (attr && (*attr)->is_method()) {
                found = (*attr)->returns;
            } else if (attr) {
                // The member exists but is not callable: the record shows
                // the resolved member (NULL means the lookup itself
                // failed) and the call raises through the VM.
                result.trace.push_back(ApiCallRecord::attr_get(v->id, s.key, (*attr)->id, true));
                stop_aborted("'" + s.key + "' is not callable");
                return Flow::Stopped;
            } else {
                result.trace.push_back(ApiCallRecord::attr_get(v->id, s.key, std::nullopt, true));
                stop_aborted("'" + s.key + "' lookup failed");
                return Flow::Stopped;
            }
        } else {
            found = resolve_attr(v, s.key, universe);
        }
        result.trace.push_back(ApiCallRecord::attr_get(
            v->id, s.key, found ? std::optional((*found)->id) : std::nullopt, incref));
        if (!found) {
            stop_aborted("'" + s.key + "' lookup failed");
            return Flow::Stopped;
        }
        if (incref) ++result.ledger[(*found)->id];
        env[s.var] = *found;
        return Flow::Continue;
    }

    Flow run_block(const std::vector<Stmt>& body) {
        for (const auto& s : body) {
            switch (s.kind) {
                case Stmt::Kind::If: {
                    Flow flow = Flow::Continue;
                    bool taken = eval_cond(s.cond, flow);
                    if (flow == Flow::Stopped) return flow;
                    Flow inner = run_block(taken ? s.then_body : s.else_body);
                    if (inner == Flow::Stopped) return inner;
                    break;
                }
                case Stmt::Kind::Assign:
                    if (run_assign(s) == Flow::Stopped) return Flow::Stopped;
                    break;
                case Stmt::Kind::Incref:
                    ++result.ledger[eval(s.expr)->id];
                    break;
                case Stmt::Kind::Decref:
                    --result.ledger[eval(s.expr)->id];
                    break;
                case Stmt::Kind::Return: {
                    ValuePtr v = eval(s.expr);
                    returned_id = v->id;
                    result.outcome = OutcomeKind::Returned;
                    return Flow::Stopped;
                }
                case Stmt::Kind::Crash:
                    result.outcome = OutcomeKind::Crashed;
                    return Flow::Stopped;
                case Stmt::Kind::Abort:
                    stop_aborted(s.message);
                    return Flow::Stopped;
            }
        }
        return Flow::Continue;
    }
};

}  // namespace

ExecutionResult execute(const TargetProgram& program, const std::vector<ValuePtr>& inputs,
                        Universe& universe) {
    if (inputs.size() != program.params.size()) {
        throw ConfigError("method '" + program.name + "' takes " +
                          std::to_string(program.params.size()) + " inputs, got " +
                          std::to_string(inputs.size()));
    }
    Runner runner{program, universe};
    for (size_t i = 0; i < inputs.size(); ++i) {
        runner.env[program.params[i]] = inputs[i];
    }
    runner.result.outcome = OutcomeKind::Returned;
    runner.run_block(program.body);

    ExecutionResult& res = runner.result;
    res.returned_id = runner.returned_id;
    if (res.outcome == OutcomeKind::Returned) {
        // The returned reference is owned by the caller; everything else
        // left with a positive net delta leaks.
        for (const auto& [id, delta] : res.ledger) {
            if (delta > 0 && (!res.returned_id || id != *res.returned_id)) {
                res.leaks[id] = delta;
            }
        }
    }
    return res;
}

}  // namespace scfuzz
