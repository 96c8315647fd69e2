#include "scfuzz/input_text.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "scfuzz/trace.hpp"

namespace scfuzz {

std::vector<std::string> split_blocks(const std::string& text) {
    std::vector<std::string> blocks;
    std::string cur;
    std::istringstream in(text);
    std::string line;
    auto flush = [&] {
        if (cur.find_first_not_of(" \t\r\n") != std::string::npos) blocks.push_back(cur);
        cur.clear();
    };
    while (std::getline(in, line)) {
        std::string stripped = line;
        while (!stripped.empty() && (stripped.back() == '\r' || stripped.back() == ' ')) {
            stripped.pop_back();
        }
        if (stripped.empty()) {
            flush();
        } else {
            cur += stripped;
            cur += '\n';
        }
    }
    flush();
    return blocks;
}

namespace {

// ---------------------------------------------------------------------------
// Expression ASTs for one listing

struct TextExpr {
    enum class Kind { Lit, Complex, List, Tuple, SetLit, Dict, ObjectCtor, Var, Call };
    Kind kind = Kind::Lit;
    Scalar lit;
    std::vector<TextExpr> items;                            // list/tuple/set
    std::vector<std::pair<std::string, TextExpr>> entries;  // dict
    std::string name;                                       // var or callee
    std::vector<TextExpr> args;                             // call
};

struct ClassDef {
    std::vector<std::string> bases;
    // Body entries in source order: either a method (returned member) or a
    // plain member.
    struct Member {
        bool is_method = false;
        std::string name;       // attribute key
        std::string backing;    // method member variable, informational
        TextExpr expr;
    };
    std::vector<Member> members;
};

struct LineOp {
    enum class Kind { Assign, InsertKey, Append };
    Kind kind = Kind::Assign;
    std::string var;
    std::string key;  // InsertKey
    TextExpr expr;
};

class ExprParser {
public:
    ExprParser(const std::string& text, int line_no) : text_(text), line_(line_no) {}

    TextExpr parse() {
        TextExpr e = parse_one();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters in expression");
        return e;
    }

    TextExpr parse_one() {
        skip_ws();
        char c = cur();
        if (c == '\0') fail("expected an expression");
        if (c == '[') return parse_seq(']', TextExpr::Kind::List);
        if (c == '(') return parse_seq(')', TextExpr::Kind::Tuple);
        if (c == '{') return parse_braced();
        if (c == '\'' || c == '"') {
            TextExpr e;
            e.lit = Scalar{parse_string()};
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected character '") + c + "'");
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

    char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void bump() { ++pos_; }
    void skip_ws() {
        while (cur() == ' ' || cur() == '\t') bump();
    }

    std::string parse_string() {
        char quote = cur();
        bump();
        std::string out;
        while (cur() && cur() != quote) {
            char c = cur();
            if (c == '\\') {
                bump();
                switch (cur()) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '\\': out += '\\'; break;
                    case '\'': out += '\''; break;
                    case '"': out += '"'; break;
                    case 'x': {
                        bump();
                        char hex[3] = {cur(), '\0', '\0'};
                        bump();
                        hex[1] = cur();
                        out += static_cast<char>(std::stoi(hex, nullptr, 16));
                        break;
                    }
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

    TextExpr parse_number() {
        std::string num;
        if (cur() == '-') {
            num += '-';
            bump();
        }
        bool is_float = false;
        while (std::isdigit(static_cast<unsigned char>(cur()))) {
            num += cur();
            bump();
        }
        if (cur() == 'j') {  // 0j renders the bare complex value
            bump();
            TextExpr e;
            e.kind = TextExpr::Kind::Complex;
            return e;
        }
        if (cur() == '.') {
            is_float = true;
            num += '.';
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
        TextExpr e;
        if (is_float) {
            e.lit = Scalar{std::stod(num)};
        } else {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
            if (ec != std::errc{}) fail("integer out of range");
            e.lit = Scalar{v};
        }
        return e;
    }

    TextExpr parse_seq(char close, TextExpr::Kind kind) {
        bump();
        TextExpr e;
        e.kind = kind;
        skip_ws();
        while (cur() != close) {
            e.items.push_back(parse_one());
            skip_ws();
            if (cur() == ',') {
                bump();
                skip_ws();
            }
        }
        bump();
        return e;
    }

    TextExpr parse_braced() {
        bump();
        TextExpr e;
        skip_ws();
        if (cur() == '}') {
            bump();
            e.kind = TextExpr::Kind::Dict;
            return e;
        }
        // Sniff dict vs set by the first entry.
        TextExpr first = parse_one();
        skip_ws();
        if (cur() == ':') {
            e.kind = TextExpr::Kind::Dict;
            bump();
            skip_ws();
            if (first.kind != TextExpr::Kind::Lit || first.lit.index() != 2) {
                fail("dict keys must be strings");
            }
            e.entries.emplace_back(std::get<std::string>(first.lit), parse_one());
            skip_ws();
            while (cur() == ',') {
                bump();
                skip_ws();
                TextExpr key = parse_one();
                if (key.kind != TextExpr::Kind::Lit || key.lit.index() != 2) {
                    fail("dict keys must be strings");
                }
                skip_ws();
                if (cur() != ':') fail("expected ':'");
                bump();
                e.entries.emplace_back(std::get<std::string>(key.lit), parse_one());
                skip_ws();
            }
        } else {
            e.kind = TextExpr::Kind::SetLit;
            e.items.push_back(std::move(first));
            while (cur() == ',') {
                bump();
                e.items.push_back(parse_one());
                skip_ws();
            }
        }
        if (cur() != '}') fail("expected '}'");
        bump();
        return e;
    }

    TextExpr parse_name() {
        std::string name;
        while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') {
            name += cur();
            bump();
        }
        // b'..' bytes literal
        if (name == "b" && (cur() == '\'' || cur() == '"')) {
            TextExpr e;
            e.lit = Scalar{BytesLit{parse_string()}};
            return e;
        }
        if (name == "True" || name == "False") {
            TextExpr e;
            e.lit = Scalar{name == "True"};
            return e;
        }
        skip_ws();
        if (cur() == '(') {
            bump();
            TextExpr e;
            e.kind = name == "object" ? TextExpr::Kind::ObjectCtor : TextExpr::Kind::Call;
            e.name = name;
            skip_ws();
            while (cur() != ')') {
                e.args.push_back(parse_one());
                skip_ws();
                if (cur() == ',') {
                    bump();
                    skip_ws();
                }
            }
            bump();
            if (name == "set" && e.args.empty()) e.kind = TextExpr::Kind::SetLit;
            return e;
        }
        TextExpr e;
        e.kind = TextExpr::Kind::Var;
        e.name = name;
        return e;
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_;
};

// ---------------------------------------------------------------------------
// Listing assembly

struct Assembler {
    Universe& universe;
    std::map<std::string, ClassDef> classes{};
    struct VarState {
        TextExpr ctor;  // Call or collection literal
        std::vector<std::pair<std::string, TextExpr>> inserts;
        bool append_mode = false;
        ValuePtr frozen;
    };
    std::map<std::string, VarState> vars{};
    std::vector<std::string> var_order{};
    int line_no = 0;

    ValuePtr eval(const TextExpr& e) {
        switch (e.kind) {
            case TextExpr::Kind::Lit:
                return universe.make_scalar(scalar_type_name(e.lit), e.lit);
            case TextExpr::Kind::Complex:
                return universe.make_object("complex", {}, std::nullopt, std::nullopt);
            case TextExpr::Kind::ObjectCtor:
                return universe.make_opaque("object");
            case TextExpr::Kind::List:
            case TextExpr::Kind::Tuple:
            case TextExpr::Kind::SetLit: {
                std::vector<std::pair<std::string, ValuePtr>> elems;
                for (size_t i = 0; i < e.items.size(); ++i) {
                    elems.emplace_back(std::to_string(i), eval(e.items[i]));
                }
                const char* type = e.kind == TextExpr::Kind::List   ? "list"
                                   : e.kind == TextExpr::Kind::Tuple ? "tuple"
                                                                     : "set";
                return universe.make_collection(type, std::move(elems));
            }
            case TextExpr::Kind::Dict: {
                std::vector<std::pair<std::string, ValuePtr>> elems;
                for (const auto& [k, v] : e.entries) elems.emplace_back(k, eval(v));
                return universe.make_collection("dict", std::move(elems));
            }
            case TextExpr::Kind::Var: {
                auto it = vars.find(e.name);
                if (it == vars.end()) throw ParseError(line_no, "unknown name '" + e.name + "'");
                return freeze(e.name);
            }
            case TextExpr::Kind::Call:
                return instantiate(e);
        }
        throw ParseError(line_no, "bad expression");
    }

    ValuePtr instantiate(const TextExpr& call) {
        auto cit = classes.find(call.name);
        if (cit == classes.end()) {
            throw ParseError(line_no, "unknown class '" + call.name + "'");
        }
        const ClassDef& def = cit->second;
        std::string synth = universe.add_synthesized(def.bases);
        std::vector<std::pair<std::string, ValuePtr>> attrs;
        for (const auto& m : def.members) {
            if (m.name.empty()) continue;  // consumed as a method's backing member
            ValuePtr v = eval(m.expr);
            attrs.emplace_back(m.name, m.is_method ? universe.make_method(std::move(v)) : v);
        }
        std::optional<Scalar> payload;
        if (!call.args.empty() && call.args[0].kind == TextExpr::Kind::Lit) {
            payload = call.args[0].lit;
        }
        return universe.make_object(synth, std::move(attrs), std::nullopt, std::move(payload));
    }

    ValuePtr freeze(const std::string& name) {
        VarState& st = vars.at(name);
        if (st.frozen) return st.frozen;
        ValuePtr base = eval(st.ctor);
        if (!st.inserts.empty()) {
            if (!base->elements) {
                throw ParseError(line_no, "'" + name + "' does not hold elements");
            }
            auto elems = *base->elements;
            size_t next_index = elems.size();
            for (const auto& [k, ex] : st.inserts) {
                std::string key = k.empty() ? std::to_string(next_index++) : k;
                elems.emplace_back(key, eval(ex));
            }
            // Rebuilding would burn a fresh id; share the shell instead.
            auto patched = std::make_shared<Value>(*base);
            patched->elements = std::move(elems);
            base = patched;
        }
        st.frozen = base;
        return base;
    }
};

}  // namespace

ValuePtr parse_value_listing(const std::string& block, Universe& universe) {
    Assembler as{universe};
    std::istringstream in(block);
    std::string line;
    int line_no = 0;
    std::string current_class;
    std::string last_var;
    while (std::getline(in, line)) {
        ++line_no;
        as.line_no = line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        bool indented = line[0] == ' ' || line[0] == '\t';
        std::string body = line;
        size_t start = body.find_first_not_of(" \t");
        body = body.substr(start);

        if (indented) {
            if (current_class.empty()) throw ParseError(line_no, "unexpected indentation");
            ClassDef& def = as.classes[current_class];
            if (body == "pass") continue;
            if (body.rfind("def ", 0) == 0) {
                // def NAME(self): return EXPR
                auto paren = body.find('(');
                auto colon = body.find(':');
                if (paren == std::string::npos || colon == std::string::npos) {
                    throw ParseError(line_no, "malformed method definition");
                }
                std::string mname = body.substr(4, paren - 4);
                auto ret = body.find("return", colon);
                if (ret == std::string::npos) throw ParseError(line_no, "method must return");
                std::string expr_text = body.substr(ret + 6);
                // `return self.member` refers to the backing member.
                ClassDef::Member m;
                m.is_method = true;
                m.name = mname;
                size_t self_pos = expr_text.find("self.");
                if (self_pos != std::string::npos) {
                    std::string member = expr_text.substr(self_pos + 5);
                    while (!member.empty() && std::isspace(static_cast<unsigned char>(member.back()))) {
                        member.pop_back();
                    }
                    m.backing = member;
                    bool found = false;
                    for (auto& existing : def.members) {
                        if (!existing.is_method && existing.name == member) {
                            m.expr = existing.expr;
                            existing.name.clear();  // consumed as a backing member
                            found = true;
                            break;
                        }
                    }
                    if (!found) throw ParseError(line_no, "method returns unknown member");
                } else {
                    m.expr = ExprParser(expr_text, line_no).parse();
                }
                def.members.push_back(std::move(m));
                continue;
            }
            auto eq = body.find('=');
            if (eq == std::string::npos) throw ParseError(line_no, "expected a member assignment");
            ClassDef::Member m;
            m.name = body.substr(0, eq);
            while (!m.name.empty() && m.name.back() == ' ') m.name.pop_back();
            m.expr = ExprParser(body.substr(eq + 1), line_no).parse();
            def.members.push_back(std::move(m));
            continue;
        }

        current_class.clear();
        if (body.rfind("class ", 0) == 0) {
            auto paren = body.find('(');
            auto close = body.find(')');
            if (paren == std::string::npos || close == std::string::npos || body.back() != ':') {
                throw ParseError(line_no, "malformed class header");
            }
            current_class = body.substr(6, paren - 6);
            ClassDef def;
            std::string bases = body.substr(paren + 1, close - paren - 1);
            std::string cur;
            for (char c : bases + ",") {
                if (c == ',') {
                    while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
                    while (!cur.empty() && cur.back() == ' ') cur.pop_back();
                    if (!cur.empty()) def.bases.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (def.bases.empty()) throw ParseError(line_no, "class needs at least one base");
            as.classes[current_class] = std::move(def);
            continue;
        }

        // NAME.append(expr) / NAME.add(expr)
        auto dot = body.find('.');
        auto eq = body.find('=');
        if (dot != std::string::npos && (eq == std::string::npos || dot < eq) &&
            (body.find(".append(", dot) == dot || body.find(".add(", dot) == dot)) {
            std::string var = body.substr(0, dot);
            auto open = body.find('(', dot);
            if (body.back() != ')') throw ParseError(line_no, "malformed insertion");
            std::string expr_text = body.substr(open + 1, body.size() - open - 2);
            auto it = as.vars.find(var);
            if (it == as.vars.end()) throw ParseError(line_no, "unknown name '" + var + "'");
            if (it->second.frozen) throw ParseError(line_no, "'" + var + "' already referenced");
            it->second.inserts.emplace_back("", ExprParser(expr_text, line_no).parse());
            continue;
        }

        // NAME[key] = expr
        auto bracket = body.find('[');
        if (bracket != std::string::npos && eq != std::string::npos && bracket < eq) {
            std::string var = body.substr(0, bracket);
            auto close = body.find(']', bracket);
            if (close == std::string::npos) throw ParseError(line_no, "malformed element key");
            std::string key_text = body.substr(bracket + 1, close - bracket - 1);
            TextExpr key = ExprParser(key_text, line_no).parse();
            std::string key_str;
            if (key.kind == TextExpr::Kind::Lit && key.lit.index() == 2) {
                key_str = std::get<std::string>(key.lit);
            } else if (key.kind == TextExpr::Kind::Lit && key.lit.index() == 0) {
                key_str = std::to_string(std::get<std::int64_t>(key.lit));
            } else {
                throw ParseError(line_no, "element keys must be strings or integers");
            }
            auto it = as.vars.find(var);
            if (it == as.vars.end()) throw ParseError(line_no, "unknown name '" + var + "'");
            if (it->second.frozen) throw ParseError(line_no, "'" + var + "' already referenced");
            it->second.inserts.emplace_back(key_str, ExprParser(body.substr(eq + 1), line_no).parse());
            continue;
        }

        // NAME = expr
        if (eq == std::string::npos) throw ParseError(line_no, "expected an assignment");
        std::string var = body.substr(0, eq);
        while (!var.empty() && var.back() == ' ') var.pop_back();
        if (var.empty()) throw ParseError(line_no, "missing variable name");
        Assembler::VarState st;
        st.ctor = ExprParser(body.substr(eq + 1), line_no).parse();
        as.vars[var] = std::move(st);
        as.var_order.push_back(var);
        last_var = var;
    }

    std::string root = as.vars.count("obj") ? "obj" : last_var;
    if (root.empty()) throw ParseError(line_no, "listing defines no value");
    // Freeze dependencies in definition order, the root last.
    for (const auto& name : as.var_order) {
        if (name != root) as.freeze(name);
    }
    return as.freeze(root);
}

}  // namespace scfuzz
