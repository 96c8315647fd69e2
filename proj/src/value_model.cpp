#include "scfuzz/value_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <sstream>

namespace scfuzz {

// ---------------------------------------------------------------------------
// Scalars

std::string scalar_type_name(const Scalar& s) {
    switch (s.index()) {
        case 0: return "long";
        case 1: return "float";
        case 2: return "str";
        case 3: return "bytes";
        default: return "bool";
    }
}

static std::string quote_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += "'";
    return out;
}

std::string scalar_literal(const Scalar& s) {
    switch (s.index()) {
        case 0: return std::to_string(std::get<std::int64_t>(s));
        case 1: {
            double v = std::get<double>(s);
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
            std::string text(buf, p);
            if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
                text.find("inf") == std::string::npos && text.find("nan") == std::string::npos) {
                text += ".0";
            }
            return text;
        }
        case 2: return quote_string(std::get<std::string>(s));
        case 3: return "b" + quote_string(std::get<BytesLit>(s).data);
        default: return std::get<bool>(s) ? "True" : "False";
    }
}

// ---------------------------------------------------------------------------
// TypeLattice

std::string type_kind_name(TypeKind k) {
    switch (k) {
        case TypeKind::Scalar: return "scalar";
        case TypeKind::Sequence: return "sequence";
        case TypeKind::Mapping: return "mapping";
        case TypeKind::Synthesized: return "synthesized";
        case TypeKind::Opaque: return "opaque";
    }
    return "opaque";
}

std::optional<TypeKind> type_kind_from_name(const std::string& name) {
    if (name == "scalar") return TypeKind::Scalar;
    if (name == "sequence") return TypeKind::Sequence;
    if (name == "mapping") return TypeKind::Mapping;
    if (name == "synthesized") return TypeKind::Synthesized;
    if (name == "opaque") return TypeKind::Opaque;
    return std::nullopt;
}

TypeLattice TypeLattice::default_lattice() {
    TypeLattice lat;
    lat.add_type({"object", TypeKind::Opaque, {}});
    lat.add_type({"long", TypeKind::Scalar, {"object"}});
    lat.add_type({"bool", TypeKind::Scalar, {"long"}});
    lat.add_type({"float", TypeKind::Scalar, {"object"}});
    lat.add_type({"complex", TypeKind::Scalar, {"object"}});
    lat.add_type({"str", TypeKind::Scalar, {"object"}});
    lat.add_type({"bytes", TypeKind::Scalar, {"object"}});
    lat.add_type({"list", TypeKind::Sequence, {"object"}});
    lat.add_type({"tuple", TypeKind::Sequence, {"object"}});
    lat.add_type({"dict", TypeKind::Mapping, {"object"}});
    lat.add_type({"set", TypeKind::Sequence, {"object"}});
    lat.aliases_["int"] = "long";

    lat.add_intrinsic("long", "__index__");
    lat.add_intrinsic("long", "__float__");
    lat.add_intrinsic("float", "__float__");
    for (const char* t : {"str", "bytes", "list", "tuple", "dict", "set"}) {
        lat.add_intrinsic(t, "__len__");
    }

    static const char* concrete[] = {"long", "float", "str", "bytes",
                                     "list", "tuple", "dict", "set"};
    for (const char* a : concrete) {
        for (const char* b : concrete) {
            if (std::string(a) < b) lat.add_conflict(a, b);
        }
    }
    lat.validate();
    return lat;
}

static std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

TypeLattice TypeLattice::from_override_text(const std::string& text) {
    TypeLattice lat = default_lattice();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        auto fail = [&](const std::string& msg) -> void {
            throw ConfigError("lattice file line " + std::to_string(line_no) + ": " + msg);
        };
        if (toks[0] == "type") {
            // type <name> <kind> : <parent>[,<parent>...]
            if (toks.size() < 5 || toks[3] != ":") fail("expected: type <name> <kind> : <parents>");
            auto kind = type_kind_from_name(toks[2]);
            if (!kind) fail("unknown kind '" + toks[2] + "'");
            std::vector<std::string> parents;
            std::string joined;
            for (size_t i = 4; i < toks.size(); ++i) joined += toks[i];
            std::string cur;
            for (char c : joined) {
                if (c == ',') {
                    if (!cur.empty()) parents.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!cur.empty()) parents.push_back(cur);
            if (parents.empty()) fail("type needs at least one parent");
            lat.add_type({toks[1], *kind, parents});
        } else if (toks[0] == "attr") {
            if (toks.size() != 3) fail("expected: attr <type> <key>");
            lat.add_intrinsic(toks[1], toks[2]);
        } else if (toks[0] == "conflict") {
            if (toks.size() != 3) fail("expected: conflict <t1> <t2>");
            lat.add_conflict(toks[1], toks[2]);
        } else {
            fail("unknown directive '" + toks[0] + "'");
        }
    }
    lat.validate();
    return lat;
}

std::string TypeLattice::resolve_alias(const std::string& name) const {
    auto it = aliases_.find(name);
    return it == aliases_.end() ? name : it->second;
}

void TypeLattice::add_type(TypeDescriptor desc) {
    if (types_.count(desc.name)) {
        throw ConfigError("duplicate type name '" + desc.name + "'");
    }
    for (auto& b : desc.bases) b = resolve_alias(b);
    types_[desc.name] = std::move(desc);
}

void TypeLattice::add_intrinsic(const std::string& type, const std::string& key) {
    intrinsic_[resolve_alias(type)].insert(key);
}

void TypeLattice::add_conflict(const std::string& a, const std::string& b) {
    std::string x = resolve_alias(a), y = resolve_alias(b);
    if (x == y) throw ConfigError("conflict pair must name two distinct types");
    if (x > y) std::swap(x, y);
    conflicts_.insert({x, y});
}

std::string TypeLattice::add_synthesized(const std::vector<std::string>& bases) {
    if (bases.empty()) throw ConfigError("synthesized type needs at least one base");
    std::vector<std::string> resolved;
    for (const auto& b : bases) {
        std::string r = resolve_alias(b);
        if (!types_.count(r)) throw ConfigError("unknown base type '" + b + "'");
        resolved.push_back(r);
    }
    for (size_t i = 0; i < resolved.size(); ++i) {
        for (size_t j = i + 1; j < resolved.size(); ++j) {
            if (conflicting(resolved[i], resolved[j])) {
                throw ConfigError("bases '" + resolved[i] + "' and '" + resolved[j] +
                                  "' cannot be co-inherited");
            }
        }
    }
    std::string name = "synth_" + std::to_string(++synth_counter_);
    types_[name] = TypeDescriptor{name, TypeKind::Synthesized, resolved};
    return name;
}

bool TypeLattice::has(const std::string& name) const {
    return types_.count(resolve_alias(name)) > 0;
}

const TypeDescriptor& TypeLattice::at(const std::string& name) const {
    auto it = types_.find(resolve_alias(name));
    if (it == types_.end()) throw ConfigError("unknown type '" + name + "'");
    return it->second;
}

bool TypeLattice::is_subtype(const std::string& t1, const std::string& t2) const {
    const std::string a = resolve_alias(t1), b = resolve_alias(t2);
    if (!types_.count(a)) throw ConfigError("unknown type '" + t1 + "'");
    if (!types_.count(b)) throw ConfigError("unknown type '" + t2 + "'");
    if (a == b) return true;
    std::deque<std::string> work{a};
    std::set<std::string> seen{a};
    while (!work.empty()) {
        const TypeDescriptor& d = types_.at(work.front());
        work.pop_front();
        for (const auto& base : d.bases) {
            if (base == b) return true;
            if (seen.insert(base).second) work.push_back(base);
        }
    }
    return false;
}

bool TypeLattice::conflicting(const std::string& a, const std::string& b) const {
    std::string x = resolve_alias(a), y = resolve_alias(b);
    if (x > y) std::swap(x, y);
    return conflicts_.count({x, y}) > 0;
}

std::set<std::string> TypeLattice::intrinsics_of(const std::string& type) const {
    std::set<std::string> out;
    std::deque<std::string> work{resolve_alias(type)};
    std::set<std::string> seen{work.front()};
    while (!work.empty()) {
        std::string cur = work.front();
        work.pop_front();
        auto it = intrinsic_.find(cur);
        if (it != intrinsic_.end()) out.insert(it->second.begin(), it->second.end());
        auto td = types_.find(cur);
        if (td == types_.end()) throw ConfigError("unknown type '" + type + "'");
        for (const auto& base : td->second.bases) {
            if (seen.insert(base).second) work.push_back(base);
        }
    }
    return out;
}

std::string TypeLattice::intrinsic_owner(const std::string& type, const std::string& key) const {
    // Breadth-first so the nearest declaring supertype wins.
    std::deque<std::string> work{resolve_alias(type)};
    std::set<std::string> seen{work.front()};
    while (!work.empty()) {
        std::string cur = work.front();
        work.pop_front();
        auto it = intrinsic_.find(cur);
        if (it != intrinsic_.end() && it->second.count(key)) return cur;
        auto td = types_.find(cur);
        if (td == types_.end()) return "";
        for (const auto& base : td->second.bases) {
            if (seen.insert(base).second) work.push_back(base);
        }
    }
    return "";
}

std::vector<std::string> TypeLattice::builtin_names() const {
    std::vector<std::string> out;
    for (const auto& [name, desc] : types_) {
        if (desc.kind != TypeKind::Synthesized) out.push_back(name);
    }
    return out;
}

void TypeLattice::validate() const {
    if (!types_.count("object")) throw ConfigError("lattice must contain the top type 'object'");
    for (const auto& [name, desc] : types_) {
        if (name == "object") {
            if (!desc.bases.empty()) throw ConfigError("'object' cannot have parents");
            continue;
        }
        if (desc.bases.empty()) {
            throw ConfigError("type '" + name + "' has no parent");
        }
        for (const auto& base : desc.bases) {
            if (!types_.count(base)) {
                throw ConfigError("type '" + name + "' inherits unknown type '" + base + "'");
            }
        }
        if (!is_subtype(name, "object")) {
            throw ConfigError("type '" + name + "' does not reach 'object'");
        }
        // A type reachable from itself through a parent means a cycle.
        for (const auto& base : desc.bases) {
            if (is_subtype(base, name)) {
                throw ConfigError("inheritance cycle through '" + name + "'");
            }
        }
        if (desc.kind == TypeKind::Synthesized) {
            for (size_t i = 0; i < desc.bases.size(); ++i) {
                for (size_t j = i + 1; j < desc.bases.size(); ++j) {
                    if (conflicting(desc.bases[i], desc.bases[j])) {
                        throw ConfigError("synthesized '" + name + "' has conflicting bases");
                    }
                }
            }
        }
    }
    for (const auto& [a, b] : conflicts_) {
        if (a == b) throw ConfigError("reflexive conflict pair");
        if (!types_.count(a) || !types_.count(b)) {
            throw ConfigError("conflict pair names unknown type");
        }
    }
}

// ---------------------------------------------------------------------------
// ValueFactory

static Scalar intrinsic_default_for(const std::string& key) {
    if (key == "__float__") return Scalar{0.0};
    if (key == "__index__" || key == "__len__") return Scalar{std::int64_t{0}};
    return Scalar{std::string{}};
}

ValueFactory::ValueFactory(const TypeLattice& lattice) {
    // Stub ids are a function of the lattice alone: types in name order,
    // keys in key order, two ids per stub (result first, then the method).
    std::int64_t next = 1;
    for (const auto& [type, keys] : lattice.intrinsic_table()) {
        for (const auto& key : keys) {
            Scalar payload = intrinsic_default_for(key);
            auto result = std::make_shared<Value>();
            result->id = next++;
            result->type = scalar_type_name(payload);
            result->payload = payload;
            auto method = std::make_shared<Value>();
            method->id = next++;
            method->type = "object";
            method->returns = result;
            stubs_[{type, key}] = method;
        }
    }
    if (next >= 1000) {
        throw ConfigError("intrinsic table too large for the reserved stub id range");
    }
}

ValuePtr ValueFactory::intrinsic_stub(const std::string& owner_type,
                                      const std::string& key) const {
    auto it = stubs_.find({owner_type, key});
    return it == stubs_.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------
// Universe construction helpers

StorageKind Universe::storage_kind(const std::string& type) const {
    std::deque<std::string> work{type};
    std::set<std::string> seen{type};
    while (!work.empty()) {
        const TypeDescriptor& d = lattice_.at(work.front());
        work.pop_front();
        switch (d.kind) {
            case TypeKind::Scalar: return StorageKind::Scalar;
            case TypeKind::Sequence: return StorageKind::Sequence;
            case TypeKind::Mapping: return StorageKind::Mapping;
            default: break;
        }
        for (const auto& base : d.bases) {
            if (seen.insert(base).second) work.push_back(base);
        }
    }
    return StorageKind::Opaque;
}

ValuePtr Universe::make_object(const std::string& type,
                               std::vector<std::pair<std::string, ValuePtr>> attrs,
                               std::optional<std::vector<std::pair<std::string, ValuePtr>>> elements,
                               std::optional<Scalar> payload) {
    if (!lattice_.has(type)) throw ConfigError("unknown type '" + type + "'");
    StorageKind sk = storage_kind(type);
    bool collection = sk == StorageKind::Sequence || sk == StorageKind::Mapping;
    if (collection && !elements) elements.emplace();
    if (!collection) elements.reset();
    auto v = std::make_shared<Value>();
    v->id = factory_.fresh_id();
    v->type = type;
    v->attrs = std::move(attrs);
    v->elements = std::move(elements);
    v->payload = std::move(payload);
    return v;
}

ValuePtr Universe::make_scalar(const std::string& type, Scalar payload) {
    return make_object(type, {}, std::nullopt, std::move(payload));
}

ValuePtr Universe::make_scalar_default(const std::string& type) {
    if (type == "long") return make_scalar("long", Scalar{std::int64_t{1}});
    if (type == "bool") return make_scalar("bool", Scalar{true});
    if (type == "float") return make_scalar("float", Scalar{1.5});
    if (type == "str") return make_scalar("str", Scalar{std::string{"abc"}});
    if (type == "bytes") return make_scalar("bytes", Scalar{BytesLit{}});
    return make_object(type, {}, std::nullopt, std::nullopt);  // complex and friends
}

ValuePtr Universe::make_collection(const std::string& type,
                                   std::vector<std::pair<std::string, ValuePtr>> elements) {
    return make_object(type, {}, std::move(elements), std::nullopt);
}

ValuePtr Universe::make_opaque(const std::string& type) {
    return make_object(type, {}, std::nullopt, std::nullopt);
}

ValuePtr Universe::make_method(ValuePtr result) {
    auto v = std::make_shared<Value>();
    v->id = factory_.fresh_id();
    v->type = "object";
    v->returns = std::move(result);
    return v;
}

// ---------------------------------------------------------------------------
// Attribute lookup

bool parse_element_key(const std::string& key, std::string* inner) {
    if (key.size() < 3 || key.front() != '[' || key.back() != ']') return false;
    std::string body = key.substr(1, key.size() - 2);
    if (body.size() >= 2 && (body.front() == '"' || body.front() == '\'') &&
        body.back() == body.front()) {
        if (inner) *inner = body.substr(1, body.size() - 2);
        return true;
    }
    // Decimal index.
    if (body.empty()) return false;
    for (char c : body) {
        if (c < '0' || c > '9') return false;
    }
    if (inner) *inner = body;
    return true;
}

std::string element_key(const std::string& inner) {
    bool decimal = !inner.empty();
    for (char c : inner) {
        if (c < '0' || c > '9') decimal = false;
    }
    if (decimal) return "[" + inner + "]";
    return "[\"" + inner + "\"]";
}

std::optional<ValuePtr> lookup_attr(const ValuePtr& value, const std::string& key,
                                    const Universe& universe) {
    if (!value) return std::nullopt;
    std::string inner;
    if (parse_element_key(key, &inner)) {
        if (!value->elements) return std::nullopt;
        for (const auto& [k, v] : *value->elements) {
            if (k == inner) return v;
        }
        return std::nullopt;
    }
    for (const auto& [k, v] : value->attrs) {
        if (k == key) return v;
    }
    if (value->elements) {
        for (const auto& [k, v] : *value->elements) {
            if (k == key) return v;
        }
    }
    std::string owner = universe.lattice().intrinsic_owner(value->type, key);
    if (!owner.empty()) {
        ValuePtr stub = universe.factory().intrinsic_stub(owner, key);
        if (stub) return stub;
    }
    return std::nullopt;
}

std::optional<ValuePtr> resolve_attr(const ValuePtr& value, const std::string& key,
                                     const Universe& universe) {
    auto found = lookup_attr(value, key, universe);
    if (found && (*found)->is_method()) return (*found)->returns;
    return found;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

struct Renderer {
    const Universe& universe;
    std::vector<std::string> lines{};
    int class_count = 0;
    int obj_count = 1;  // the root instance is always `obj`; children start at obj2

    std::string fresh_class() {
        ++class_count;
        return class_count == 1 ? "self_class" : "self_class" + std::to_string(class_count);
    }
    std::string fresh_obj() {
        ++obj_count;
        return "obj" + std::to_string(obj_count);
    }

    static std::string render_base(const std::string& name) {
        return name == "long" ? "int" : name;
    }

    bool inline_ok(const ValuePtr& v) const {
        if (v->is_method()) return false;
        if (universe.lattice().at(v->type).kind == TypeKind::Synthesized) return false;
        if (!v->attrs.empty()) return false;
        if (v->elements) {
            for (const auto& [k, e] : *v->elements) {
                if (!inline_ok(e)) return false;
            }
        }
        return true;
    }

    std::string inline_literal(const ValuePtr& v) const {
        StorageKind sk = universe.storage_kind(v->type);
        if (sk == StorageKind::Scalar) {
            if (v->payload) return scalar_literal(*v->payload);
            return v->type == "complex" ? "0j" : v->type + "()";
        }
        if (sk == StorageKind::Opaque) return "object()";
        std::string open, close;
        bool mapping = sk == StorageKind::Mapping;
        if (v->type == "tuple") {
            open = "(";
            close = v->elements->size() == 1 ? ",)" : ")";
        } else if (v->type == "set") {
            if (v->elements->empty()) return "set()";
            open = "{";
            close = "}";
        } else if (mapping) {
            open = "{";
            close = "}";
        } else {
            open = "[";
            close = "]";
        }
        std::string out = open;
        bool first = true;
        for (const auto& [k, e] : *v->elements) {
            if (!first) out += ", ";
            first = false;
            if (mapping) out += quote_string(k) + ": ";
            out += inline_literal(e);
        }
        out += close;
        return out;
    }

    static std::string member_name(const std::string& key, std::set<std::string>& used) {
        std::string base;
        for (char c : key) {
            if (c != '_') base += c;
        }
        if (base.empty()) base = "value";
        std::string name = base;
        int n = 1;
        while (!used.insert(name).second) name = base + std::to_string(++n);
        return name;
    }

    bool set_like(const std::string& type) const {
        return universe.lattice().has("set") && universe.lattice().is_subtype(type, "set");
    }

    void emit_insert(const std::string& name, const std::string& type, StorageKind sk,
                     const std::string& key, const std::string& expr) {
        if (sk == StorageKind::Mapping) {
            lines.push_back(name + "[" + quote_string(key) + "] = " + expr);
        } else if (set_like(type)) {
            lines.push_back(name + ".add(" + expr + ")");
        } else {
            lines.push_back(name + ".append(" + expr + ")");
        }
    }

    // Emits whatever definitions `v` needs and returns an expression for it.
    // A non-empty `name_hint` fixes the instance variable name.
    std::string emit(const ValuePtr& v, const std::string& name_hint = "") {
        if (inline_ok(v)) return inline_literal(v);

        bool synthesized = universe.lattice().at(v->type).kind == TypeKind::Synthesized;
        StorageKind sk = universe.storage_kind(v->type);
        if (!synthesized) {
            // Bare collection holding non-inline children.
            std::vector<std::pair<std::string, std::string>> elems;
            if (v->elements) {
                for (const auto& [k, e] : *v->elements) elems.emplace_back(k, emit(e));
            }
            std::string name = name_hint.empty() ? fresh_obj() : name_hint;
            lines.push_back(name + " = " + (sk == StorageKind::Mapping ? "{}" : "[]"));
            for (auto& [k, expr] : elems) emit_insert(name, v->type, sk, k, expr);
            return name;
        }

        // Synthesized class: dependencies first, then the class block,
        // instantiation, and element insertions.
        const TypeDescriptor& desc = universe.lattice().at(v->type);
        std::set<std::string> used_members;
        struct MethodLine { std::string method, member, expr; };
        std::vector<MethodLine> methods;
        std::vector<std::pair<std::string, std::string>> plain_members;
        for (const auto& [key, attr] : v->attrs) {
            if (attr->is_method()) {
                std::string member = member_name(key, used_members);
                methods.push_back({key, member, emit(attr->returns)});
            } else {
                used_members.insert(key);
                plain_members.emplace_back(key, emit(attr));
            }
        }
        std::vector<std::pair<std::string, std::string>> elems;
        if (v->elements) {
            for (const auto& [k, e] : *v->elements) elems.emplace_back(k, emit(e));
        }

        std::string cls = fresh_class();
        std::string header = "class " + cls + "(";
        for (size_t i = 0; i < desc.bases.size(); ++i) {
            if (i) header += ", ";
            header += render_base(desc.bases[i]);
        }
        header += "):";
        lines.push_back(header);
        for (const auto& m : methods) {
            lines.push_back("  " + m.member + " = " + m.expr);
            lines.push_back("  def " + m.method + "(self): return self." + m.member);
        }
        for (const auto& [k, expr] : plain_members) {
            lines.push_back("  " + k + " = " + expr);
        }
        if (methods.empty() && plain_members.empty()) lines.push_back("  pass");

        std::string name = name_hint.empty() ? fresh_obj() : name_hint;
        std::string ctor;
        if (sk == StorageKind::Scalar && v->payload) ctor = scalar_literal(*v->payload);
        lines.push_back(name + " = " + cls + "(" + ctor + ")");
        for (auto& [k, expr] : elems) emit_insert(name, v->type, sk, k, expr);
        return name;
    }
};

}  // namespace

std::string render_value(const ValuePtr& value, const Universe& universe) {
    Renderer r{universe};
    std::string expr = r.emit(value, "obj");
    std::string out;
    for (const auto& line : r.lines) {
        out += line;
        out += '\n';
    }
    if (expr != "obj") out += "obj = " + expr + "\n";
    return out;
}

}  // namespace scfuzz
