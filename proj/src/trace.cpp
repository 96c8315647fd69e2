#include "scfuzz/trace.hpp"

#include <charconv>
#include <sstream>

namespace scfuzz {

std::string encode_record(const ApiCallRecord& r) {
    std::string out;
    if (r.act == ApiCallRecord::Act::TypeCheck) {
        out = "TC ";
        out += std::to_string(r.obj_id);
        out += ' ';
        out += r.val_act;
        out += r.exact ? " 1" : " 0";
        out += r.result ? " 1" : " 0";
    } else {
        out = "AG ";
        out += std::to_string(r.obj_id);
        out += ' ';
        out += r.val_act;
        out += ' ';
        out += r.ret ? std::to_string(*r.ret) : "NULL";
        out += r.incref ? " 1" : " 0";
    }
    return out;
}

static std::int64_t parse_id(const std::string& tok, int line_no, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size() || v < 0) {
        throw ParseError(line_no, std::string("bad ") + what + " '" + tok + "'");
    }
    return v;
}

static bool parse_flag(const std::string& tok, int line_no, const char* what) {
    if (tok == "0") return false;
    if (tok == "1") return true;
    throw ParseError(line_no, std::string("bad ") + what + " '" + tok + "' (want 0 or 1)");
}

ApiCallRecord parse_record(const std::string& line, int line_no) {
    std::istringstream in(line);
    std::vector<std::string> toks;
    std::string tok;
    while (in >> tok) toks.push_back(tok);
    if (toks.empty()) throw ParseError(line_no, "empty record");
    if (toks[0] == "TC") {
        if (toks.size() != 5) throw ParseError(line_no, "TC record wants 5 fields");
        return ApiCallRecord::type_check(parse_id(toks[1], line_no, "object id"), toks[2],
                                         parse_flag(toks[3], line_no, "exact flag"),
                                         parse_flag(toks[4], line_no, "result flag"));
    }
    if (toks[0] == "AG") {
        if (toks.size() != 5) throw ParseError(line_no, "AG record wants 5 fields");
        std::optional<std::int64_t> ret;
        if (toks[3] != "NULL") ret = parse_id(toks[3], line_no, "return id");
        return ApiCallRecord::attr_get(parse_id(toks[1], line_no, "object id"), toks[2], ret,
                                       parse_flag(toks[4], line_no, "incref flag"));
    }
    throw ParseError(line_no, "unknown record tag '" + toks[0] + "'");
}

std::string encode_trace(const std::vector<ApiCallRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += encode_record(r);
        out += '\n';
    }
    return out;
}

std::vector<ApiCallRecord> parse_trace(const std::string& text) {
    std::vector<ApiCallRecord> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_record(line, line_no));
    }
    return out;
}

}  // namespace scfuzz
