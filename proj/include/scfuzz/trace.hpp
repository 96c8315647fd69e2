#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scfuzz {

/// Malformed trace line or input file.
struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

/// One API call observed during execution.
///
/// Type checks report whether the object is (a subtype of, or with `exact`,
/// exactly) the named type. Attribute extractions report the extracted
/// object's id or NULL, and whether the API bumps the result's reference
/// count. `incref` is meaningful only when `ret` is present.
struct ApiCallRecord {
    enum class Act { TypeCheck, AttrGet };

    Act act = Act::TypeCheck;
    std::int64_t obj_id = 0;
    std::string val_act;  // type name (TypeCheck) or attribute key (AttrGet)

    // TypeCheck fields.
    bool result = false;
    bool exact = false;

    // AttrGet fields.
    std::optional<std::int64_t> ret;
    bool incref = false;

    static ApiCallRecord type_check(std::int64_t obj_id, std::string type_name,
                                    bool exact, bool result) {
        ApiCallRecord r;
        r.act = Act::TypeCheck;
        r.obj_id = obj_id;
        r.val_act = std::move(type_name);
        r.exact = exact;
        r.result = result;
        return r;
    }

    static ApiCallRecord attr_get(std::int64_t obj_id, std::string key,
                                  std::optional<std::int64_t> ret, bool incref) {
        ApiCallRecord r;
        r.act = Act::AttrGet;
        r.obj_id = obj_id;
        r.val_act = std::move(key);
        r.ret = ret;
        r.incref = incref;
        return r;
    }

    bool operator==(const ApiCallRecord&) const = default;
};

/// One line, no trailing newline:
///   TC <obj_id> <type_name> <exact:0|1> <result:0|1>
///   AG <obj_id> <key> <ret_id|NULL> <incref:0|1>
/// Keys never contain spaces; the format is byte-stable.
std::string encode_record(const ApiCallRecord& r);

/// Inverse of encode_record on its image. Throws ParseError with the given
/// line number on malformed input.
ApiCallRecord parse_record(const std::string& line, int line_no = 1);

/// Newline-delimited records, no header.
std::string encode_trace(const std::vector<ApiCallRecord>& records);
std::vector<ApiCallRecord> parse_trace(const std::string& text);

}  // namespace scfuzz
