#pragma once

#include <string>
#include <vector>

#include "scfuzz/value_model.hpp"

namespace scfuzz {

/// Splits an input or corpus file into blank-line-separated blocks.
std::vector<std::string> split_blocks(const std::string& text);

/// Parses one value listing in the render_value format: scalar or
/// collection literal assignments, class-definition blocks, element
/// insertions. The block's value is the variable `obj` (or the last
/// assignment when absent). Throws ParseError on malformed input.
ValuePtr parse_value_listing(const std::string& block, Universe& universe);

}  // namespace scfuzz
