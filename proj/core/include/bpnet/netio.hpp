#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "bpnet/model.hpp"

namespace bpnet::io {

// Text network format. Line-oriented in canonical form, `#` starts a
// comment, tokens are whitespace-separated:
//
//   node <id> { <state> <state> ... }
//   prior <id> ( <real> ... )
//   cpt <child> | <parent> ... { ( <real> ... )  x rows }
//
// Rows appear in mixed-radix order of the parent states (last parent least
// significant). Ids match [A-Za-z_][A-Za-z0-9_]*; reals accept decimal and
// scientific notation with `.` as the decimal point.
//
// Throws ParseError (first offense, with its source span). The returned
// network still has to go through validate_network for the numeric and
// graph-level checks; the parser enforces syntax, referential integrity,
// declaration uniqueness, table presence and row shape.
Network parse_network(std::string_view text);
Network parse_network(std::istream& in);

// Canonical serialization: nodes in declaration order, then one table per
// node in declaration order (prior form for parentless nodes), rows in
// mixed-radix order, reals with 17 significant digits. Byte-deterministic,
// and parse(serialize(net)) reproduces the network field-exactly.
std::string serialize_network(const Network& net);

// Evidence format: one `<id> = <state>` per line, same comment rules.
Evidence parse_evidence(std::string_view text, const Network& net);
Evidence parse_evidence(std::istream& in, const Network& net);

}  // namespace bpnet::io
