#pragma once

#include <json.hpp>
#include <string>

#include "auction/errors.hpp"
#include "auction/optimizer.hpp"
#include "auction/ssa.hpp"
#include "auction/types.hpp"

namespace auction {

using Json = nlohmann::json;

// Instance documents: schema_version, preference_model ("unit-demand" |
// "private-budget", overridable per agent), agents[].types[] with label,
// probability (number or exact "p/q" string) and the preference payload,
// and a constraint of kind "single-unit", "k-unit", or "matroid" (partition
// blocks+caps, or an explicit independent-set family).  Types elsewhere are
// referenced by qualified label, e.g. "2:H" for agent 2's type H.
AuctionInstance parse_instance(const std::string& text);
AuctionInstance load_instance(const std::string& path);

// Canonical document for an instance.  Matroid constraints serialize as the
// explicit independent-set family, so any rank-equivalent source document
// round-trips to the same supply.
std::string serialize_instance(const AuctionInstance& instance);

// Rule documents carry the mass-weighted interim allocation: {"xbar":
// {"1:H": "1/2", ...}}.  Unlisted types default to zero.
VecXd parse_rule(const std::string& text, const TypeUniverse& u);
VecXd load_rule(const std::string& path, const TypeUniverse& u);
std::string serialize_rule(const TypeUniverse& u, const VecXd& xbar);

enum class OutputFormat { kJson, kCsv };

// Report rendering.  JSON is the document itself; CSV emits top-level
// scalars as key,value lines, then each array-of-objects field as its own
// titled table.
std::string render_report(const Json& report, OutputFormat format);

// Per-type rows [{"type": "1:H", "xbar": ...}, ...]; extra columns may be
// appended by the caller.
Json xbar_rows(const TypeUniverse& u, const VecXd& xbar);

// Transition table as a dense row-major matrix with type-label headers; the
// pre-arrival holder is labeled "start".
Json table_json(const TypeUniverse& u, const TransitionTable& table);

// Executable description of an optimal auction's allocator: either the
// transition table or the rounding target plus its supply.
Json mechanism_json(const TypeUniverse& u, const OptimalAuction& best);

}  // namespace auction
