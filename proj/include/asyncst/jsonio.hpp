#ifndef ASYNCST_JSONIO_HPP_
#define ASYNCST_JSONIO_HPP_

#include <iosfwd>
#include <string>

#include "asyncst/state.hpp"
#include "asyncst/typecheck.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// Trace serialization: JSON lines, one {event, config, after} per pair.
// Schema documented in docs/trace.schema.json.
std::string traceToJsonl(const Trace& tr);
Trace traceFromJsonl(const std::string& text);

std::string reportToJson(const CheckReport& rep);

// Local-type AST dump for golden tests (project --json).
std::string localTypeToJson(const LocalType& t);

}  // namespace asyncst

#endif  // ASYNCST_JSONIO_HPP_
