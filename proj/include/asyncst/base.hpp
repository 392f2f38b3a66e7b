#ifndef ASYNCST_BASE_HPP_
#define ASYNCST_BASE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asyncst {

struct SrcLoc {
  int line = 0;
  int col = 0;
  bool known() const { return line > 0; }
  std::string str() const {
    return known() ? std::to_string(line) + ":" + std::to_string(col) : "<?>";
  }
};

// Parse-time failure with position info. Analyses report via Report structs
// instead of throwing.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, SrcLoc loc)
      : std::runtime_error(loc.str() + ": " + msg), loc_(loc), msg_(std::move(msg)) {}
  SrcLoc loc() const { return loc_; }
  const std::string& message() const { return msg_; }

 private:
  SrcLoc loc_;
  std::string msg_;
};

// Internal invariant violation (a defect, not an input error).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

struct Diagnostic {
  std::string rule;   // e.g. "T-Get", "projection rule 1"
  std::string message;
  SrcLoc loc;
  std::string str() const {
    std::string s;
    if (!rule.empty()) s += "[" + rule + "] ";
    s += message;
    if (loc.known()) s += " (at " + loc.str() + ")";
    return s;
  }
};

}  // namespace asyncst

#endif  // ASYNCST_BASE_HPP_
