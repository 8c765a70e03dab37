#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "encpol/policy.hpp"
#include "encpol/token.hpp"

namespace encpol {

/// Syntax or range error with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

/// One parsed authorization rule:
///   IF <condition> THEN CAN <subject, action, target>
struct PolicyAst {
  ConditionExpr condition;
  SatTuple sat;

  bool operator==(const PolicyAst&) const = default;
};

/// Grammar:
///   policy     := "IF" cond "THEN" "CAN" "<" item "," item "," item ">"
///   cond       := term ("OR" term)*
///   term       := factor ("AND" factor)*
///   factor     := comparison | INT "OF" "(" cond ("," cond)+ ")" | "(" cond ")"
///   comparison := NAME "=" VALUE
///               | NAME ("<"|">"|"<="|">="|"=") INT "#" INT
/// AND binds tighter than OR. The "#s" suffix fixes the bit width of a
/// numeric comparison and is mandatory; constants must fit the width. A
/// "=" comparison is numeric exactly when an integer constant is followed
/// by "#" ("a=3#2"); otherwise it is a string match ("a=3").
PolicyAst parse_policy(std::string_view text);

/// Each non-blank line is one policy.
std::vector<PolicyAst> parse_policy_file(std::string_view text);

/// One attribute per line: "name=stringValue" or "name:=intValue#bits".
AttributeAssignment parse_attributes(std::string_view text);

/// Canonical single-line form; parse_policy(render_policy(ast)) == ast.
std::string render_policy(const PolicyAst& ast);

}  // namespace encpol
