#pragma once

#include "lexer.hpp"
#include "relnet/query.hpp"

namespace relnet::detail {

/// Parses one rule terminated by '.'; the stream must be at the head atom.
Rule parse_rule(TokenStream& ts);

/// Builds a Rule from raw literal names, numbering variables canonically.
struct RawAtom {
  std::string predicate;
  std::vector<std::string> args;
};
struct RawComparison {
  std::string lhs;
  std::string rhs;
  bool negated;
};
Rule build_rule(const RawAtom& head, const std::vector<RawAtom>& positive,
                const std::vector<RawAtom>& negative,
                const std::vector<RawComparison>& comparisons, std::size_t line);

}  // namespace relnet::detail
