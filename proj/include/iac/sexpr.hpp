#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iac {

/// A parsed SMT-LIB S-expression. Symbols are stored unquoted; `quoted`
/// records whether the source used |...|.
struct SExpr {
  enum class Kind { List, Symbol, Numeral, Decimal, String, Keyword };

  Kind kind = Kind::List;
  std::string text;
  bool quoted = false;
  std::vector<SExpr> items;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol(std::string_view name) const { return kind == Kind::Symbol && text == name; }
  /// Head symbol of a non-empty list, else empty.
  std::string_view head() const;
};

/// Parses every top-level S-expression in `text`. `;` starts a comment.
/// Throws SmtSyntaxError with a line:column position.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Compact rendering; symbols needing it are re-quoted.
std::string to_string(const SExpr& e);

/// "|name|" unless `name` is a legal simple symbol.
std::string quote_symbol(std::string_view name);

}  // namespace iac
