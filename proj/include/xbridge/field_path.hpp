#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace xbridge {

enum class RootKind { Transaction, Log, Meta };

/// Static identity of one value slot inside a transaction instance.
///
/// Rendered forms:
///   transaction[<function>].<k1>.<k2>...
///   log[<Event>].<k1>...        first log with that event name
///   log[<Event>#<n>].<k1>...    n-th (n >= 2) log with that event name
///   tx.<name>                   instance metadata (timestamp, from, to, value)
///
/// List indices never appear in the rendered form; a path that crosses a list
/// addresses the first element that contains the remaining segments.
class FieldPath {
 public:
  FieldPath() = default;

  static FieldPath transaction(std::string function, std::vector<std::string> segments = {});
  static FieldPath log(std::string event, std::size_t occurrence, std::vector<std::string> segments = {});
  static FieldPath meta(std::string name);

  /// Inverse of render(); throws ParseError on malformed text.
  static FieldPath parse(std::string_view rendered);

  RootKind root_kind() const { return kind_; }
  const std::string& root_name() const { return root_; }
  std::size_t occurrence() const { return occurrence_; }
  const std::vector<std::string>& segments() const { return segments_; }
  const std::string& render() const { return rendered_; }

  FieldPath child(std::string segment) const;

  bool operator==(const FieldPath& other) const { return rendered_ == other.rendered_; }
  std::strong_ordering operator<=>(const FieldPath& other) const { return rendered_ <=> other.rendered_; }

 private:
  void rerender();

  RootKind kind_ = RootKind::Transaction;
  std::string root_;
  std::size_t occurrence_ = 1;
  std::vector<std::string> segments_;
  std::string rendered_;
};

inline const std::string& render_path(const FieldPath& p) { return p.render(); }

namespace meta_field {
inline constexpr std::string_view timestamp = "timestamp";
inline constexpr std::string_view from = "from";
inline constexpr std::string_view to = "to";
inline constexpr std::string_view value = "value";
}  // namespace meta_field

}  // namespace xbridge

template <>
struct std::hash<xbridge::FieldPath> {
  std::size_t operator()(const xbridge::FieldPath& p) const noexcept {
    return std::hash<std::string>{}(p.render());
  }
};
