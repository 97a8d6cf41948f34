#include "xbridge/field_path.hpp"

#include <charconv>

#include "xbridge/bytes.hpp"

namespace xbridge {

namespace {

bool valid_segment(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == '.' || c == '[' || c == ']') return false;
  }
  return true;
}

std::vector<std::string> split_segments(std::string_view rest) {
  std::vector<std::string> out;
  if (rest.empty()) return out;
  if (rest.front() != '.') throw ParseError("expected '.' after path root");
  rest.remove_prefix(1);
  while (true) {
    auto dot = rest.find('.');
    auto seg = rest.substr(0, dot);
    if (!valid_segment(seg)) throw ParseError("empty or invalid path segment");
    out.emplace_back(seg);
    if (dot == std::string_view::npos) break;
    rest.remove_prefix(dot + 1);
  }
  return out;
}

}  // namespace

FieldPath FieldPath::transaction(std::string function, std::vector<std::string> segments) {
  FieldPath p;
  p.kind_ = RootKind::Transaction;
  p.root_ = std::move(function);
  p.segments_ = std::move(segments);
  p.rerender();
  return p;
}

FieldPath FieldPath::log(std::string event, std::size_t occurrence, std::vector<std::string> segments) {
  FieldPath p;
  p.kind_ = RootKind::Log;
  p.root_ = std::move(event);
  p.occurrence_ = occurrence == 0 ? 1 : occurrence;
  p.segments_ = std::move(segments);
  p.rerender();
  return p;
}

FieldPath FieldPath::meta(std::string name) {
  FieldPath p;
  p.kind_ = RootKind::Meta;
  p.segments_ = {std::move(name)};
  p.rerender();
  return p;
}

FieldPath FieldPath::child(std::string segment) const {
  FieldPath p = *this;
  p.segments_.push_back(std::move(segment));
  p.rerender();
  return p;
}

void FieldPath::rerender() {
  switch (kind_) {
    case RootKind::Transaction:
      rendered_ = "transaction[" + root_ + "]";
      break;
    case RootKind::Log:
      rendered_ = "log[" + root_;
      if (occurrence_ > 1) rendered_ += "#" + std::to_string(occurrence_);
      rendered_ += "]";
      break;
    case RootKind::Meta:
      rendered_ = "tx";
      break;
  }
  for (const auto& s : segments_) {
    rendered_ += '.';
    rendered_ += s;
  }
}

FieldPath FieldPath::parse(std::string_view text) {
  if (text.starts_with("tx.")) {
    auto segs = split_segments(text.substr(2));
    if (segs.size() != 1) throw ParseError("metadata path takes exactly one segment: " + std::string(text));
    return meta(segs.front());
  }
  RootKind kind;
  std::string_view rest;
  if (text.starts_with("transaction[")) {
    kind = RootKind::Transaction;
    rest = text.substr(12);
  } else if (text.starts_with("log[")) {
    kind = RootKind::Log;
    rest = text.substr(4);
  } else {
    throw ParseError("unknown path root: " + std::string(text));
  }
  auto close = rest.find(']');
  if (close == std::string_view::npos || close == 0) throw ParseError("unterminated path root: " + std::string(text));
  std::string_view name = rest.substr(0, close);
  auto segs = split_segments(rest.substr(close + 1));
  if (kind == RootKind::Transaction) {
    if (name.find('#') != std::string_view::npos) throw ParseError("occurrence marker on transaction root");
    return transaction(std::string(name), std::move(segs));
  }
  std::size_t occurrence = 1;
  if (auto hash = name.find('#'); hash != std::string_view::npos) {
    auto digits = name.substr(hash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), occurrence);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || occurrence < 2) {
      throw ParseError("bad log occurrence marker: " + std::string(text));
    }
    name = name.substr(0, hash);
    if (name.empty()) throw ParseError("empty event name");
  }
  return log(std::string(name), occurrence, std::move(segs));
}

}  // namespace xbridge
