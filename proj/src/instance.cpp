#include "xbridge/instance.hpp"

#include <stdexcept>

namespace xbridge {

std::string_view side_name(Side side) { return side == Side::Source ? "source" : "destination"; }

Side side_from_name(std::string_view name) {
  if (name == "source" || name == "src") return Side::Source;
  if (name == "destination" || name == "dst") return Side::Destination;
  throw ParseError("unknown side: " + std::string(name));
}

namespace {

const Value* first_leaf(const Value& v) {
  if (v.kind() == ValueKind::List) {
    const auto& l = v.as_list();
    if (l.empty()) return &v;
    return first_leaf(l.front());
  }
  if (v.kind() == ValueKind::Record) return nullptr;
  return &v;
}

const Value* walk(const Value& v, const std::vector<std::string>& segs, std::size_t i) {
  if (v.kind() == ValueKind::List) {
    const auto& l = v.as_list();
    if (l.empty()) return i == segs.size() ? &v : nullptr;
    for (const auto& e : l) {
      if (const Value* hit = walk(e, segs, i)) return hit;
    }
    return nullptr;
  }
  if (i == segs.size()) return first_leaf(v);
  if (v.kind() != ValueKind::Record) return nullptr;
  const Value* next = v.as_record().find(segs[i]);
  return next ? walk(*next, segs, i + 1) : nullptr;
}

const Value* walk_record(const Record& r, const std::vector<std::string>& segs) {
  if (segs.empty()) return nullptr;
  const Value* next = r.find(segs.front());
  return next ? walk(*next, segs, 1) : nullptr;
}

void visit_value(const FieldPath& path, const Value& v,
                 const std::function<void(const FieldPath&, const Value&)>& visit) {
  if (v.kind() == ValueKind::Record) {
    const auto& r = v.as_record();
    for (std::size_t i = 0; i < r.size(); ++i) visit_value(path.child(r.name_at(i)), r.value_at(i), visit);
  } else if (v.kind() == ValueKind::List && !v.as_list().empty()) {
    for (const auto& e : v.as_list()) visit_value(path, e, visit);
  } else {
    visit(path, v);
  }
}

void visit_record(const FieldPath& root, const Record& r,
                  const std::function<void(const FieldPath&, const Value&)>& visit) {
  for (std::size_t i = 0; i < r.size(); ++i) visit_value(root.child(r.name_at(i)), r.value_at(i), visit);
}

}  // namespace

std::optional<Value> resolve(const TransactionInstance& tx, const FieldPath& path) {
  switch (path.root_kind()) {
    case RootKind::Meta: {
      const auto& name = path.segments().front();
      if (name == meta_field::timestamp) return Value(UInt256(static_cast<std::uint64_t>(tx.timestamp)));
      if (name == meta_field::from) return Value(tx.sender);
      if (name == meta_field::to) return Value(tx.contract);
      if (name == meta_field::value) return Value(tx.native_value);
      return std::nullopt;
    }
    case RootKind::Transaction: {
      if (tx.call.function != path.root_name()) return std::nullopt;
      const Value* v = walk_record(tx.call.args, path.segments());
      return v ? std::optional<Value>(*v) : std::nullopt;
    }
    case RootKind::Log: {
      std::size_t seen = 0;
      for (const auto& log : tx.logs) {
        if (log.event != path.root_name()) continue;
        if (++seen == path.occurrence()) {
          const Value* v = walk_record(log.args, path.segments());
          return v ? std::optional<Value>(*v) : std::nullopt;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void for_each_leaf(const TransactionInstance& tx,
                   const std::function<void(const FieldPath&, const Value&)>& visit) {
  visit(FieldPath::meta(std::string(meta_field::timestamp)), Value(UInt256(static_cast<std::uint64_t>(tx.timestamp))));
  visit(FieldPath::meta(std::string(meta_field::from)), Value(tx.sender));
  visit(FieldPath::meta(std::string(meta_field::to)), Value(tx.contract));
  visit(FieldPath::meta(std::string(meta_field::value)), Value(tx.native_value));
  visit_record(FieldPath::transaction(tx.call.function), tx.call.args, visit);
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const auto& log : tx.logs) {
    std::size_t occurrence = 1;
    bool found = false;
    for (auto& [name, n] : counts) {
      if (name == log.event) {
        occurrence = ++n;
        found = true;
        break;
      }
    }
    if (!found) counts.emplace_back(log.event, 1);
    visit_record(FieldPath::log(log.event, occurrence), log.args, visit);
  }
}

void validate(const TransactionInstance& tx) {
  if (tx.timestamp <= 0) throw std::invalid_argument("instance timestamp must be positive");
  if (tx.call.function.empty()) throw std::invalid_argument("instance call has no function name");
  for (const auto& log : tx.logs) {
    if (log.event.empty()) throw std::invalid_argument("log without event name");
  }
}

}  // namespace xbridge
