#include "xbridge/abi.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "xbridge/keccak.hpp"

namespace xbridge::abi {

namespace {

constexpr std::size_t kWord = 32;

[[noreturn]] void fail(AbiError::Kind kind, const std::string& what) { throw AbiError(kind, what); }

std::optional<std::size_t> parse_size(std::string_view digits) {
  if (digits.empty()) return std::nullopt;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Types

AbiType AbiType::uint(std::size_t bits) {
  if (bits == 0 || bits > 256 || bits % 8 != 0) fail(AbiError::Kind::UnsupportedType, "bad uint width");
  AbiType t;
  t.kind_ = Kind::UInt;
  t.width_ = bits;
  return t;
}

AbiType AbiType::sint(std::size_t bits) {
  if (bits == 0 || bits > 256 || bits % 8 != 0) fail(AbiError::Kind::UnsupportedType, "bad int width");
  AbiType t;
  t.kind_ = Kind::Int;
  t.width_ = bits;
  return t;
}

AbiType AbiType::address() {
  AbiType t;
  t.kind_ = Kind::Address;
  t.width_ = 160;
  return t;
}

AbiType AbiType::boolean() {
  AbiType t;
  t.kind_ = Kind::Bool;
  t.width_ = 8;
  return t;
}

AbiType AbiType::fixed_bytes(std::size_t size) {
  if (size == 0 || size > 32) fail(AbiError::Kind::UnsupportedType, "bad bytesN width");
  AbiType t;
  t.kind_ = Kind::FixedBytes;
  t.width_ = size;
  return t;
}

AbiType AbiType::bytes() {
  AbiType t;
  t.kind_ = Kind::Bytes;
  t.width_ = 0;
  return t;
}

AbiType AbiType::string() {
  AbiType t;
  t.kind_ = Kind::String;
  t.width_ = 0;
  return t;
}

AbiType AbiType::array(AbiType element, std::optional<std::size_t> length) {
  if (length && *length == 0) fail(AbiError::Kind::UnsupportedType, "zero-length fixed array");
  AbiType t;
  t.kind_ = Kind::Array;
  t.width_ = 0;
  t.length_ = length;
  t.children_.push_back(std::move(element));
  return t;
}

AbiType AbiType::tuple(std::vector<std::pair<std::string, AbiType>> components) {
  if (components.empty()) fail(AbiError::Kind::UnsupportedType, "empty tuple");
  AbiType t;
  t.kind_ = Kind::Tuple;
  t.width_ = 0;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < components.size(); ++i) {
    auto& [name, type] = components[i];
    std::string key = name.empty() ? "arg" + std::to_string(i) : name;
    if (!seen.insert(key).second) fail(AbiError::Kind::UnsupportedType, "duplicate tuple component: " + key);
    t.names_.push_back(std::move(key));
    t.children_.push_back(std::move(type));
  }
  return t;
}

AbiType AbiType::parse(std::string_view text) {
  // Peel array suffixes from the right: "T[2][]" is a dynamic array of T[2].
  if (!text.empty() && text.back() == ']') {
    auto open = text.rfind('[');
    if (open == std::string_view::npos) fail(AbiError::Kind::UnsupportedType, "malformed array type");
    auto inner = text.substr(open + 1, text.size() - open - 2);
    std::optional<std::size_t> length;
    if (!inner.empty()) {
      length = parse_size(inner);
      if (!length) fail(AbiError::Kind::UnsupportedType, "bad array length: " + std::string(text));
    }
    return array(parse(text.substr(0, open)), length);
  }
  if (text == "address") return address();
  if (text == "bool") return boolean();
  if (text == "string") return string();
  if (text == "bytes") return bytes();
  if (text == "uint") return uint(256);
  if (text == "int") return sint(256);
  if (text == "byte") return fixed_bytes(1);
  if (text.starts_with("uint")) {
    if (auto n = parse_size(text.substr(4))) return uint(*n);
  } else if (text.starts_with("int")) {
    if (auto n = parse_size(text.substr(3))) return sint(*n);
  } else if (text.starts_with("bytes")) {
    if (auto n = parse_size(text.substr(5))) return fixed_bytes(*n);
  }
  fail(AbiError::Kind::UnsupportedType, "unsupported ABI type: " + std::string(text));
}

bool AbiType::is_dynamic() const {
  switch (kind_) {
    case Kind::Bytes:
    case Kind::String:
      return true;
    case Kind::Array:
      return !length_ || element().is_dynamic();
    case Kind::Tuple:
      return std::any_of(children_.begin(), children_.end(), [](const AbiType& c) { return c.is_dynamic(); });
    default:
      return false;
  }
}

std::size_t AbiType::head_size() const {
  if (is_dynamic()) return kWord;
  if (kind_ == Kind::Array) return *length_ * element().head_size();
  if (kind_ == Kind::Tuple) {
    std::size_t total = 0;
    for (const auto& c : children_) total += c.head_size();
    return total;
  }
  return kWord;
}

std::string AbiType::canonical() const {
  switch (kind_) {
    case Kind::UInt:
      return "uint" + std::to_string(width_);
    case Kind::Int:
      return "int" + std::to_string(width_);
    case Kind::Address:
      return "address";
    case Kind::Bool:
      return "bool";
    case Kind::FixedBytes:
      return "bytes" + std::to_string(width_);
    case Kind::Bytes:
      return "bytes";
    case Kind::String:
      return "string";
    case Kind::Array:
      return element().canonical() + "[" + (length_ ? std::to_string(*length_) : "") + "]";
    case Kind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < children_.size(); ++i) out += (i ? "," : "") + children_[i].canonical();
      return out + ")";
    }
  }
  return {};
}

std::string param_key(const Param& p, std::size_t index) {
  return p.name.empty() ? "arg" + std::to_string(index) : p.name;
}

namespace {

std::string signature_of(const std::string& name, const std::vector<Param>& inputs) {
  if (name.empty()) fail(AbiError::Kind::UnsupportedType, "descriptor without a name");
  std::string out = name + "(";
  for (std::size_t i = 0; i < inputs.size(); ++i) out += (i ? "," : "") + inputs[i].type.canonical();
  return out + ")";
}

}  // namespace

std::string canonical_signature(const FunctionDescriptor& fn) { return signature_of(fn.name, fn.inputs); }
std::string canonical_signature(const EventDescriptor& ev) { return signature_of(ev.name, ev.inputs); }

Hash32 topic0(std::string_view signature) { return keccak256(signature); }

std::array<std::uint8_t, 4> selector(std::string_view signature) {
  auto h = keccak256(signature);
  return {h.raw()[0], h.raw()[1], h.raw()[2], h.raw()[3]};
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

void append_word(Bytes& out, const std::array<std::uint8_t, 32>& word) { out.insert(out.end(), word.begin(), word.end()); }

void append_size(Bytes& out, std::size_t n) { append_word(out, uint256_to_be(UInt256(n))); }

void append_padded(Bytes& out, ByteView data) {
  out.insert(out.end(), data.begin(), data.end());
  out.insert(out.end(), (kWord - data.size() % kWord) % kWord, 0);
}

void expect_kind(const Value& v, ValueKind kind, const AbiType& t) {
  if (v.kind() != kind) {
    fail(AbiError::Kind::ValueMismatch,
         "value of kind " + std::string(kind_name(v.kind())) + " does not fit " + t.canonical());
  }
}

Bytes encode_value(const AbiType& t, const Value& v);

Bytes encode_sequence(const std::vector<const AbiType*>& types, const std::vector<const Value*>& values) {
  std::size_t head_total = 0;
  for (auto* t : types) head_total += t->head_size();
  Bytes head;
  Bytes tail;
  head.reserve(head_total);
  for (std::size_t i = 0; i < types.size(); ++i) {
    Bytes enc = encode_value(*types[i], *values[i]);
    if (types[i]->is_dynamic()) {
      append_size(head, head_total + tail.size());
      tail.insert(tail.end(), enc.begin(), enc.end());
    } else {
      head.insert(head.end(), enc.begin(), enc.end());
    }
  }
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

Bytes encode_record(const AbiType& t, const Record& r) {
  const auto& names = t.component_names();
  if (r.size() != names.size()) fail(AbiError::Kind::ValueMismatch, "tuple arity mismatch for " + t.canonical());
  std::vector<const AbiType*> types;
  std::vector<const Value*> values;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (r.name_at(i) != names[i]) fail(AbiError::Kind::ValueMismatch, "tuple component order mismatch: " + names[i]);
    types.push_back(&t.components()[i]);
    values.push_back(&r.value_at(i));
  }
  return encode_sequence(types, values);
}

Bytes encode_value(const AbiType& t, const Value& v) {
  Bytes out;
  switch (t.kind()) {
    case AbiType::Kind::UInt: {
      expect_kind(v, ValueKind::UInt, t);
      if (t.width() < 256 && (v.as_uint() >> t.width()) != 0) {
        fail(AbiError::Kind::Range, "value exceeds " + t.canonical());
      }
      append_word(out, uint256_to_be(v.as_uint()));
      return out;
    }
    case AbiType::Kind::Int: {
      expect_kind(v, ValueKind::Int, t);
      const Int256& x = v.as_int();
      Int256 bound = Int256(1) << (t.width() - 1);
      if (t.width() == 256) {
        if (x >= 0 ? (UInt256(x) >> 255) != 0 : (UInt256(-x) > (UInt256(1) << 255))) {
          fail(AbiError::Kind::Range, "value exceeds int256");
        }
      } else if (x >= bound || x < -bound) {
        fail(AbiError::Kind::Range, "value exceeds " + t.canonical());
      }
      UInt256 word = x >= 0 ? UInt256(x) : UInt256(0) - UInt256(-x);
      append_word(out, uint256_to_be(word));
      return out;
    }
    case AbiType::Kind::Address: {
      expect_kind(v, ValueKind::Address, t);
      out.assign(12, 0);
      out.insert(out.end(), v.as_address().raw().begin(), v.as_address().raw().end());
      return out;
    }
    case AbiType::Kind::Bool:
      expect_kind(v, ValueKind::Bool, t);
      append_word(out, uint256_to_be(UInt256(v.as_bool() ? 1 : 0)));
      return out;
    case AbiType::Kind::FixedBytes:
      expect_kind(v, ValueKind::Bytes, t);
      if (v.as_bytes().size() != t.width()) fail(AbiError::Kind::ValueMismatch, "wrong length for " + t.canonical());
      append_padded(out, v.as_bytes());
      return out;
    case AbiType::Kind::Bytes:
      expect_kind(v, ValueKind::Bytes, t);
      append_size(out, v.as_bytes().size());
      append_padded(out, v.as_bytes());
      return out;
    case AbiType::Kind::String: {
      expect_kind(v, ValueKind::Text, t);
      const auto& s = v.as_text();
      append_size(out, s.size());
      append_padded(out, ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      return out;
    }
    case AbiType::Kind::Array: {
      expect_kind(v, ValueKind::List, t);
      const auto& items = v.as_list();
      if (t.length() && items.size() != *t.length()) {
        fail(AbiError::Kind::ValueMismatch, "fixed array length mismatch for " + t.canonical());
      }
      std::vector<const AbiType*> types(items.size(), &t.element());
      std::vector<const Value*> values;
      for (const auto& e : items) values.push_back(&e);
      if (!t.length()) append_size(out, items.size());
      Bytes body = encode_sequence(types, values);
      out.insert(out.end(), body.begin(), body.end());
      return out;
    }
    case AbiType::Kind::Tuple:
      expect_kind(v, ValueKind::Record, t);
      return encode_record(t, v.as_record());
  }
  return out;
}

std::vector<const Value*> lookup_args(std::span<const Param> params, const Record& args) {
  if (args.size() != params.size()) fail(AbiError::Kind::ValueMismatch, "argument count mismatch");
  std::vector<const Value*> values;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Value* v = args.find(param_key(params[i], i));
    if (!v) fail(AbiError::Kind::ValueMismatch, "missing argument " + param_key(params[i], i));
    values.push_back(v);
  }
  return values;
}

}  // namespace

Bytes encode_params(std::span<const Param> params, const Record& args) {
  auto values = lookup_args(params, args);
  std::vector<const AbiType*> types;
  for (const auto& p : params) types.push_back(&p.type);
  return encode_sequence(types, values);
}

Bytes encode_call(const FunctionDescriptor& fn, const Record& args) {
  auto sel = selector(canonical_signature(fn));
  Bytes out(sel.begin(), sel.end());
  Bytes body = encode_params(fn.inputs, args);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

EncodedLog encode_log(const EventDescriptor& ev, const Record& args) {
  auto values = lookup_args(ev.inputs, args);
  EncodedLog log;
  if (!ev.anonymous) log.topics.push_back(topic0(canonical_signature(ev)));
  std::vector<const AbiType*> types;
  std::vector<const Value*> data_values;
  for (std::size_t i = 0; i < ev.inputs.size(); ++i) {
    const auto& p = ev.inputs[i];
    if (!p.indexed) {
      types.push_back(&p.type);
      data_values.push_back(values[i]);
      continue;
    }
    if (p.type.kind() == AbiType::Kind::String || p.type.kind() == AbiType::Kind::Bytes) {
      Bytes enc = encode_value(p.type, *values[i]);
      ByteView payload(enc.data() + kWord, p.type.kind() == AbiType::Kind::String ? values[i]->as_text().size()
                                                                                : values[i]->as_bytes().size());
      log.topics.push_back(keccak256(payload));
    } else if (p.type.is_dynamic() || p.type.kind() == AbiType::Kind::Array || p.type.kind() == AbiType::Kind::Tuple) {
      fail(AbiError::Kind::UnsupportedType, "indexed composite input encoding is not supported: " + p.name);
    } else {
      Bytes enc = encode_value(p.type, *values[i]);
      log.topics.push_back(Hash32::from_span(enc));
    }
  }
  log.data = encode_sequence(types, data_values);
  return log;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

class Decoder {
 public:
  Decoder(DecodeMode mode, std::vector<std::string>& warnings) : mode_(mode), warnings_(warnings) {}

  Value decode_static(const AbiType& t, ByteView region, std::size_t pos) {
    switch (t.kind()) {
      case AbiType::Kind::Array: {
        List items;
        std::size_t step = t.element().head_size();
        for (std::size_t i = 0; i < *t.length(); ++i) items.push_back(decode_static(t.element(), region, pos + i * step));
        return Value(std::move(items));
      }
      case AbiType::Kind::Tuple: {
        Record r;
        for (std::size_t i = 0; i < t.components().size(); ++i) {
          r.add(t.component_names()[i], decode_static(t.components()[i], region, pos));
          pos += t.components()[i].head_size();
        }
        return Value(std::move(r));
      }
      default:
        return decode_word(t, word_at(region, pos));
    }
  }

  Value decode_dynamic(const AbiType& t, ByteView region) {
    switch (t.kind()) {
      case AbiType::Kind::Bytes:
      case AbiType::Kind::String: {
        std::size_t len = read_size(region, 0, "length");
        if (len > region.size() - kWord) fail(AbiError::Kind::Truncated, "byte payload exceeds buffer");
        ByteView payload = region.subspan(kWord, len);
        check_padding(region.subspan(kWord + len), (kWord - len % kWord) % kWord, t);
        if (t.kind() == AbiType::Kind::Bytes) return Value(Bytes(payload.begin(), payload.end()));
        return Value(std::string(payload.begin(), payload.end()));
      }
      case AbiType::Kind::Array: {
        if (!t.length()) {
          std::size_t n = read_size(region, 0, "array length");
          return Value(decode_sequence(t.element(), n, region.subspan(kWord)));
        }
        return Value(decode_sequence(t.element(), *t.length(), region));
      }
      case AbiType::Kind::Tuple: {
        std::vector<const AbiType*> types;
        for (const auto& c : t.components()) types.push_back(&c);
        auto values = decode_heads(types, region);
        Record r;
        for (std::size_t i = 0; i < values.size(); ++i) r.add(t.component_names()[i], std::move(values[i]));
        return Value(std::move(r));
      }
      default:
        fail(AbiError::Kind::UnsupportedType, "static type routed to dynamic decoder");
    }
  }

  std::vector<Value> decode_heads(const std::vector<const AbiType*>& types, ByteView region) {
    std::vector<Value> out;
    out.reserve(types.size());
    std::size_t pos = 0;
    for (const auto* t : types) {
      if (t->is_dynamic()) {
        std::size_t off = read_size(region, pos, "offset");
        if (off > region.size()) fail(AbiError::Kind::OffsetOutOfBounds, "offset points past the buffer");
        out.push_back(decode_dynamic(*t, region.subspan(off)));
      } else {
        if (pos + t->head_size() > region.size()) fail(AbiError::Kind::Truncated, "static head exceeds buffer");
        out.push_back(decode_static(*t, region, pos));
      }
      pos += t->head_size();
    }
    return out;
  }

  Value decode_word(const AbiType& t, ByteView w) {
    switch (t.kind()) {
      case AbiType::Kind::UInt: {
        UInt256 v = uint256_from_be(w);
        if (t.width() < 256 && (v >> t.width()) != 0) {
          irregular("non-zero high bits in " + t.canonical());
          v &= (UInt256(1) << t.width()) - 1;
        }
        return Value(v);
      }
      case AbiType::Kind::Int: {
        UInt256 raw = uint256_from_be(w);
        std::size_t bits = t.width();
        if (bits < 256) {
          UInt256 mask = (UInt256(1) << bits) - 1;
          bool neg = ((raw >> (bits - 1)) & 1) != 0;
          UInt256 high = raw & ~mask;
          if (high != (neg ? ~mask : UInt256(0))) {
            irregular("bad sign extension in " + t.canonical());
          }
          raw = neg ? (raw | ~mask) : (raw & mask);
        }
        bool neg = ((raw >> 255) & 1) != 0;
        if (!neg) return Value(Int256(raw));
        return Value(Int256(-Int256(UInt256(0) - raw)));
      }
      case AbiType::Kind::Address: {
        for (std::size_t i = 0; i < 12; ++i) {
          if (w[i] != 0) {
            irregular("dirty address padding");
            break;
          }
        }
        return Value(Address::from_span(w.subspan(12)));
      }
      case AbiType::Kind::Bool: {
        UInt256 v = uint256_from_be(w);
        if (v > 1) irregular("non-canonical bool");
        return Value(v != 0);
      }
      case AbiType::Kind::FixedBytes: {
        for (std::size_t i = t.width(); i < kWord; ++i) {
          if (w[i] != 0) {
            irregular("dirty " + t.canonical() + " padding");
            break;
          }
        }
        return Value(Bytes(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(t.width())));
      }
      default:
        fail(AbiError::Kind::UnsupportedType, "composite type routed to word decoder");
    }
  }

 private:
  List decode_sequence(const AbiType& elem, std::size_t n, ByteView region) {
    std::size_t head = elem.head_size();
    if (head == 0 || n > region.size() / head) fail(AbiError::Kind::Truncated, "array elements exceed buffer");
    std::vector<const AbiType*> types(n, &elem);
    auto values = decode_heads(types, region);
    return List(std::make_move_iterator(values.begin()), std::make_move_iterator(values.end()));
  }

  ByteView word_at(ByteView region, std::size_t pos) {
    if (pos > region.size() || region.size() - pos < kWord) fail(AbiError::Kind::Truncated, "word exceeds buffer");
    return region.subspan(pos, kWord);
  }

  std::size_t read_size(ByteView region, std::size_t pos, const char* what) {
    UInt256 v = uint256_from_be(word_at(region, pos));
    if (v > region.size()) fail(AbiError::Kind::OffsetOutOfBounds, std::string(what) + " exceeds buffer");
    return static_cast<std::size_t>(v);
  }

  void check_padding(ByteView rest, std::size_t pad, const AbiType& t) {
    if (rest.size() < pad) {
      irregular("missing tail padding after " + t.canonical());
      pad = rest.size();
    }
    for (std::size_t i = 0; i < pad; ++i) {
      if (rest[i] != 0) {
        irregular("dirty tail padding after " + t.canonical());
        return;
      }
    }
  }

  void irregular(const std::string& what) {
    if (mode_ == DecodeMode::Strict) fail(AbiError::Kind::Padding, what);
    warnings_.push_back(what);
  }

  DecodeMode mode_;
  std::vector<std::string>& warnings_;
};

}  // namespace

Record decode_params(std::span<const Param> params, ByteView data, DecodeMode mode, std::vector<std::string>& warnings) {
  Decoder dec(mode, warnings);
  std::vector<const AbiType*> types;
  for (const auto& p : params) types.push_back(&p.type);
  auto values = dec.decode_heads(types, data);
  Record r;
  for (std::size_t i = 0; i < params.size(); ++i) r.add(param_key(params[i], i), std::move(values[i]));
  return r;
}

DecodeResult decode_call(const FunctionDescriptor& fn, ByteView input, DecodeMode mode) {
  auto sel = selector(canonical_signature(fn));
  if (input.size() < 4 || !std::equal(sel.begin(), sel.end(), input.begin())) {
    fail(AbiError::Kind::SelectorMismatch, "selector does not match " + fn.name);
  }
  DecodeResult out;
  out.record = decode_params(fn.inputs, input.subspan(4), mode, out.warnings);
  return out;
}

DecodeResult decode_log(const EventDescriptor& ev, std::span<const Hash32> topics, ByteView data, DecodeMode mode) {
  std::size_t indexed = static_cast<std::size_t>(
      std::count_if(ev.inputs.begin(), ev.inputs.end(), [](const Param& p) { return p.indexed; }));
  std::size_t first = ev.anonymous ? 0 : 1;
  if (topics.size() != indexed + first) fail(AbiError::Kind::TopicCount, "topic count mismatch for " + ev.name);
  if (!ev.anonymous && topics[0] != topic0(canonical_signature(ev))) {
    fail(AbiError::Kind::SelectorMismatch, "topic0 does not match " + ev.name);
  }

  DecodeResult out;
  std::vector<Param> data_params;
  for (const auto& p : ev.inputs) {
    if (!p.indexed) data_params.push_back(p);
  }
  std::vector<std::string> data_keys;
  for (std::size_t i = 0; i < ev.inputs.size(); ++i) {
    if (!ev.inputs[i].indexed) data_keys.push_back(param_key(ev.inputs[i], i));
  }
  for (std::size_t i = 0; i < data_params.size(); ++i) data_params[i].name = data_keys[i];
  Record body = decode_params(data_params, data, mode, out.warnings);

  Decoder dec(mode, out.warnings);
  std::size_t topic = first;
  std::size_t body_index = 0;
  for (std::size_t i = 0; i < ev.inputs.size(); ++i) {
    const auto& p = ev.inputs[i];
    std::string key = param_key(p, i);
    if (!p.indexed) {
      out.record.add(key, body.value_at(body_index++));
      continue;
    }
    const Hash32& word = topics[topic++];
    if (p.type.is_dynamic() || p.type.kind() == AbiType::Kind::Array || p.type.kind() == AbiType::Kind::Tuple) {
      out.warnings.push_back("indexed input '" + key + "' holds a hash and is non-recoverable");
      out.record.add(key, Value(Bytes(word.raw().begin(), word.raw().end())));
    } else {
      out.record.add(key, dec.decode_word(p.type, word.view()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry

void Registry::add(FunctionDescriptor fn) {
  auto sel = selector(canonical_signature(fn));
  if (by_selector_.contains(sel)) return;
  by_selector_[sel] = functions_.size();
  functions_.push_back(std::move(fn));
}

void Registry::add(EventDescriptor ev) {
  auto t = topic0(canonical_signature(ev));
  for (auto idx : by_topic_[t]) {
    const auto& known = events_[idx];
    if (known.inputs == ev.inputs) return;
  }
  by_topic_[t].push_back(events_.size());
  events_.push_back(std::move(ev));
}

const FunctionDescriptor* Registry::function(std::span<const std::uint8_t> sel) const {
  if (sel.size() < 4) return nullptr;
  std::array<std::uint8_t, 4> key{sel[0], sel[1], sel[2], sel[3]};
  auto it = by_selector_.find(key);
  return it == by_selector_.end() ? nullptr : &functions_[it->second];
}

const EventDescriptor* Registry::event(const Hash32& topic, std::size_t topic_count) const {
  auto it = by_topic_.find(topic);
  if (it == by_topic_.end()) return nullptr;
  for (auto idx : it->second) {
    const auto& ev = events_[idx];
    auto indexed = static_cast<std::size_t>(
        std::count_if(ev.inputs.begin(), ev.inputs.end(), [](const Param& p) { return p.indexed; }));
    if (indexed + 1 == topic_count) return &ev;
  }
  return nullptr;
}

namespace {

AbiType type_from_json(const nlohmann::json& j) {
  std::string type = j.at("type").get<std::string>();
  if (!type.starts_with("tuple")) return AbiType::parse(type);
  std::vector<std::pair<std::string, AbiType>> comps;
  for (const auto& c : j.at("components")) comps.emplace_back(c.value("name", ""), type_from_json(c));
  AbiType base = AbiType::tuple(std::move(comps));
  // Re-apply array suffixes ("tuple[2][]") around the tuple base.
  std::string_view suffix = std::string_view(type).substr(5);
  std::vector<std::optional<std::size_t>> dims;
  while (!suffix.empty()) {
    if (suffix.front() != '[') fail(AbiError::Kind::UnsupportedType, "malformed tuple type: " + type);
    auto close = suffix.find(']');
    if (close == std::string_view::npos) fail(AbiError::Kind::UnsupportedType, "malformed tuple type: " + type);
    auto inner = suffix.substr(1, close - 1);
    if (inner.empty()) {
      dims.emplace_back(std::nullopt);
    } else if (auto n = parse_size(inner)) {
      dims.emplace_back(*n);
    } else {
      fail(AbiError::Kind::UnsupportedType, "bad array length: " + type);
    }
    suffix.remove_prefix(close + 1);
  }
  for (auto d : dims) base = AbiType::array(std::move(base), d);
  return base;
}

nlohmann::json type_to_json(const std::string& name, const AbiType& t) {
  nlohmann::json j;
  j["name"] = name;
  const AbiType* base = &t;
  std::string suffix;
  while (base->kind() == AbiType::Kind::Array) {
    suffix = "[" + (base->length() ? std::to_string(*base->length()) : std::string()) + "]" + suffix;
    base = &base->element();
  }
  if (base->kind() == AbiType::Kind::Tuple) {
    j["type"] = "tuple" + suffix;
    auto comps = nlohmann::json::array();
    for (std::size_t i = 0; i < base->components().size(); ++i) {
      comps.push_back(type_to_json(base->component_names()[i], base->components()[i]));
    }
    j["components"] = comps;
  } else {
    j["type"] = t.canonical();
  }
  return j;
}

}  // namespace

std::vector<std::string> Registry::load_json(const nlohmann::json& abi) {
  std::vector<std::string> skipped;
  if (!abi.is_array()) throw ParseError("JSON ABI must be an array");
  for (const auto& entry : abi) {
    std::string kind = entry.value("type", "function");
    if (kind != "function" && kind != "event") continue;
    std::string name = entry.value("name", "");
    try {
      std::vector<Param> inputs;
      for (const auto& in : entry.value("inputs", nlohmann::json::array())) {
        inputs.push_back(Param{in.value("name", ""), type_from_json(in), in.value("indexed", false)});
      }
      if (kind == "function") {
        FunctionDescriptor fn{name, std::move(inputs), entry.value("stateMutability", "") == "payable"};
        canonical_signature(fn);
        add(std::move(fn));
      } else {
        EventDescriptor ev{name, std::move(inputs), entry.value("anonymous", false)};
        canonical_signature(ev);
        add(std::move(ev));
      }
    } catch (const AbiError& e) {
      skipped.push_back(name + ": " + e.what());
    }
  }
  return skipped;
}

std::vector<std::string> Registry::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ABI file " + path.string());
  return load_json(nlohmann::json::parse(in));
}

nlohmann::json to_json_abi(std::span<const FunctionDescriptor> functions, std::span<const EventDescriptor> events) {
  auto out = nlohmann::json::array();
  for (const auto& fn : functions) {
    nlohmann::json j;
    j["type"] = "function";
    j["name"] = fn.name;
    auto inputs = nlohmann::json::array();
    for (const auto& p : fn.inputs) inputs.push_back(type_to_json(p.name, p.type));
    j["inputs"] = inputs;
    j["outputs"] = nlohmann::json::array();
    j["stateMutability"] = fn.payable ? "payable" : "nonpayable";
    out.push_back(j);
  }
  for (const auto& ev : events) {
    nlohmann::json j;
    j["type"] = "event";
    j["name"] = ev.name;
    j["anonymous"] = ev.anonymous;
    auto inputs = nlohmann::json::array();
    for (const auto& p : ev.inputs) {
      auto pj = type_to_json(p.name, p.type);
      pj["indexed"] = p.indexed;
      inputs.push_back(pj);
    }
    j["inputs"] = inputs;
    out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances

DecodedInstance decode_instance(const RawTransaction& raw, const Registry& registry, const DecodeOptions& options) {
  DecodedInstance out;
  auto& tx = out.instance;
  tx.chain = raw.chain;
  tx.tx_hash = raw.hash;
  tx.block_number = raw.block_number;
  tx.timestamp = raw.timestamp;
  tx.sender = raw.from;
  tx.contract = raw.to;
  tx.native_value = raw.value;
  tx.side = raw.side;

  auto unknown_call = [&](const std::string& why) {
    tx.call.function = std::string(kUnknownName);
    tx.call.known = false;
    tx.call.args = Record();
    ByteView input(raw.input);
    tx.call.args.add("selector", Value(Bytes(input.begin(), input.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, input.size())))));
    tx.call.args.add("data", Value(Bytes(raw.input.size() > 4 ? raw.input.begin() + 4 : raw.input.end(), raw.input.end())));
    out.diagnostics.push_back("call: " + why);
  };

  if (const auto* fn = registry.function(raw.input)) {
    try {
      auto res = decode_call(*fn, raw.input, options.mode);
      tx.call.function = fn->name;
      tx.call.args = std::move(res.record);
      for (auto& w : res.warnings) out.diagnostics.push_back("call: " + w);
    } catch (const AbiError& e) {
      unknown_call(std::string("decode failed: ") + e.what());
    }
  } else {
    unknown_call("unknown selector");
  }

  for (std::size_t i = 0; i < raw.logs.size(); ++i) {
    const auto& rl = raw.logs[i];
    const EventDescriptor* ev = rl.topics.empty() ? nullptr : registry.event(rl.topics.front(), rl.topics.size());
    std::string why = "unknown topic";
    if (ev) {
      try {
        auto res = decode_log(*ev, rl.topics, rl.data, options.mode);
        tx.logs.push_back(DecodedLog{ev->name, rl.address, std::move(res.record), true});
        for (auto& w : res.warnings) out.diagnostics.push_back("log " + std::to_string(i) + ": " + w);
        continue;
      } catch (const AbiError& e) {
        why = std::string("decode failed: ") + e.what();
      }
    }
    out.diagnostics.push_back("log " + std::to_string(i) + ": " + why);
    if (!options.keep_unknown_logs) continue;
    Record placeholder;
    placeholder.add("topic0", Value(rl.topics.empty() ? Bytes() : Bytes(rl.topics[0].raw().begin(), rl.topics[0].raw().end())));
    placeholder.add("data", Value(rl.data));
    tx.logs.push_back(DecodedLog{std::string(kUnknownName), rl.address, std::move(placeholder), false});
  }
  return out;
}

}  // namespace xbridge::abi
