#include "xbridge/domain.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace xbridge {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::D:
      return "D";
    case Role::C:
      return "C";
    case Role::T:
      return "T";
    case Role::A:
      return "A";
    case Role::Ts:
      return "Ts";
  }
  return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
  if (name == "D" || name == "destination" || name == "to") return Role::D;
  if (name == "C" || name == "chain") return Role::C;
  if (name == "T" || name == "token") return Role::T;
  if (name == "A" || name == "amount") return Role::A;
  if (name == "Ts" || name == "timestamp") return Role::Ts;
  return std::nullopt;
}

bool CandidateQuintuple::complete() const {
  for (auto r : kAllRoles) {
    if (roles[r].empty()) return false;
  }
  return true;
}

FeeRate FeeRate::from_fraction(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fee_rate must lie in [0, 1]");
  }
  return from_ppb(static_cast<std::uint64_t>(std::llround(fraction * kDenominator)));
}

FeeRate FeeRate::from_ppb(std::uint64_t ppb) {
  if (ppb > kDenominator) throw std::invalid_argument("fee_rate must lie in [0, 1]");
  FeeRate r;
  r.ppb_ = ppb;
  return r;
}

std::optional<ChainId> PairingParams::canonical_chain(const UInt256& raw) const {
  if (raw > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  auto id = static_cast<std::uint64_t>(raw);
  if (auto it = chain_alias.find(id); it != chain_alias.end()) return it->second;
  for (const auto& [from, to] : chain_alias) {
    if (to == id) return id;
  }
  return std::nullopt;
}

std::string PairingParams::canonical_token(ChainId chain, const Address& token) const {
  if (auto it = token_alias.find({chain, token}); it != token_alias.end()) return it->second;
  if (token.is_zero()) return std::to_string(chain) + ":native";
  return std::to_string(chain) + ":" + token.hex();
}

void PairingParams::validate() const {
  if (timewindow <= 0) throw std::invalid_argument("timewindow must be positive");
  if (fee_rate.ppb() > FeeRate::kDenominator) throw std::invalid_argument("fee_rate must lie in [0, 1]");
}

std::optional<std::string> canonical_token_value(const PairingParams& params, ChainId chain, const Value& v) {
  if (v.kind() == ValueKind::Address) return params.canonical_token(chain, v.as_address());
  if (v.kind() == ValueKind::Text) {
    if (looks_like_address(v.as_text())) return params.canonical_token(chain, Address::from_hex(v.as_text()));
    return "text:" + v.as_text();
  }
  return std::nullopt;
}

}  // namespace xbridge
