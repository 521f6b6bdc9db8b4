#include "hybridrc/crypto.hpp"

#include <algorithm>
#include <sstream>

#include "hybridrc/path_set.hpp"

namespace hybridrc {

std::uint64_t payload_digest(const std::string& payload) {
  // FNV-1a, stable across platforms so traces are reproducible.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_string(const SignatureToken& t) {
  std::ostringstream os;
  os << (t.kind == SignerKind::tc ? "tc" : "sig") << '(' << t.signer;
  if (t.scope == SignScope::path) os << ",path=" << to_string(t.signed_path);
  os << ",src=" << t.broadcaster << ')';
  return os.str();
}

SignatureToken Signer::sign_payload(const MessageId& id) const {
  SignatureToken t;
  t.signer = self_;
  t.kind = SignerKind::node;
  t.scope = SignScope::payload;
  t.digest = payload_digest(id.payload);
  t.broadcaster = id.broadcaster;
  return authority_->mint(std::move(t));
}

SignatureToken Signer::sign_path(const Path& path, const MessageId& id) const {
  SignatureToken t;
  t.signer = self_;
  t.kind = SignerKind::node;
  t.scope = SignScope::path;
  t.digest = payload_digest(id.payload);
  t.broadcaster = id.broadcaster;
  t.signed_path = path;
  return authority_->mint(std::move(t));
}

Path signed_entry_path(const SignedPath& e, const MessageId& id, const Topology& g) {
  Path full = e.path;
  full.push_back(e.sig.signer);
  Path out;
  for (NodeId u : full)
    if (u != id.broadcaster && !g.is_trusted(u)) out.push_back(u);
  return out;
}

TrustedComponent::TrustedComponent(TokenAuthority& authority, NodeId owner, std::size_t f)
    : authority_(&authority), owner_(owner), f_(f) {
  if (!authority.topology().has_tc(owner)) throw std::invalid_argument("node " + std::to_string(owner) + " has no trusted component");
}

SignatureToken TrustedComponent::endorse(const MessageId& id) {
  SignatureToken t;
  t.signer = owner_;
  t.kind = SignerKind::tc;
  t.scope = SignScope::payload;
  t.digest = payload_digest(id.payload);
  t.broadcaster = id.broadcaster;
  t = authority_->mint(std::move(t));
  authority_->attestations_.push_back({owner_, t});
  return t;
}

SignatureToken TrustedComponent::attest_signature(const MessageId& id, const SignatureToken& sig) {
  if (sig.scope != SignScope::payload) throw AttestationRefused("signature does not cover a payload");
  if (!authority_->verifies_payload(sig, id)) throw AttestationRefused("signature does not verify");
  const Topology& g = authority_->topology();
  const bool broadcaster_sig = sig.signer == id.broadcaster && sig.kind == SignerKind::node;
  const bool trusted_sig = sig.kind == SignerKind::node && g.contains(sig.signer) && g.is_trusted(sig.signer);
  const bool tc_sig = sig.kind == SignerKind::tc;
  if (!broadcaster_sig && !trusted_sig && !tc_sig) throw AttestationRefused("signer cannot vouch for the payload on its own");
  return endorse(id);
}

SignatureToken TrustedComponent::attest_paths(const MessageId& id, const std::vector<SignedPath>& entries) {
  if (entries.size() != f_ + 1) throw AttestationRefused("expected " + std::to_string(f_ + 1) + " signed paths");
  const Topology& g = authority_->topology();
  std::vector<NodeSet> sets;
  for (const SignedPath& e : entries) {
    bool ok = false;
    if (e.sig.scope == SignScope::path)
      ok = authority_->verifies_path(e.sig, e.path, id);
    else
      ok = e.path.empty() && e.sig.kind == SignerKind::node && authority_->verifies_payload(e.sig, id);
    if (!ok) throw AttestationRefused("signed path does not verify");
    Path full = e.path;
    full.push_back(e.sig.signer);
    std::sort(full.begin(), full.end());
    if (std::adjacent_find(full.begin(), full.end()) != full.end()) throw AttestationRefused("signed path repeats a node");
    sets.push_back(NodeSet::of(signed_entry_path(e, id, g)));
  }
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      if (sets[i].intersects(sets[j])) throw AttestationRefused("signed paths are not vertex-disjoint");
  return endorse(id);
}

}  // namespace hybridrc
