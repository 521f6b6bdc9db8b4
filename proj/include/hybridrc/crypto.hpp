#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridrc/graph.hpp"

namespace hybridrc {

/// Identity of one broadcast: who sent it and what.
struct MessageId {
  NodeId broadcaster = 0;
  std::string payload;

  friend bool operator==(const MessageId&, const MessageId&) = default;
  friend auto operator<=>(const MessageId&, const MessageId&) = default;
};

std::uint64_t payload_digest(const std::string& payload);

enum class SignerKind : std::uint8_t { node, tc };
enum class SignScope : std::uint8_t { payload, path };

/// Simulated signature. Genuineness is decided by the TokenAuthority that
/// minted it; any process may build a token value, but only minted ones verify.
struct SignatureToken {
  NodeId signer = 0;
  SignerKind kind = SignerKind::node;
  SignScope scope = SignScope::payload;
  std::uint64_t digest = 0;
  NodeId broadcaster = 0;
  Path signed_path;  // meaningful iff scope == path

  bool covers(const MessageId& id) const { return digest == payload_digest(id.payload) && broadcaster == id.broadcaster; }

  friend bool operator==(const SignatureToken&, const SignatureToken&) = default;
  friend auto operator<=>(const SignatureToken&, const SignatureToken&) = default;
};

std::string to_string(const SignatureToken& t);

struct AttestationRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TrustedComponent;

/// The signing environment of one simulated run.
///
/// Every genuine token is recorded here. A process can only obtain tokens
/// under its own id (through Signer), and TC-kind tokens only through a
/// TrustedComponent attestation.
class TokenAuthority {
 public:
  explicit TokenAuthority(const Topology& g) : g_(&g) {}

  bool genuine(const SignatureToken& t) const { return minted_.contains(t); }

  /// Genuine node-or-TC token over (id) with payload scope.
  bool verifies_payload(const SignatureToken& t, const MessageId& id) const {
    return t.scope == SignScope::payload && t.covers(id) && genuine(t);
  }
  /// Genuine node token over (path, id) with path scope.
  bool verifies_path(const SignatureToken& t, const Path& path, const MessageId& id) const {
    return t.scope == SignScope::path && t.kind == SignerKind::node && t.signed_path == path && t.covers(id) && genuine(t);
  }

  struct Attestation {
    NodeId owner;
    SignatureToken token;
  };
  /// Successful attestations, in order.
  const std::vector<Attestation>& attestations() const { return attestations_; }
  const Topology& topology() const { return *g_; }
  /// Every token minted so far.
  const std::set<SignatureToken>& minted() const { return minted_; }

 private:
  friend class Signer;
  friend class TrustedComponent;

  SignatureToken mint(SignatureToken t) {
    minted_.insert(t);
    return t;
  }

  const Topology* g_;
  std::set<SignatureToken> minted_;
  std::vector<Attestation> attestations_;
};

/// Signing capability bound to one identity.
class Signer {
 public:
  Signer(TokenAuthority& authority, NodeId self) : authority_(&authority), self_(self) {}

  NodeId self() const { return self_; }
  SignatureToken sign_payload(const MessageId& id) const;
  SignatureToken sign_path(const Path& path, const MessageId& id) const;

 private:
  TokenAuthority* authority_;
  NodeId self_;
};

/// One signed-path entry: `path` is the prefix the signer vouches for; the
/// represented dissemination path is path + [signer]. A payload-scope token is
/// accepted with an empty prefix and stands for the single-node path [signer].
struct SignedPath {
  Path path;
  SignatureToken sig;

  friend bool operator==(const SignedPath&, const SignedPath&) = default;
  friend auto operator<=>(const SignedPath&, const SignedPath&) = default;
};

/// Dissemination path represented by a signed entry, with trusted nodes and
/// the broadcaster removed.
Path signed_entry_path(const SignedPath& e, const MessageId& id, const Topology& g);

/// Trusted component hosted by an authenticated node. Honest by assumption;
/// mints TC tokens only after checking its evidence.
class TrustedComponent {
 public:
  TrustedComponent(TokenAuthority& authority, NodeId owner, std::size_t f);

  NodeId owner() const { return owner_; }

  /// Endorses a payload signed by the broadcaster, by a trusted node, or by
  /// another TC.
  SignatureToken attest_signature(const MessageId& id, const SignatureToken& sig);

  /// Endorses a payload backed by f+1 verifying signed paths that are pairwise
  /// disjoint once trusted nodes and the broadcaster are removed.
  SignatureToken attest_paths(const MessageId& id, const std::vector<SignedPath>& entries);

 private:
  SignatureToken endorse(const MessageId& id);

  TokenAuthority* authority_;
  NodeId owner_;
  std::size_t f_;
};

}  // namespace hybridrc
