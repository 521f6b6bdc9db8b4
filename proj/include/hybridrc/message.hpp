#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hybridrc/crypto.hpp"
#include "hybridrc/graph.hpp"

namespace hybridrc {

/// Unsigned dissemination path message.
struct DolevPath {
  MessageId id;
  Path path;

  friend bool operator==(const DolevPath&, const DolevPath&) = default;
};

/// Signature message: one token over (payload, broadcaster).
struct FloodSig {
  MessageId id;
  SignatureToken sig;

  friend bool operator==(const FloodSig&, const FloodSig&) = default;
};

/// Hybrid path message: unsigned path plus the signed subpaths gathered so far.
struct DualPath {
  MessageId id;
  Path path;
  std::vector<SignedPath> signed_paths;

  friend bool operator==(const DualPath&, const DualPath&) = default;
};

using ProtocolMessage = std::variant<DolevPath, FloodSig, DualPath>;

const MessageId& message_id(const ProtocolMessage& m);

/// One-line human-readable rendering, used in traces.
std::string summary(const ProtocolMessage& m);

}  // namespace hybridrc
