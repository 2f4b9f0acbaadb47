#pragma once

#include <stdexcept>
#include <string>

namespace convrag {

// Base class for all engine errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- record validation ---
class MalformedRecord : public Error {
 public:
  using Error::Error;
};
class EmptyConversation : public Error {
 public:
  using Error::Error;
};
class BadRole : public Error {
 public:
  using Error::Error;
};

// --- fusion ---
class EmptyInput : public Error {
 public:
  using Error::Error;
};
class BadProfile : public Error {
 public:
  using Error::Error;
};

// --- rewriting ---
class UnparseableOutput : public Error {
 public:
  using Error::Error;
};
class MissingField : public Error {
 public:
  using Error::Error;
};
class UnknownCorpus : public Error {
 public:
  using Error::Error;
};

// --- retrieval ---
class DuplicatePassageId : public Error {
 public:
  using Error::Error;
};
class EmptyQuery : public Error {
 public:
  using Error::Error;
};
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// --- text generation ---
class BackendExhausted : public Error {
 public:
  using Error::Error;
};
class RoleUnbound : public Error {
 public:
  using Error::Error;
};
class ScriptMiss : public Error {
 public:
  using Error::Error;
};
// Transient transport failure; the retry loop converts this into
// BackendExhausted once attempts run out.
class TransientBackendError : public Error {
 public:
  using Error::Error;
};

// --- evaluation ---
class EmptyGold : public Error {
 public:
  using Error::Error;
};
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// --- configuration ---
class BadConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace convrag
