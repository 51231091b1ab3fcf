#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cluedex {

// Token ids are dense and shared between the tokenizer, the index and all
// scorers. SEP separates documents in the indexed stream and sorts before
// every real token; UNK is what word-mode queries map out-of-vocabulary
// words to. Neither ever appears inside a document.
using TokenId = std::uint32_t;

inline constexpr TokenId kSepToken = 0;
inline constexpr TokenId kUnkToken = 1;
inline constexpr TokenId kFirstRealToken = 2;

// Hard-mask value for disallowed logits. Finite so that sums and comparisons
// stay well-defined; exp() of it is exactly 0.0 in double precision.
inline constexpr double kNegInf = -1e30;

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kConfig,
  kProtocol,
  kTimeout,
  kVocabMismatch,
  kAmbiguous,
  kAbsent,
  kRuntime,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cluedex
