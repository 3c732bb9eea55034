#pragma once

#include <stdexcept>
#include <string>

namespace nosense {

enum class ErrorCode {
  kInvalidArgument,
  kZeroNorm,
  kNonFinite,
  kDimensionMismatch,
  kIo,
  kBadMagic,
  kCrcMismatch,
  kTruncated,
  kUnsupportedDtype,
  kMixedDimensions,
  kSchema,
  kCountMismatch,
  kOutOfOrderFrame,
  kEmptyStream,
  kMissingRawQuestion,
  kEncoderUnavailable,
  kLengthMismatch,
  kEmpty,
  kZeroGold,
  kInvalidRepeat,
  kMissingMetadata,
  kInfeasibleParams,
  kConfig,
};

const char* to_string(ErrorCode code);

// Every failure raised by the core carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nosense
