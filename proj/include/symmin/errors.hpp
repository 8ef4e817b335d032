#pragma once

#include <stdexcept>
#include <string>

namespace symmin {

/// Base class for all library errors. `code()` is a stable machine-readable
/// identifier surfaced by the CLI.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

#define SYMMIN_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                     \
  public:                                                         \
    explicit Name(const std::string& msg) : Error(#Name, msg) {}  \
  }

SYMMIN_DEFINE_ERROR(SyntaxError);
SYMMIN_DEFINE_ERROR(UnknownVariable);
SYMMIN_DEFINE_ERROR(ArityError);
SYMMIN_DEFINE_ERROR(GuardError);
SYMMIN_DEFINE_ERROR(DomainError);
SYMMIN_DEFINE_ERROR(Infeasible);
SYMMIN_DEFINE_ERROR(OriginRequired);
SYMMIN_DEFINE_ERROR(SupportClipped);
SYMMIN_DEFINE_ERROR(GridMismatch);
SYMMIN_DEFINE_ERROR(NotTranslationInvariant);
SYMMIN_DEFINE_ERROR(DegenerateGram);
SYMMIN_DEFINE_ERROR(Inadmissible);
SYMMIN_DEFINE_ERROR(NoSignChange);
SYMMIN_DEFINE_ERROR(NotConverged);
SYMMIN_DEFINE_ERROR(DivergentPenalty);
SYMMIN_DEFINE_ERROR(AllLambdaZero);
SYMMIN_DEFINE_ERROR(NotSplitting);
SYMMIN_DEFINE_ERROR(NoGroundState);
SYMMIN_DEFINE_ERROR(NonNegativePotential);
SYMMIN_DEFINE_ERROR(SupportsOverlap);
SYMMIN_DEFINE_ERROR(OutOfBox);
SYMMIN_DEFINE_ERROR(MissingGolden);
SYMMIN_DEFINE_ERROR(ConfigError);
SYMMIN_DEFINE_ERROR(PreconditionError);

#undef SYMMIN_DEFINE_ERROR

}  // namespace symmin
