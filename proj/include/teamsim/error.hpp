#pragma once

#include <stdexcept>
#include <string>

namespace teamsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document. line/column are 1-based; 0 when unknown.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")" : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class SemanticError : public Error {
 public:
  SemanticError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + " " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

#define TEAMSIM_ERROR(Name)         \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  }

TEAMSIM_ERROR(InsufficientArea);
TEAMSIM_ERROR(CellNotOpen);
TEAMSIM_ERROR(NoRoute);
TEAMSIM_ERROR(UnknownRegion);
TEAMSIM_ERROR(NoFreeCell);
TEAMSIM_ERROR(IllegalChange);
TEAMSIM_ERROR(UnknownAgent);
TEAMSIM_ERROR(ParticipantBusy);
TEAMSIM_ERROR(PolicyFailure);
TEAMSIM_ERROR(NoTargets);
TEAMSIM_ERROR(MalformedLog);
TEAMSIM_ERROR(VersionMismatch);
TEAMSIM_ERROR(InvalidState);
TEAMSIM_ERROR(NotFound);
TEAMSIM_ERROR(AdapterError);
TEAMSIM_ERROR(CassetteMiss);

class AdapterTimeout : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

class AdapterUnavailable : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

#undef TEAMSIM_ERROR

}  // namespace teamsim
