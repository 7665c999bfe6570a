#pragma once

#include <stdexcept>
#include <string>

namespace pcflow {

enum class ErrorKind {
  InvalidArgument,
  Segmentation,     // region growing produced no region
  InsufficientData, // too few samples / minima / repeats
  Io,
  Config,
};

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, std::string const &what)
    : std::runtime_error(what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string const &what) { throw Error(kind, what); }

inline void require(bool cond, std::string const &what)
{
  if (!cond) { fail(ErrorKind::InvalidArgument, what); }
}

} // namespace pcflow
