#pragma once

#include <stdexcept>
#include <string>

namespace manetlab {

// Base for all conditions that indicate misuse of an API or an invalid input
// artifact. Runtime packet losses and setup failures are ordinary outcomes,
// not exceptions; they travel through return values.
class Error : public std::runtime_error
{
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SchedulingInPast : public Error
{
  public:
    using Error::Error;
};

class UnknownNode : public Error
{
  public:
    using Error::Error;
};

class NotAssociated : public Error
{
  public:
    using Error::Error;
};

class DuplicatePackage : public Error
{
  public:
    using Error::Error;
};

class ParseError : public Error
{
  public:
    using Error::Error;
};

class ValidationError : public Error
{
  public:
    using Error::Error;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

} // namespace manetlab
