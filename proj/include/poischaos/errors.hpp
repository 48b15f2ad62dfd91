#pragma once

#include <stdexcept>
#include <string>

namespace poischaos
{
//! Precondition violated by the caller (bad index, mismatched orders, ...).
class InvalidArgument : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

//! Two kernels whose orders must agree do not.
class OrderMismatch : public InvalidArgument
{
  public:
    using InvalidArgument::InvalidArgument;
};

//! A configured enumeration or evaluation cap would be exceeded.
class ResourceLimit : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace poischaos
