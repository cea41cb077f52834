#pragma once

#include <stdexcept>
#include <string>

namespace botgate {

// Base for every error raised by the library. Each subsystem throws a
// subclass so the CLI can map failures onto stable exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Precondition violation on an otherwise pure operation.
class DomainError : public Error {
public:
  using Error::Error;
};

class LoadError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// GitHub API failures.
class CredentialError : public Error {
public:
  using Error::Error;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

class TransportError : public Error {
public:
  using Error::Error;
};

class TrainingDataError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class ModelVersionError : public ModelError {
public:
  using ModelError::ModelError;
};

class CorruptModelError : public ModelError {
public:
  using ModelError::ModelError;
};

class ModelCompatibilityError : public ModelError {
public:
  using ModelError::ModelError;
};

// Rating service.
class ValidationError : public Error {
public:
  using Error::Error;
};

class UnknownAccountError : public Error {
public:
  using Error::Error;
};

class AuthError : public Error {
public:
  using Error::Error;
};

// Authenticated, but the rater's role or assignment does not allow the call.
class ForbiddenError : public Error {
public:
  using Error::Error;
};

// The request is valid but the account is not in a state that accepts it.
class ConflictError : public Error {
public:
  using Error::Error;
};

} // namespace botgate
