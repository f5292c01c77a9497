#pragma once

#include <stdexcept>
#include <string>

namespace iac {

/// Base class for every error the analyzer reports to callers. The CLI maps
/// all of these to the usage/parse-error exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed YAML or JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that is not a usable CloudFormation template.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// The resource catalog file is malformed or violates a rule invariant.
class CatalogError : public Error {
 public:
  using Error::Error;
};

/// A metric or rule lookup on a type that is not classified Supported.
class NotSupportedError : public Error {
 public:
  using Error::Error;
};

/// A catalog rule names a metric the node's type does not have.
class RuleInstantiationError : public Error {
 public:
  using Error::Error;
};

/// Malformed SMT-LIB text.
class SmtSyntaxError : public Error {
 public:
  using Error::Error;
};

/// A user constraint names a solver symbol that is not a declared variable.
class UnknownSymbolError : public Error {
 public:
  UnknownSymbolError(std::string symbol, std::string nearest);

  const std::string& symbol() const { return symbol_; }
  const std::string& nearest() const { return nearest_; }

 private:
  std::string symbol_;
  std::string nearest_;
};

/// An estimates file entry that does not name a public metric of a node.
class UnknownEstimateKeyError : public Error {
 public:
  using Error::Error;
};

/// A bounds target that does not name a node variable.
class UnknownTargetKeyError : public Error {
 public:
  using Error::Error;
};

/// An estimates file value that is not a finite, nonnegative number of the
/// metric's sort.
class EstimateValueError : public Error {
 public:
  using Error::Error;
};

class SolverNotFoundError : public Error {
 public:
  using Error::Error;
};

/// The solver exited abnormally and produced no usable response.
class SolverCrashedError : public Error {
 public:
  using Error::Error;
};

}  // namespace iac
