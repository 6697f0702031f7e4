#ifndef meetpat_error_hpp
#define meetpat_error_hpp

#include <stdexcept>
#include <string>

namespace meetpat {

/*
 * Base class for every error raised by the toolkit. The CLI maps each
 * subclass to a distinct exit status.
 */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// malformed input text (bad JSON, missing fields)
class ParseError : public Error {
public:
    using Error::Error;
};

// well-formed input that violates the data model (unknown label, bad index)
class SchemaError : public Error {
public:
    using Error::Error;
};

// argument values outside their documented domain
class ValidationError : public Error {
public:
    using Error::Error;
};

// a model could not be fit to the supplied data
class FitError : public Error {
public:
    using Error::Error;
};

// file could not be read or written
class IoError : public Error {
public:
    using Error::Error;
};

// an operation declined to run because its output would be too large
class RefusalError : public Error {
public:
    using Error::Error;
};

// caller broke a documented precondition
class ContractViolation : public Error {
public:
    using Error::Error;
};

} // namespace meetpat

#endif
