#pragma once

#include <stdexcept>
#include <string>

namespace threatgeo {

/// Base class for all data-level failures raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// A record could not be parsed; `field()` names the offending field when known.
class ParseError : public Error {
public:
	explicit ParseError(std::string field, const std::string &detail = {})
	    : Error(detail.empty() ? "parse error: " + field : "parse error: " + field + ": " + detail),
	      field_(std::move(field)) {}

	const std::string &field() const noexcept {
		return field_;
	}

private:
	std::string field_;
};

class IoError : public Error {
public:
	using Error::Error;
};

class EmptyInputError : public Error {
public:
	explicit EmptyInputError(const std::string &what = "empty input") : Error(what) {}
};

class TooFewNodesError : public Error {
public:
	explicit TooFewNodesError(const std::string &what = "fewer than 2 eligible countries") : Error(what) {}
};

class EmptyStudyError : public Error {
public:
	explicit EmptyStudyError(std::string clause)
	    : Error("case study is empty after the '" + clause + "' clause"), clause_(std::move(clause)) {}

	const std::string &clause() const noexcept {
		return clause_;
	}

private:
	std::string clause_;
};

class ConvergenceError : public Error {
public:
	ConvergenceError(const std::string &what, double residual) : Error(what), residual_(residual) {}

	double residual() const noexcept {
		return residual_;
	}

private:
	double residual_;
};

/// HTTP 401/403 from a feed.
class CredentialError : public Error {
public:
	using Error::Error;
};

} // namespace threatgeo
