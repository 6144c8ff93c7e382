#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace germforge {

// Broad failure classes, used by the CLI to pick exit codes:
// input errors exit with 2, numerical failures with 3.
enum class ErrorKind {
    Input,
    Numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(std::string message)
        : Error(ErrorKind::Input, std::move(message)) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(std::string message)
        : Error(ErrorKind::Numerical, std::move(message)) {}
};

// Parser failure with a byte offset into the source text.
class SyntaxError : public InputError {
public:
    SyntaxError(std::size_t position, std::string expected)
        : InputError("syntax error at position " + std::to_string(position) +
                     ": expected " + expected),
          position_(position), expected_(std::move(expected)) {}

    std::size_t position() const { return position_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class SemanticError : public InputError {
public:
    explicit SemanticError(std::string message) : InputError(std::move(message)) {}
};

class OrderMismatch : public InputError {
public:
    explicit OrderMismatch(std::string message) : InputError(std::move(message)) {}
};

class NotInvertible : public InputError {
public:
    explicit NotInvertible(std::string message) : InputError(std::move(message)) {}
};

class InvalidWord : public InputError {
public:
    explicit InvalidWord(std::string message) : InputError(std::move(message)) {}
};

class InvalidOrders : public InputError {
public:
    explicit InvalidOrders(std::string message) : InputError(std::move(message)) {}
};

class TorsionViolated : public InputError {
public:
    explicit TorsionViolated(std::string message) : InputError(std::move(message)) {}
};

class GeometryError : public InputError {
public:
    explicit GeometryError(std::string message) : InputError(std::move(message)) {}
};

class ResolutionTooCoarse : public InputError {
public:
    explicit ResolutionTooCoarse(std::string message) : InputError(std::move(message)) {}
};

class NotARelation : public InputError {
public:
    explicit NotARelation(std::string message) : InputError(std::move(message)) {}
};

class NoUniqueMaximum : public InputError {
public:
    explicit NoUniqueMaximum(std::string message) : InputError(std::move(message)) {}
};

class OutOfDomain : public NumericalError {
public:
    explicit OutOfDomain(std::string message) : NumericalError(std::move(message)) {}
};

class NewtonDivergence : public NumericalError {
public:
    explicit NewtonDivergence(std::string message) : NumericalError(std::move(message)) {}
};

class EvaluationFailure : public NumericalError {
public:
    explicit EvaluationFailure(std::string message) : NumericalError(std::move(message)) {}
};

class SolverFailure : public NumericalError {
public:
    explicit SolverFailure(std::string message) : NumericalError(std::move(message)) {}
};

class NonRealRatio : public NumericalError {
public:
    explicit NonRealRatio(std::string message) : NumericalError(std::move(message)) {}
};

class JetExtractionFailure : public NumericalError {
public:
    explicit JetExtractionFailure(std::string message) : NumericalError(std::move(message)) {}
};

class PerturbationExhausted : public NumericalError {
public:
    explicit PerturbationExhausted(std::string message) : NumericalError(std::move(message)) {}
};

} // namespace germforge
