#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmelab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Out-of-domain parameters (alpha <= 0, q < 1, j > m, ...).
class ParameterError : public Error {
   public:
    using Error::Error;
};

/// A flux or datum evaluator returned a non-finite value.
class EvaluationError : public Error {
   public:
    using Error::Error;
};

class SamplingError : public Error {
   public:
    using Error::Error;
};

class DomainError : public Error {
   public:
    using Error::Error;
};

class StepSizeError : public Error {
   public:
    using Error::Error;
};

class BudgetError : public Error {
   public:
    using Error::Error;
};

class AuditError : public Error {
   public:
    using Error::Error;
};

class FitError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

class PlotError : public Error {
   public:
    using Error::Error;
};

/// The explicit update produced NaN or inf.
class BlowUpError : public Error {
   public:
    BlowUpError(const std::string& msg, long step, std::size_t cell, double time)
        : Error(msg), step_(step), cell_(cell), time_(time) {}

    long step() const noexcept { return step_; }
    std::size_t cell() const noexcept { return cell_; }
    double time() const noexcept { return time_; }

   private:
    long step_;
    std::size_t cell_;
    double time_;
};

}  // namespace pmelab
