#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sscnn {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two or more input points coincide exactly; 1/d^2 weights would divide by zero.
class DuplicatePointsError : public Error {
public:
    std::vector<std::pair<int, int>> pairs;
    explicit DuplicatePointsError(std::vector<std::pair<int, int>> dup_pairs);
};

/// A graph vertex has zero degree, so D^{-1/2} is undefined.
class IsolatedVertexError : public Error {
public:
    int vertex;
    explicit IsolatedVertexError(int v);
};

/// The iterative eigensolver stalled before reaching the requested accuracy.
class ConvergenceFailure : public Error {
public:
    int iterations;
    double residual;
    ConvergenceFailure(int iters, double res);
};

class TooFewPointsError : public Error {
public:
    explicit TooFewPointsError(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/// Kernel coefficient vector length inconsistent with the kernel kind/order.
class BadSpecError : public Error {
public:
    explicit BadSpecError(const std::string& msg) : Error(msg) {}
};

/// A point lies outside the unit cube during voxelization.
class OutOfBoundsError : public Error {
public:
    explicit OutOfBoundsError(const std::string& msg) : Error(msg) {}
};

class EmptyOccupancyError : public Error {
public:
    explicit EmptyOccupancyError(const std::string& msg) : Error(msg) {}
};

class BadAssignmentError : public Error {
public:
    explicit BadAssignmentError(const std::string& msg) : Error(msg) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

/// The loss value does not depend on any trainable tensor.
class DisconnectedLoss : public Error {
public:
    explicit DisconnectedLoss(const std::string& msg) : Error(msg) {}
};

/// A gradient tensor contains NaN or Inf; the optimizer step is aborted.
class NonFiniteGradient : public Error {
public:
    std::string tensor_name;
    explicit NonFiniteGradient(const std::string& name);
};

/// A forward activation became non-finite; reports the layer index.
class NonFiniteActivation : public Error {
public:
    int layer_index;
    explicit NonFiniteActivation(int layer);
};

class UnknownLabelError : public Error {
public:
    explicit UnknownLabelError(const std::string& msg) : Error(msg) {}
};

/// A pipeline command was invoked before the artifact it consumes exists.
class MissingPrerequisite : public Error {
public:
    MissingPrerequisite(const std::string& artifact, const std::string& producer);
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace sscnn
