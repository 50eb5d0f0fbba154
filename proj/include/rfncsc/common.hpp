#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rfncsc {

using Vec = Eigen::VectorXd;
// Traces are columns; Eigen's default storage is column-major.
using Image = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorKind {
    InvalidParameter,
    DegenerateAtom,
    KernelInvariant,
    KernelShape,
    Boundary,
    InfeasibleModel,
    UndefinedScore,
    Io,
    Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

}  // namespace rfncsc
