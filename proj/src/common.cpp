#include "rfncsc/common.hpp"

namespace rfncsc {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::DegenerateAtom: return "degenerate-atom";
        case ErrorKind::KernelInvariant: return "kernel-invariant";
        case ErrorKind::KernelShape: return "kernel-shape";
        case ErrorKind::Boundary: return "boundary";
        case ErrorKind::InfeasibleModel: return "infeasible-model";
        case ErrorKind::UndefinedScore: return "undefined-score";
        case ErrorKind::Io: return "io";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

}  // namespace rfncsc
