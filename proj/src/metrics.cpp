#include "rfncsc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rfncsc {

double corr_images(const Image& a, const Image& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::InvalidParameter,
            "image shapes differ");
    const double na = a.norm(), nb = b.norm();
    require(na > 0.0 && nb > 0.0, ErrorKind::UndefinedScore, "correlation of a zero image");
    // Column stacking is the storage order, so a flat dot product is enough.
    const double c = a.reshaped().dot(b.reshaped()) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

double support_corr(const Image& a, const Image& b) {
    return corr_images((a.array() != 0.0).cast<double>().matrix(),
                       (b.array() != 0.0).cast<double>().matrix());
}

double mse_code(const Image& x, const Image& x_hat) {
    require(x.rows() == x_hat.rows() && x.cols() == x_hat.cols(), ErrorKind::InvalidParameter,
            "image shapes differ");
    if (x.cols() == 0) return 0.0;
    return (x - x_hat).colwise().squaredNorm().mean();
}

Image reconstruct(const ConvDictionary& d, const Image& x_hat) {
    require(x_hat.rows() == d.atoms(), ErrorKind::InvalidParameter, "code length mismatch");
    Image y(d.ly, x_hat.cols());
    for (Index j = 0; j < x_hat.cols(); ++j) y.col(j) = apply_dictionary(d, x_hat.col(j));
    return y;
}

double reconstruction_score(const Image& y, const ConvDictionary& d, const Image& x_hat) {
    return corr_images(y, reconstruct(d, x_hat));
}

}  // namespace rfncsc
