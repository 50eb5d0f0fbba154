#pragma once

#include "rfncsc/dictionary.hpp"

namespace rfncsc {

struct ScoreSet {
    double rho_x = 0.0;
    double rho_x_first = 0.0;
    double rho_y = 0.0;
    double rho_support = 0.0;
    double mse = 0.0;
    double m_it = 0.0;
};

double corr_images(const Image& a, const Image& b);
double support_corr(const Image& a, const Image& b);
double mse_code(const Image& x, const Image& x_hat);
Image reconstruct(const ConvDictionary& d, const Image& x_hat);
double reconstruction_score(const Image& y, const ConvDictionary& d, const Image& x_hat);

}  // namespace rfncsc
