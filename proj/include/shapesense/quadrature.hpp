#pragma once

#include <functional>

namespace shapesense {

// Adaptive Simpson to an absolute tolerance. The integrand must be smooth
// on [a, b]; split at known kinks before calling.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 48);

}  // namespace shapesense
