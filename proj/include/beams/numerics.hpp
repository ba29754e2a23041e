#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace beams {

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol, int max_iter = 200);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    // Root-mean-square deviation of the data from the fitted line.
    double residual = 0.0;
    std::size_t n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);
// Gauss-Hermite rule for the weight exp(-z^2) on the real line.
GaussRule gauss_hermite(int n);

// Worker count: BEAMS_THREADS if set, else the hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace beams
