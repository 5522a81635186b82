#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dcsm {

enum class SplineBoundary {
    kNotAKnot,  // third derivative continuous at the first/last interior knot
    kNatural,   // zero second derivative at the ends
};

/// Interpolating cubic spline on strictly increasing knots. Not-a-knot
/// reproduces cubic polynomials exactly; natural reproduces only linear ones.
class CubicSpline {
  public:
    CubicSpline(std::span<const double> x, std::span<const double> y,
                SplineBoundary boundary = SplineBoundary::kNotAKnot)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        const std::size_t n = x_.size();
        if (n < 4 || y_.size() != n) {
            throw std::invalid_argument("CubicSpline: need >= 4 aligned knots");
        }
        for (std::size_t i = 1; i < n; ++i) {
            if (!(x_[i] > x_[i - 1])) {
                throw std::invalid_argument("CubicSpline: knots must strictly increase");
            }
        }
        m_.assign(n, 0.0);

        // Tridiagonal system for the interior second derivatives M_1..M_{n-2};
        // the boundary condition supplies M_0 and M_{n-1}.
        const std::size_t k = n - 2;
        std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
        auto h = [&](std::size_t i) { return x_[i + 1] - x_[i]; };
        auto slope = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h(i); };

        for (std::size_t i = 1; i <= k; ++i) {
            sub[i - 1] = h(i - 1) / 6.0;
            diag[i - 1] = (h(i - 1) + h(i)) / 3.0;
            sup[i - 1] = h(i) / 6.0;
            rhs[i - 1] = slope(i) - slope(i - 1);
        }

        if (boundary == SplineBoundary::kNatural) {
            // M_0 = M_{n-1} = 0: nothing folds into the interior rows.
        } else {
            // Not-a-knot: M_0 = ((h0+h1) M_1 - h0 M_2) / h1 and mirrored.
            const double h0 = h(0), h1 = h(1);
            diag[0] += sub[0] * (h0 + h1) / h1;
            sup[0] -= sub[0] * h0 / h1;
            sub[0] = 0.0;
            const double hm = h(n - 2), hm1 = h(n - 3);
            diag[k - 1] += sup[k - 1] * (hm + hm1) / hm1;
            sub[k - 1] -= sup[k - 1] * hm / hm1;
            sup[k - 1] = 0.0;
        }

        // Thomas algorithm.
        for (std::size_t i = 1; i < k; ++i) {
            const double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i >= 1; --i) {
            m_[i] = (rhs[i - 1] - sup[i - 1] * m_[i + 1]) / diag[i - 1];
        }

        if (boundary == SplineBoundary::kNatural) {
            m_[0] = 0.0;
            m_[n - 1] = 0.0;
        } else {
            m_[0] = ((h(0) + h(1)) * m_[1] - h(0) * m_[2]) / h(1);
            m_[n - 1] =
                ((h(n - 2) + h(n - 3)) * m_[n - 2] - h(n - 2) * m_[n - 3]) / h(n - 3);
        }
    }

    double operator()(double x) const {
        const std::size_t n = x_.size();
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : (it - x_.begin()) - 1;
        i = std::min(i, n - 2);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

  private:
    std::vector<double> x_, y_, m_;
};

}  // namespace dcsm
