// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace resmaster {

using Complex = std::complex<double>;

/// One-dimensional complex DFT of fixed length. Powers of two use an iterative
/// radix-2 transform; every other length goes through Bluestein's chirp-z
/// algorithm on a padded power-of-two transform. Immutable once built, so a
/// plan may be shared between threads.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// In-place unnormalized forward transform, X[k] = sum_j x[j] e^{-2 pi i jk/n}.
    void forward(std::span<Complex> data) const;

    /// In-place unnormalized inverse transform (positive exponent, no 1/n).
    void inverse(std::span<Complex> data) const;

private:
    void radix2(std::span<Complex> data) const;
    void bluestein(std::span<Complex> data) const;

    std::size_t n_;
    bool pow2_;
    // radix-2 state, sized for n_ (pow2) or for the padded length (Bluestein)
    std::size_t pow2_len_ = 0;
    std::vector<Complex> twiddles_;
    std::vector<std::size_t> bitrev_;
    // Bluestein state
    std::vector<Complex> chirp_;
    std::vector<Complex> kernel_spectrum_;
};

}  // namespace resmaster
