// SPDX-License-Identifier: Apache-2.0
#include "resmaster/fft.hpp"

#include <cmath>
#include <numbers>

#include "resmaster/errors.hpp"

namespace resmaster {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
    if (n == 0) {
        throw InvalidArgument("FftPlan: length must be positive");
    }
    pow2_len_ = pow2_ ? n : next_pow2(2 * n - 1);

    const std::size_t m = pow2_len_;
    twiddles_.resize(m / 2);
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    bitrev_.resize(m);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < m) ++bits;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        }
        bitrev_[i] = r;
    }

    if (!pow2_) {
        // chirp[j] = exp(-i pi j^2 / n); j^2 reduced mod 2n keeps the angle small.
        chirp_.resize(n);
        const std::size_t two_n = 2 * n;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t jj = (j * j) % two_n;
            const double angle = -std::numbers::pi * static_cast<double>(jj) / static_cast<double>(n);
            chirp_[j] = {std::cos(angle), std::sin(angle)};
        }
        kernel_spectrum_.assign(m, Complex{});
        kernel_spectrum_[0] = std::conj(chirp_[0]);
        for (std::size_t j = 1; j < n; ++j) {
            kernel_spectrum_[j] = std::conj(chirp_[j]);
            kernel_spectrum_[m - j] = std::conj(chirp_[j]);
        }
        radix2(kernel_spectrum_);
    }
}

void FftPlan::radix2(std::span<Complex> a) const {
    const std::size_t m = a.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t r = bitrev_[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = m / len;
        for (std::size_t start = 0; start < m; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex w = twiddles_[k * step];
                const Complex u = a[start + k];
                const Complex v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
    }
}

void FftPlan::bluestein(std::span<Complex> data) const {
    const std::size_t m = pow2_len_;
    std::vector<Complex> work(m, Complex{});
    for (std::size_t j = 0; j < n_; ++j) {
        work[j] = data[j] * chirp_[j];
    }
    radix2(work);
    for (std::size_t k = 0; k < m; ++k) {
        work[k] *= kernel_spectrum_[k];
    }
    // inverse via conjugation
    for (auto& w : work) w = std::conj(w);
    radix2(work);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) {
        data[k] = std::conj(work[k]) * scale * chirp_[k];
    }
}

void FftPlan::forward(std::span<Complex> data) const {
    if (data.size() != n_) {
        throw InvalidArgument("FftPlan: buffer length does not match plan length");
    }
    if (n_ == 1) return;
    if (pow2_) {
        radix2(data);
    } else {
        bluestein(data);
    }
}

void FftPlan::inverse(std::span<Complex> data) const {
    for (auto& x : data) x = std::conj(x);
    forward(data);
    for (auto& x : data) x = std::conj(x);
}

}  // namespace resmaster
